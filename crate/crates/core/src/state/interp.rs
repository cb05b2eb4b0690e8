//! Off-grid evaluation of a [`DistributionState`].
//!
//! Radially the interpolated quantity is `h = ln(g/r) = ln(f) + r`, a
//! four-point Lagrange polynomial in `r`. This keeps the interpolant
//! positive and reproduces every Maxwellian `f = c e^{-r/T}` exactly, since
//! `h` is then linear in `r`. The stencil nearest the origin is also used on
//! `[0, r₀)`. Stencils containing a non-positive value fall back to linear
//! interpolation in `g` (proportional to `r` below `r₀`). Beyond `r_max` the
//! interpolant is zero.
//!
//! In direction, values are blended from the three nearest nodes with
//! modified Shepard weights `1/dᵢ − 1/d₄`, which are continuous in the query
//! direction and exact at nodes.

use super::{weight_function, DistributionState};
use crate::kinematics::MomentumVector;
use crate::scalar::Real;

const STENCIL: usize = 6;

/// Where a radius falls relative to the radial nodes, with the weights
/// needed to evaluate any column there.
#[derive(Debug, Clone, Copy)]
pub enum RadialStencil<T: Real> {
    Inside {
        r: T,
        start: usize,
        weights: [T; STENCIL],
        /// Linear fallback: lower node and fraction (`r/r₀` below `r₀`).
        lower: usize,
        frac: T,
        below: bool,
    },
    /// `r > r_max`
    Outside,
}

/// Up to three direction nodes with normalised blending weights.
#[derive(Debug, Clone, Copy)]
pub struct DirectionWeights<T: Real> {
    pub nodes: [usize; 3],
    pub weights: [T; 3],
    pub count: usize,
}

impl<T: Real> DirectionWeights<T> {
    pub fn single(node: usize) -> Self {
        Self {
            nodes: [node, 0, 0],
            weights: [T::one(), T::zero(), T::zero()],
            count: 1,
        }
    }

    /// Modified Shepard weights for unit direction `d` among `nodes`.
    pub fn locate(nodes: &[MomentumVector<T>], d: &MomentumVector<T>) -> Self {
        // four nearest by chord distance, sorted ascending
        let mut best = [(T::infinity(), usize::MAX); 4];
        for (j, node) in nodes.iter().enumerate() {
            let d2 = node.dist_sq(d);
            if d2 < best[3].0 {
                let mut k = 3;
                while k > 0 && d2 < best[k - 1].0 {
                    best[k] = best[k - 1];
                    k -= 1;
                }
                best[k] = (d2, j);
            }
        }
        let tiny = T::lit(1e-28);
        if best[0].0 <= tiny {
            return Self::single(best[0].1);
        }
        let count = nodes.len().min(3);
        let cutoff = if nodes.len() > 3 {
            best[3].0.sqrt().recip()
        } else {
            T::zero()
        };
        let mut out = Self {
            nodes: [0; 3],
            weights: [T::zero(); 3],
            count,
        };
        let mut total = T::zero();
        for (k, &(d2, node)) in best.iter().take(count).enumerate() {
            let w = (d2.sqrt().recip() - cutoff).max(T::zero());
            out.nodes[k] = node;
            out.weights[k] = w;
            total += w;
        }
        if total > T::zero() {
            for w in out.weights.iter_mut() {
                *w /= total;
            }
        } else {
            // all three tied with the fourth: equal blend
            let third = T::from_usize_lossy(count).recip();
            out.weights.iter_mut().take(count).for_each(|w| *w = third);
        }
        out
    }
}

/// Precomputed logarithms and stencil data for one state.
#[derive(Debug, Clone)]
pub struct Interpolant<'a, T: Real> {
    state: &'a DistributionState<T>,
    /// `ln(g/r)`, NaN where `g ≤ 0`
    log_h: Vec<T>,
    /// Lagrange denominators per stencil start.
    denominators: Vec<[T; STENCIL]>,
}

impl<'a, T: Real> Interpolant<'a, T> {
    pub fn new(state: &'a DistributionState<T>) -> Self {
        let grid = &state.grid;
        let nr = grid.n_radial();
        let nd = grid.n_directions();
        let nodes = &grid.radial.nodes;
        let log_h: Vec<T> = state
            .g
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if g > T::zero() {
                    (g / nodes[i / nd]).ln()
                } else {
                    T::nan()
                }
            })
            .collect();
        let denominators = (0..=nr - STENCIL)
            .map(|j0| {
                let mut d = [T::one(); STENCIL];
                for (k, dk) in d.iter_mut().enumerate() {
                    for m in 0..STENCIL {
                        if m != k {
                            *dk *= nodes[j0 + k] - nodes[j0 + m];
                        }
                    }
                }
                d
            })
            .collect();
        Self {
            state,
            log_h,
            denominators,
        }
    }

    pub fn state(&self) -> &DistributionState<T> {
        self.state
    }

    pub fn radial_stencil(&self, r: T) -> RadialStencil<T> {
        let radial = &self.state.grid.radial;
        let nodes = &radial.nodes;
        let nr = nodes.len();
        if !(r <= radial.r_max) {
            return RadialStencil::Outside;
        }
        let below = r < nodes[0];
        // nodes[lower] <= r < nodes[lower + 1]
        let lower = nodes.partition_point(|&x| x <= r).saturating_sub(1).min(nr - 2);
        let frac = if below {
            r / nodes[0]
        } else {
            (r - nodes[lower]) / (nodes[lower + 1] - nodes[lower])
        };
        let start = (lower + 1).saturating_sub(STENCIL / 2).min(nr - STENCIL);
        let mut weights = [T::zero(); STENCIL];
        let den = &self.denominators[start];
        for (k, wk) in weights.iter_mut().enumerate() {
            let mut num = T::one();
            for m in 0..STENCIL {
                if m != k {
                    num *= r - nodes[start + m];
                }
            }
            *wk = num / den[k];
        }
        RadialStencil::Inside {
            r,
            start,
            weights,
            lower,
            frac,
            below,
        }
    }

    /// Interpolated weighted value `g̃` of direction column `col`.
    #[inline]
    pub fn column_value(&self, col: usize, stencil: &RadialStencil<T>) -> T {
        let nd = self.state.grid.n_directions();
        let g = &self.state.g;
        match *stencil {
            RadialStencil::Outside => T::zero(),
            RadialStencil::Inside {
                r,
                start,
                weights,
                lower,
                frac,
                below,
            } => {
                let mut acc = T::zero();
                for (k, &w) in weights.iter().enumerate() {
                    let lh = self.log_h[(start + k) * nd + col];
                    if lh.is_nan() {
                        return if below {
                            g[col] * frac
                        } else {
                            let a = g[lower * nd + col];
                            let b = g[(lower + 1) * nd + col];
                            a + frac * (b - a)
                        };
                    }
                    acc += w * lh;
                }
                r * acc.exp()
            }
        }
    }

    /// `g̃` blended across directions.
    #[inline]
    pub fn value(&self, stencil: &RadialStencil<T>, dirs: &DirectionWeights<T>) -> T {
        if let RadialStencil::Outside = stencil {
            return T::zero();
        }
        let mut acc = T::zero();
        for k in 0..dirs.count {
            acc += dirs.weights[k] * self.column_value(dirs.nodes[k], stencil);
        }
        acc
    }

    pub fn direction_weights(&self, d: &MomentumVector<T>) -> DirectionWeights<T> {
        DirectionWeights::locate(&self.state.grid.directions.nodes, d)
    }

    /// Interpolated weighted value at `p`.
    pub fn evaluate_weighted(&self, p: &MomentumVector<T>) -> T {
        let r = p.norm();
        let stencil = self.radial_stencil(r);
        if let RadialStencil::Outside = stencil {
            return T::zero();
        }
        let d = if r > T::zero() {
            *p * r.recip()
        } else {
            MomentumVector::new(T::zero(), T::zero(), T::one())
        };
        self.value(&stencil, &self.direction_weights(&d))
    }

    /// Interpolated `f(p)`.
    pub fn evaluate(&self, p: &MomentumVector<T>) -> T {
        let r = p.norm().max(T::min_positive_value());
        let g = self.evaluate_weighted(&(p.normalized().unwrap_or(MomentumVector::new(T::zero(), T::zero(), T::one())) * r));
        if g == T::zero() {
            return T::zero();
        }
        g / weight_function(r)
    }

    /// Interpolated `f` at radius `r` of an isotropic state (column 0).
    #[inline]
    pub fn evaluate_radial(&self, r: T) -> T {
        let r = r.max(T::min_positive_value());
        let g = self.column_value(0, &self.radial_stencil(r));
        if g == T::zero() {
            return T::zero();
        }
        g / weight_function(r)
    }
}
