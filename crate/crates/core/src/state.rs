//! Distribution function on a product momentum grid.
//!
//! Values are stored weighted, `g = w f` with `w = |p| e^{|p|}`, so the
//! `L^∞_w` norm is a maximum over stored values and the stored field is
//! bounded and slowly varying for the data classes of interest.

mod interp;
mod snapshot;

use std::str::FromStr;
use std::sync::Arc;

pub use interp::{DirectionWeights, Interpolant, RadialStencil};
pub use snapshot::{parse_snapshot, serialize_snapshot};

use crate::error::{Error, Result};
use crate::kinematics::{MomentumVector, Rotation};
use crate::quadrature::{RadialRule, SphereRule};
use crate::scalar::Real;
use crate::summation::CompensatedSum;

/// Radial rule × direction rule. Node `(i, j)` sits at `rᵢ ωⱼ` with flat
/// index `i · n_dir + j` (radial-major).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid<T: Real> {
    pub radial: RadialRule<T>,
    pub directions: SphereRule<T>,
}

impl<T: Real> MomentumGrid<T> {
    pub fn new(radial: RadialRule<T>, directions: SphereRule<T>) -> Result<Self> {
        if radial.is_empty() || directions.is_empty() {
            return Err(Error::invalid("momentum grid needs radial and direction nodes"));
        }
        if radial.nodes.iter().any(|&r| r <= T::zero()) {
            return Err(Error::invalid("radial nodes must be strictly positive"));
        }
        Ok(Self { radial, directions })
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_radial(&self) -> usize {
        self.radial.len()
    }

    pub fn n_directions(&self) -> usize {
        self.directions.len()
    }

    #[inline]
    pub fn index(&self, radial: usize, direction: usize) -> usize {
        radial * self.n_directions() + direction
    }

    #[inline]
    pub fn radius(&self, index: usize) -> T {
        self.radial.nodes[index / self.n_directions()]
    }

    #[inline]
    pub fn node(&self, index: usize) -> MomentumVector<T> {
        let nd = self.n_directions();
        self.directions.nodes[index % nd] * self.radial.nodes[index / nd]
    }

    /// Quadrature weight of node `index` for `∫ · dp`.
    #[inline]
    pub fn weight(&self, index: usize) -> T {
        let nd = self.n_directions();
        self.radial.weights[index / nd] * self.directions.weights[index % nd]
    }
}

/// `w(r) = r e^r`
#[inline]
pub fn weight_function<T: Real>(r: T) -> T {
    r * r.exp()
}

/// Initial-data families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitFamily<T: Real> {
    /// `f₀ = ε e^{-|p|} / (1 + |p|)`
    CanonicalSmall { epsilon: T },
    /// `f₀ = ε e^{-|p|} (1 + β (p̂·axis)²) / ((1 + β)(1 + |p|))`
    Anisotropic {
        epsilon: T,
        beta: T,
        axis: MomentumVector<T>,
    },
    /// `f = e^{-|p|/T}`
    PureEquilibrium { temperature: T },
}

impl<T: Real> InitFamily<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T, name: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            InitFamily::CanonicalSmall { epsilon } => pos(epsilon, "epsilon"),
            InitFamily::Anisotropic { epsilon, beta, axis } => {
                pos(epsilon, "epsilon")?;
                if !(beta >= T::zero() && beta.is_finite()) {
                    return Err(Error::invalid(format!("beta must be >= 0, got {beta}")));
                }
                if axis.normalized().is_none() {
                    return Err(Error::invalid("anisotropy axis must be non-zero"));
                }
                Ok(())
            }
            InitFamily::PureEquilibrium { temperature } => pos(temperature, "temperature"),
        }
    }

    /// Weighted value `g = w f` at radius `r` in unit direction `dir`.
    pub fn weighted_value(&self, r: T, dir: &MomentumVector<T>) -> T {
        let one = T::one();
        match *self {
            InitFamily::CanonicalSmall { epsilon } => epsilon * r / (one + r),
            InitFamily::Anisotropic { epsilon, beta, axis } => {
                let axis = axis.normalized().unwrap_or(axis);
                let c = dir.dot(&axis);
                epsilon * r * (one + beta * c * c) / ((one + beta) * (one + r))
            }
            InitFamily::PureEquilibrium { temperature } => r * (r * (one - temperature.recip())).exp(),
        }
    }

    /// Analytic `f(p)`.
    pub fn value(&self, p: &MomentumVector<T>) -> T {
        let r = p.norm();
        match *self {
            InitFamily::PureEquilibrium { temperature } => (-r / temperature).exp(),
            _ => {
                let one = T::one();
                let (eps, aniso) = match *self {
                    InitFamily::CanonicalSmall { epsilon } => (epsilon, one),
                    InitFamily::Anisotropic { epsilon, beta, axis } => {
                        let axis = axis.normalized().unwrap_or(axis);
                        let c = if r > T::zero() { p.dot(&axis) / r } else { T::zero() };
                        (epsilon, (one + beta * c * c) / (one + beta))
                    }
                    InitFamily::PureEquilibrium { .. } => unreachable!(),
                };
                eps * (-r).exp() * aniso / (one + r)
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        match *self {
            InitFamily::Anisotropic { beta, .. } => beta == T::zero(),
            _ => true,
        }
    }
}

impl<T: Real> FromStr for InitFamily<T> {
    type Err = Error;

    /// `canonical_small(0.01)`, `anisotropic(0.01, 1, 0 0 1)`, `pure_equilibrium(1)`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            _ => return Err(Error::invalid(format!("malformed initial data `{s}`"))),
        };
        let nums: Vec<T> = args
            .split([',', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<T>().map_err(|_| Error::invalid(format!("bad number `{t}` in `{s}`"))))
            .collect::<Result<_>>()?;
        let fam = match (name.trim(), nums.as_slice()) {
            ("canonical_small", [e]) => InitFamily::CanonicalSmall { epsilon: *e },
            ("anisotropic", [e, b, x, y, z]) => InitFamily::Anisotropic {
                epsilon: *e,
                beta: *b,
                axis: MomentumVector::new(*x, *y, *z),
            },
            ("pure_equilibrium", [t]) => InitFamily::PureEquilibrium { temperature: *t },
            _ => return Err(Error::invalid(format!("unknown initial data `{s}`"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

/// Weighted values on a grid plus the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionState<T: Real> {
    pub grid: Arc<MomentumGrid<T>>,
    pub g: Vec<T>,
    pub time: T,
}

impl<T: Real> DistributionState<T> {
    pub fn new(grid: Arc<MomentumGrid<T>>, g: Vec<T>, time: T) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::invalid(format!(
                "state has {} values for a grid of {} nodes",
                g.len(),
                grid.len()
            )));
        }
        if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state value {bad}")));
        }
        Ok(Self { grid, g, time })
    }

    pub fn zeros(grid: Arc<MomentumGrid<T>>) -> Self {
        let n = grid.len();
        Self {
            grid,
            g: vec![T::zero(); n],
            time: T::zero(),
        }
    }

    pub fn from_fn<F: Fn(&MomentumVector<T>) -> T>(grid: Arc<MomentumGrid<T>>, f: F) -> Self {
        let g = (0..grid.len())
            .map(|i| weight_function(grid.radius(i)) * f(&grid.node(i)))
            .collect();
        Self {
            grid,
            g,
            time: T::zero(),
        }
    }

    /// `init_family`
    pub fn init(grid: Arc<MomentumGrid<T>>, family: &InitFamily<T>) -> Result<Self> {
        family.validate()?;
        let nd = grid.n_directions();
        let g = (0..grid.len())
            .map(|i| family.weighted_value(grid.radial.nodes[i / nd], &grid.directions.nodes[i % nd]))
            .collect();
        Ok(Self {
            grid,
            g,
            time: T::zero(),
        })
    }

    /// Unweighted nodal value `f = g / w`.
    #[inline]
    pub fn f_at(&self, index: usize) -> T {
        self.g[index] / weight_function(self.grid.radius(index))
    }

    pub fn interpolant(&self) -> Interpolant<'_, T> {
        Interpolant::new(self)
    }

    /// `f(p)` by interpolation; zero beyond `r_max`.
    pub fn evaluate(&self, p: &MomentumVector<T>) -> T {
        self.interpolant().evaluate(p)
    }

    /// `‖f‖_{L¹_r} = ∫ |f| |p|^r dp` on the grid.
    pub fn norm_l1r(&self, r: T) -> Result<T> {
        if !(r > T::lit(-3.0)) {
            return Err(Error::invalid(format!("L1_r norm needs r > -3, got {r}")));
        }
        Ok(self.weighted_sum(|i| self.f_at(i).abs() * self.grid.radius(i).powf(r)))
    }

    /// `‖f‖_{L^∞_w} = max |g|`.
    pub fn norm_linf_w(&self) -> T {
        self.g.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Particle number `N = ‖f‖_{L¹}` and energy moment `E = ‖f‖_{L¹_1}`.
    pub fn moments(&self) -> (T, T) {
        let n = self.weighted_sum(|i| self.f_at(i).abs());
        let e = self.weighted_sum(|i| self.f_at(i).abs() * self.grid.radius(i));
        (n, e)
    }

    /// `Σ_p W_p h(p)` in node order.
    pub fn weighted_sum<F: Fn(usize) -> T>(&self, h: F) -> T {
        let mut acc = CompensatedSum::new();
        for i in 0..self.g.len() {
            acc.add(self.grid.weight(i) * h(i));
        }
        acc.value()
    }

    /// True when every radial shell holds one value in all directions.
    pub fn is_isotropic(&self) -> bool {
        let nd = self.grid.n_directions();
        self.g.chunks(nd).all(|shell| shell.iter().all(|&v| v == shell[0]))
    }

    /// Maximum over shells of the direction variance of `g`, relative to the
    /// squared shell mean.
    pub fn max_direction_variance(&self) -> T {
        let nd = self.grid.n_directions();
        let dirs = &self.grid.directions;
        let four_pi = T::lit(4.0) * T::PI();
        let mut worst = T::zero();
        for shell in self.g.chunks(nd) {
            let mean = shell.iter().zip(&dirs.weights).map(|(&v, &w)| v * w).sum::<T>() / four_pi;
            if mean == T::zero() {
                continue;
            }
            let var = shell
                .iter()
                .zip(&dirs.weights)
                .map(|(&v, &w)| w * (v - mean) * (v - mean))
                .sum::<T>()
                / four_pi;
            worst = worst.max(var / (mean * mean));
        }
        worst
    }

    /// `f ∘ O⁻¹` for a rotation `O` that maps the direction nodes onto
    /// themselves.
    pub fn rotated(&self, rotation: &Rotation<T>) -> Result<Self> {
        let perm = direction_permutation(&self.grid.directions.nodes, rotation)?;
        let nd = self.grid.n_directions();
        let mut g = vec![T::zero(); self.g.len()];
        for (i, shell) in self.g.chunks(nd).enumerate() {
            for (j, &v) in shell.iter().enumerate() {
                g[i * nd + perm[j]] = v;
            }
        }
        Ok(Self {
            grid: self.grid.clone(),
            g,
            time: self.time,
        })
    }

    /// `‖f − other‖_{L¹_r}` on the shared grid.
    pub fn distance_l1r(&self, other: &Self, r: T) -> Result<T> {
        if self.grid.len() != other.grid.len() {
            return Err(Error::invalid("states live on different grids"));
        }
        if !(r > T::lit(-3.0)) {
            return Err(Error::invalid(format!("L1_r norm needs r > -3, got {r}")));
        }
        Ok(self.weighted_sum(|i| (self.f_at(i) - other.f_at(i)).abs() * self.grid.radius(i).powf(r)))
    }
}

/// Index map `j ↦ j'` with `O nⱼ = n_{j'}`; fails unless `O` permutes the
/// nodes.
pub fn direction_permutation<T: Real>(nodes: &[MomentumVector<T>], rotation: &Rotation<T>) -> Result<Vec<usize>> {
    let tol = T::lit(1e-20).max(T::epsilon() * T::lit(64.0));
    nodes
        .iter()
        .map(|n| {
            let image = rotation.apply(n);
            nodes
                .iter()
                .position(|m| m.dist_sq(&image) <= tol)
                .ok_or_else(|| Error::invalid("rotation does not map the direction grid onto itself"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{RadialMapping, SphereRuleKind};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    pub(crate) fn grid(n: usize, kind: SphereRuleKind, degree: usize) -> Arc<MomentumGrid<f64>> {
        Arc::new(
            MomentumGrid::new(
                RadialRule::build(n, 20.0, RadialMapping::Stretched).unwrap(),
                SphereRule::build(kind, degree).unwrap(),
            )
            .unwrap(),
        )
    }

    fn exp_state(g: Arc<MomentumGrid<f64>>) -> DistributionState<f64> {
        DistributionState::from_fn(g, |p| (-p.norm()).exp())
    }

    #[test]
    fn quarter_turn_permutes_grids() {
        let q = Rotation::quarter_turn_z();
        for (kind, degree) in [(SphereRuleKind::Lebedev, 7), (SphereRuleKind::Product, 9)] {
            let g = grid(8, kind, degree);
            let s = DistributionState::init(
                g.clone(),
                &InitFamily::Anisotropic {
                    epsilon: 0.01,
                    beta: 1.0,
                    axis: MomentumVector::new(1.0, 0.0, 0.0),
                },
            )
            .unwrap();
            let r = s.rotated(&q).unwrap();
            let expected = DistributionState::init(
                g,
                &InitFamily::Anisotropic {
                    epsilon: 0.01,
                    beta: 1.0,
                    axis: MomentumVector::new(0.0, 1.0, 0.0),
                },
            )
            .unwrap();
            for (a, b) in r.g.iter().zip(&expected.g) {
                assert_relative_eq!(*a, *b, max_relative = 1e-12);
            }
        }
        let tilt = Rotation::about_axis(MomentumVector::new(1.0, 1.0, 0.0), 0.3);
        assert!(DistributionState::zeros(grid(4, SphereRuleKind::Lebedev, 7)).rotated(&tilt).is_err());
    }

    #[test]
    fn gamma_integral_norms() {
        let s = exp_state(grid(32, SphereRuleKind::Lebedev, 7));
        assert_relative_eq!(s.norm_l1r(0.0).unwrap(), 8.0 * PI, max_relative = 1e-6);
        assert_relative_eq!(s.norm_l1r(-2.0).unwrap(), 4.0 * PI, max_relative = 1e-6);
        // ∫₀^{20} s³ e^{-s} ds = 6 − e^{-20}(20³ + 3·20² + 6·20 + 6)
        let truncated = 6.0 - (-20.0f64).exp() * (8000.0 + 1200.0 + 120.0 + 6.0);
        assert_relative_eq!(s.norm_l1r(1.0).unwrap(), 4.0 * PI * truncated, max_relative = 1e-6);
        assert!(s.norm_l1r(-3.0).is_err());
        let (n, e) = s.moments();
        assert_relative_eq!(n, 8.0 * PI, max_relative = 1e-6);
        assert_relative_eq!(e, 4.0 * PI * truncated, max_relative = 1e-6);
    }

    #[test]
    fn zero_state_norms() {
        let s = DistributionState::zeros(grid(8, SphereRuleKind::Lebedev, 3));
        assert_eq!(s.norm_linf_w(), 0.0);
        assert_eq!(s.moments(), (0.0, 0.0));
        assert_eq!(s.norm_l1r(-2.0).unwrap(), 0.0);
    }

    #[test]
    fn canonical_family_bounds() {
        let g = grid(32, SphereRuleKind::Lebedev, 7);
        let s = DistributionState::init(g.clone(), &InitFamily::CanonicalSmall { epsilon: 0.01 }).unwrap();
        let rmax = *g.radial.nodes.last().unwrap();
        assert!(s.norm_linf_w() < 0.01);
        assert_relative_eq!(s.norm_linf_w(), 0.01 * rmax / (1.0 + rmax), max_relative = 1e-15);
        // ∫₀^∞ e^{-s}/(1+s) ds = e E₁(1) = 0.596347362323194...
        assert_relative_eq!(
            s.norm_l1r(-2.0).unwrap(),
            0.01 * 4.0 * PI * 0.596_347_362_323_194_1,
            max_relative = 1e-6
        );
        // ∫₀^∞ s² e^{-s}/(1+s) ds = 1 − e E₁(1) ... = 0.403652637676805...
        // ∫₀^∞ s² e^{-s}/(1+s) ds = ∫₀^∞ (s − 1 + 1/(1+s)) e^{-s} ds, the same value
        let (n, _) = s.moments();
        assert_relative_eq!(n, 0.01 * 4.0 * PI * 0.596_347_362_323_194_1, max_relative = 1e-6);
    }

    #[test]
    fn equilibrium_linf_of_faster_decay() {
        // f = ε e^{-2r}: sup of ε r e^{-r} is ε/e at r = 1
        let g = grid(64, SphereRuleKind::Lebedev, 3);
        let s = DistributionState::from_fn(g, |p| 0.02 * (-2.0 * p.norm()).exp());
        assert_relative_eq!(s.norm_linf_w(), 0.02 / std::f64::consts::E, max_relative = 1e-2);
        assert!(s.norm_linf_w() <= 0.02 / std::f64::consts::E);
    }

    #[test]
    fn anisotropic_with_zero_beta_is_canonical() {
        let g = grid(12, SphereRuleKind::Lebedev, 7);
        let a = DistributionState::init(
            g.clone(),
            &InitFamily::Anisotropic {
                epsilon: 0.01,
                beta: 0.0,
                axis: MomentumVector::new(0.0, 0.0, 1.0),
            },
        )
        .unwrap();
        let c = DistributionState::init(g, &InitFamily::CanonicalSmall { epsilon: 0.01 }).unwrap();
        assert_eq!(a.g, c.g);
    }

    #[test]
    fn family_validation_and_parsing() {
        assert!(InitFamily::CanonicalSmall { epsilon: -1.0 }.validate().is_err());
        assert!(InitFamily::PureEquilibrium { temperature: 0.0 }.validate().is_err());
        let f: InitFamily<f64> = "anisotropic(0.01, 1, 0 0 1)".parse().unwrap();
        assert!(matches!(f, InitFamily::Anisotropic { beta, .. } if beta == 1.0));
        assert!("anisotropic(0.01, -1, 0 0 1)".parse::<InitFamily<f64>>().is_err());
        assert!("gaussian(1)".parse::<InitFamily<f64>>().is_err());
    }

    #[test]
    fn norm_is_linear_and_monotone() {
        let g = grid(16, SphereRuleKind::Lebedev, 5);
        let a = DistributionState::init(g.clone(), &InitFamily::CanonicalSmall { epsilon: 0.01 }).unwrap();
        let mut b = a.clone();
        b.g.iter_mut().for_each(|v| *v *= 3.0);
        assert_relative_eq!(b.norm_l1r(-1.0).unwrap(), 3.0 * a.norm_l1r(-1.0).unwrap(), max_relative = 1e-14);
        let mut c = a.clone();
        c.g[5] *= 2.0;
        assert!(c.norm_l1r(0.5).unwrap() > a.norm_l1r(0.5).unwrap());
    }

    #[test]
    fn isotropic_norms_do_not_depend_on_direction_rule() {
        let fam = InitFamily::CanonicalSmall { epsilon: 0.01 };
        let a = DistributionState::init(grid(24, SphereRuleKind::Lebedev, 7), &fam).unwrap();
        let b = DistributionState::init(grid(24, SphereRuleKind::Product, 11), &fam).unwrap();
        for r in [-2.0, -1.0, 0.0, 1.0] {
            assert_relative_eq!(a.norm_l1r(r).unwrap(), b.norm_l1r(r).unwrap(), max_relative = 1e-10);
        }
        assert!(a.is_isotropic());
        assert!(a.max_direction_variance() < 1e-28);
    }
}
