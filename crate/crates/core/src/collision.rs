//! Cutoff collision operators `Q_k` for soft and hard kernels.
//!
//! For an output node `p` the `q` integral is taken in a frame whose pole is
//! `p̂`: Gauss–Legendre in `|q|`, Gauss–Legendre in `τ` with
//! `1 − cos∠(p, q) = 2τ^κ`, uniform azimuth. In these variables
//! `ϱ = 2 √(|p||q|) τ^{κ/2}` is evaluated without cancellation and the
//! kernel's `ϱ^{2∓·}` factor becomes a smooth power of `τ`. The sharp cutoff
//! is integrated exactly by restricting the `τ` interval and splitting the
//! `|q|` interval where the restriction starts.
//!
//! The `ω` integral uses a frame with pole `n̂ = (p + q)/|p + q|` and the
//! [`PairPolarRule`] in `n̂·ω`. The loss term uses `∫ dω = 4π` directly.
//!
//! Isotropic states take a reduced path: one output radius per shell and a
//! single azimuth in both frames. [`EvalMode::General`] disables this.

use std::fmt;

use rayon::prelude::*;

use crate::cosmology::CosmologyParams;
use crate::error::{Error, Result};
use crate::kinematics::{CollisionPair, Frame, MomentumVector};
use crate::quadrature::{azimuth_count, gauss_legendre_interval, AzimuthRule, PairPolarNode, PairPolarRule};
use crate::scalar::Real;
use crate::state::{DirectionWeights, DistributionState, Interpolant, RadialStencil};
use crate::summation::CompensatedSum;

/// Scattering kernel family with its exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily<T: Real> {
    /// `σ = h^{-b}`, `0 < b < 1`
    Soft { b: T },
    /// `σ = h^{a}`, `0 ≤ a < 2`
    Hard { a: T },
}

/// Kernel family plus cutoff `k` (`+∞` allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T: Real> {
    pub family: KernelFamily<T>,
    pub cutoff: T,
}

impl<T: Real> KernelSpec<T> {
    pub fn soft(b: T, cutoff: T) -> Result<Self> {
        let k = Self {
            family: KernelFamily::Soft { b },
            cutoff,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn hard(a: T, cutoff: T) -> Result<Self> {
        let k = Self {
            family: KernelFamily::Hard { a },
            cutoff,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            KernelFamily::Soft { b } if !(b > T::zero() && b < T::one()) => {
                return Err(Error::invalid(format!(
                    "soft kernel exponent b = {b} outside the admissible range (0, 1)"
                )))
            }
            KernelFamily::Hard { a } if !(a >= T::zero() && a < T::lit(2.0)) => {
                return Err(Error::invalid(format!(
                    "hard kernel exponent a = {a} outside the admissible range [0, 2)"
                )))
            }
            _ => {}
        }
        if !(self.cutoff > T::zero()) {
            return Err(Error::invalid(format!("cutoff k must be > 0, got {}", self.cutoff)));
        }
        Ok(())
    }

    pub fn with_cutoff(&self, cutoff: T) -> Result<Self> {
        let k = Self { cutoff, ..*self };
        k.validate()?;
        Ok(k)
    }

    pub fn is_soft(&self) -> bool {
        matches!(self.family, KernelFamily::Soft { .. })
    }

    /// `b` or `a`.
    pub fn exponent(&self) -> T {
        match self.family {
            KernelFamily::Soft { b } => b,
            KernelFamily::Hard { a } => a,
        }
    }

    /// Power of `R` in the prefactor: `−3 + b` or `−3 − a`.
    pub fn prefactor_exponent(&self) -> T {
        match self.family {
            KernelFamily::Soft { b } => T::lit(-3.0) + b,
            KernelFamily::Hard { a } => T::lit(-3.0) - a,
        }
    }

    /// Power of `ϱ` in the kernel: `2 − b` or `2 + a`.
    pub fn rho_exponent(&self) -> T {
        match self.family {
            KernelFamily::Soft { b } => T::lit(2.0) - b,
            KernelFamily::Hard { a } => T::lit(2.0) + a,
        }
    }

    /// Cutoff indicator at `ϱ`.
    pub fn admits(&self, rho: T) -> bool {
        match self.family {
            KernelFamily::Soft { .. } => rho * self.cutoff >= T::one(),
            KernelFamily::Hard { .. } => rho <= self.cutoff,
        }
    }

    /// Rate the cutoff study compares against: `1 − b` or `2 − a`.
    pub fn reference_rate(&self) -> T {
        match self.family {
            KernelFamily::Soft { b } => T::one() - b,
            KernelFamily::Hard { a } => T::lit(2.0) - a,
        }
    }
}

impl<T: Real> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Soft { b } => write!(f, "soft(b={b}, k={})", self.cutoff),
            KernelFamily::Hard { a } => write!(f, "hard(a={a}, k={})", self.cutoff),
        }
    }
}

/// `𝟙 · ϱ^{2∓·} / (|p||q|)` for a pair.
pub fn kernel_weight<T: Real>(pair: &CollisionPair<T>, kernel: &KernelSpec<T>) -> Result<T> {
    let pq = pair.p.norm() * pair.q.norm();
    if !(pq > T::zero()) {
        return Err(Error::DegenerateConfiguration("zero-modulus momentum"));
    }
    if !kernel.admits(pair.rho) {
        return Ok(T::zero());
    }
    Ok(pair.rho.powf(kernel.rho_exponent()) / pq)
}

/// Whether the isotropic reduction may be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Reduced path whenever the state is exactly isotropic.
    #[default]
    Auto,
    General,
}

/// Node counts for the collision integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionRules<T: Real> {
    q_radial: usize,
    q_polar: (Vec<T>, Vec<T>),
    q_azimuth: AzimuthRule<T>,
    omega_polar: PairPolarRule<T>,
    omega_azimuth: AzimuthRule<T>,
    kappa: T,
    /// Gauss rules on `[0, 1]` indexed by size.
    radial_tables: Vec<(Vec<T>, Vec<T>)>,
}

/// Default polar clustering exponent `κ`.
pub const DEFAULT_KAPPA: f64 = 2.0;

impl<T: Real> CollisionRules<T> {
    /// `q_radial` nodes in `|q|`; `q_degree + 1` nodes in `τ`; the azimuth
    /// counts follow [`azimuth_count`]; `⌈(ω_degree + 1)/2⌉` nodes per half
    /// of the `ω` polar interval.
    pub fn new(q_radial: usize, q_degree: usize, omega_degree: usize) -> Result<Self> {
        Self::with_counts(
            q_radial,
            q_degree + 1,
            azimuth_count(q_degree),
            (omega_degree + 1).div_ceil(2),
            azimuth_count(omega_degree),
            T::lit(DEFAULT_KAPPA),
        )
    }

    pub fn with_counts(
        q_radial: usize,
        q_polar: usize,
        q_azimuth: usize,
        omega_per_half: usize,
        omega_azimuth: usize,
        kappa: T,
    ) -> Result<Self> {
        if q_radial < 4 {
            return Err(Error::invalid(format!("q radial rule needs >= 4 nodes, got {q_radial}")));
        }
        if q_polar == 0 {
            return Err(Error::invalid("q polar rule needs at least one node"));
        }
        if !(kappa >= T::one()) {
            return Err(Error::invalid(format!("polar clustering exponent must be >= 1, got {kappa}")));
        }
        let radial_tables = (0..=q_radial)
            .map(|n| {
                if n == 0 {
                    (Vec::new(), Vec::new())
                } else {
                    gauss_legendre_interval(n, T::zero(), T::one())
                }
            })
            .collect();
        Ok(Self {
            q_radial,
            q_polar: gauss_legendre_interval(q_polar, T::zero(), T::one()),
            q_azimuth: AzimuthRule::new(q_azimuth)?,
            omega_polar: PairPolarRule::new(omega_per_half)?,
            omega_azimuth: AzimuthRule::new(omega_azimuth)?,
            kappa,
            radial_tables,
        })
    }

    pub fn q_radial(&self) -> usize {
        self.q_radial
    }

    pub fn q_polar(&self) -> usize {
        self.q_polar.0.len()
    }

    pub fn q_azimuth(&self) -> usize {
        self.q_azimuth.len()
    }

    pub fn omega_polar(&self) -> &PairPolarRule<T> {
        &self.omega_polar
    }

    pub fn omega_azimuth(&self) -> usize {
        self.omega_azimuth.len()
    }

    /// `|q|` nodes and weights (including `|q|²`) for output radius `p`.
    fn radial_nodes(&self, p: T, kernel: &KernelSpec<T>, r_max: T, out: &mut Vec<(T, T)>) {
        out.clear();
        let k = kernel.cutoff;
        let quarter = T::lit(0.25);
        let n = self.q_radial;
        let push = |a: T, b: T, count: usize, out: &mut Vec<(T, T)>| {
            if count == 0 || !(b > a) {
                return;
            }
            let (t, w) = &self.radial_tables[count];
            let len = b - a;
            for (&ti, &wi) in t.iter().zip(w) {
                let q = a + len * ti * ti;
                out.push((q, T::lit(2.0) * len * ti * wi * q * q));
            }
        };
        match kernel.family {
            KernelFamily::Soft { .. } => {
                // ϱ ≥ 1/k needs |p||q| ≥ 1/(4k²)
                let lo = if k.is_finite() { quarter / (k * k * p) } else { T::zero() };
                push(lo, r_max, n, out);
            }
            KernelFamily::Hard { .. } => {
                // ϱ ≤ k for every angle while |p||q| ≤ k²/4
                let split = if k.is_finite() { quarter * k * k / p } else { T::infinity() };
                if split >= r_max {
                    push(T::zero(), r_max, n, out);
                } else {
                    let frac = (split / r_max).sqrt().to_f64_lossy();
                    let inner = ((frac * n as f64).round() as usize).clamp(4, n - 4).min(n);
                    push(T::zero(), split, inner, out);
                    push(split, r_max, n - inner, out);
                }
            }
        }
    }

    /// `τ` interval admitted by the cutoff for `|p||q| = pq`.
    fn tau_range(&self, pq: T, kernel: &KernelSpec<T>) -> Option<(T, T)> {
        let k = kernel.cutoff;
        let four = T::lit(4.0);
        let inv_kappa = self.kappa.recip();
        let (lo, hi) = match kernel.family {
            KernelFamily::Soft { .. } if k.is_finite() => ((four * k * k * pq).recip().powf(inv_kappa), T::one()),
            KernelFamily::Hard { .. } if k.is_finite() => {
                (T::zero(), (k * k / (four * pq)).powf(inv_kappa).min(T::one()))
            }
            _ => (T::zero(), T::one()),
        };
        (hi > lo).then_some((lo, hi))
    }
}

/// Geometry of one `q` node relative to the output momentum.
#[derive(Debug, Clone, Copy)]
struct QNode<T: Real> {
    q: T,
    /// `cos∠(p, q)` and `sin∠(p, q)`
    cos: T,
    sin: T,
    rho: T,
    nu: T,
    n_norm: T,
    /// Radial × polar weight times the kernel.
    weight: T,
}

fn q_nodes<T: Real>(
    p: T,
    rules: &CollisionRules<T>,
    kernel: &KernelSpec<T>,
    r_max: T,
    radial: &mut Vec<(T, T)>,
    out: &mut Vec<QNode<T>>,
) {
    out.clear();
    rules.radial_nodes(p, kernel, r_max, radial);
    let kappa = rules.kappa;
    let gamma = kernel.rho_exponent();
    let two = T::lit(2.0);
    for &(q, wq) in radial.iter() {
        let pq = p * q;
        let Some((lo, hi)) = rules.tau_range(pq, kernel) else {
            continue;
        };
        let len = hi - lo;
        let root = pq.sqrt();
        for (&x, &w) in rules.q_polar.0.iter().zip(&rules.q_polar.1) {
            let tau = lo + len * x;
            let ln_tau = tau.ln();
            let tk = (kappa * ln_tau).exp();
            let one_minus = two * tk;
            let one_plus = -two * (kappa * ln_tau).exp_m1();
            let rho = two * root * (T::lit(0.5) * kappa * ln_tau).exp();
            let nu = p + q;
            let n_norm = ((nu - rho) * (nu + rho)).max(T::zero()).sqrt();
            let dc = two * kappa * tk / tau;
            let kern = rho.powf(gamma) / pq;
            out.push(QNode {
                q,
                cos: one_plus - T::one(),
                sin: (one_minus * one_plus).sqrt(),
                rho,
                nu,
                n_norm,
                weight: wq * len * w * dc * kern,
            });
        }
    }
}

#[inline]
fn cos_from<T: Real>(node: &PairPolarNode<T>) -> T {
    if node.one_plus < node.one_minus {
        node.one_plus - T::one()
    } else {
        T::one() - node.one_minus
    }
}

/// Per-node `∫∫ K (f'f'_* − f f_*)` without the prefactor.
fn collision_integrals<T: Real>(
    state: &DistributionState<T>,
    kernel: &KernelSpec<T>,
    rules: &CollisionRules<T>,
    mode: EvalMode,
    with_gain: bool,
) -> Result<Vec<T>> {
    let interp = state.interpolant();
    let grid = &state.grid;
    let nd = grid.n_directions();
    let r_max = grid.radial.r_max;
    if state.g.iter().all(|&g| g == T::zero()) {
        return Ok(vec![T::zero(); grid.len()]);
    }
    let isotropic = mode == EvalMode::Auto && state.is_isotropic();
    let values: Vec<T> = if isotropic {
        let shells: Vec<T> = (0..grid.n_radial())
            .into_par_iter()
            .map(|i| isotropic_node(&interp, i * nd, kernel, rules, r_max, with_gain))
            .collect();
        shells.iter().flat_map(|&v| std::iter::repeat_n(v, nd)).collect()
    } else {
        (0..grid.len())
            .into_par_iter()
            .map(|i| general_node(&interp, i, kernel, rules, r_max, with_gain))
            .collect()
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("collision integral at node {i}")));
    }
    Ok(values)
}

fn isotropic_node<T: Real>(
    interp: &Interpolant<'_, T>,
    index: usize,
    kernel: &KernelSpec<T>,
    rules: &CollisionRules<T>,
    r_max: T,
    with_gain: bool,
) -> T {
    let state = interp.state();
    let p = state.grid.radius(index);
    let fp = state.f_at(index);
    let two_pi = T::lit(2.0) * T::PI();
    let four_pi = two_pi + two_pi;
    let mut radial = Vec::new();
    let mut qs = Vec::new();
    let mut polar = Vec::new();
    q_nodes(p, rules, kernel, r_max, &mut radial, &mut qs);
    let mut acc = CompensatedSum::new();
    let mut last_q = T::nan();
    let mut fq = T::zero();
    for node in &qs {
        if node.q != last_q {
            fq = interp.evaluate_radial(node.q);
            last_q = node.q;
        }
        let mut value = -four_pi * fp * fq;
        if with_gain {
            rules.omega_polar.nodes(node.nu, node.n_norm, node.rho, &mut polar);
            let mut gain = T::zero();
            for pn in &polar {
                let a = interp.evaluate_radial(pn.energy_p);
                if a == T::zero() {
                    continue;
                }
                gain += pn.weight * a * interp.evaluate_radial(pn.energy_q);
            }
            value += two_pi * gain;
        }
        acc.add(two_pi * node.weight * value);
    }
    acc.value()
}

#[inline]
fn evaluate_at<T: Real>(interp: &Interpolant<'_, T>, radius: T, v: &MomentumVector<T>) -> T {
    let radius = radius.max(T::min_positive_value());
    let stencil = interp.radial_stencil(radius);
    if let RadialStencil::Outside = stencil {
        return T::zero();
    }
    let norm = v.norm();
    let dirs = if norm > T::zero() {
        interp.direction_weights(&(*v * norm.recip()))
    } else {
        DirectionWeights::single(0)
    };
    let g = interp.value(&stencil, &dirs);
    if g == T::zero() {
        return T::zero();
    }
    g / crate::state::weight_function(radius)
}

fn general_node<T: Real>(
    interp: &Interpolant<'_, T>,
    index: usize,
    kernel: &KernelSpec<T>,
    rules: &CollisionRules<T>,
    r_max: T,
    with_gain: bool,
) -> T {
    let state = interp.state();
    let grid = &state.grid;
    let p_len = grid.radius(index);
    let p_hat = grid.directions.nodes[index % grid.n_directions()];
    let p = p_hat * p_len;
    let fp = state.f_at(index);
    let four_pi = T::lit(4.0) * T::PI();
    let half = T::lit(0.5);
    let q_frame = Frame::about(p_hat);
    let mut radial = Vec::new();
    let mut qs = Vec::new();
    let mut polar = Vec::new();
    q_nodes(p_len, rules, kernel, r_max, &mut radial, &mut qs);
    let wq_az = rules.q_azimuth.weight;
    let ww_az = rules.omega_azimuth.weight;
    let mut acc = CompensatedSum::new();
    for node in &qs {
        for &(ca, sa) in &rules.q_azimuth.cos_sin {
            let q_dir = q_frame.direction(node.cos, node.sin, ca, sa);
            let q = q_dir * node.q;
            let fq = evaluate_at(interp, node.q, &q_dir);
            let mut value = -four_pi * fp * fq;
            if with_gain {
                let n = p + q;
                let n_hat = if node.n_norm > T::zero() {
                    n * node.n_norm.recip()
                } else {
                    p_hat
                };
                let w_frame = Frame::about(n_hat);
                let pair = CollisionPair {
                    p,
                    q,
                    rho: node.rho,
                    nu: node.nu,
                    n,
                };
                rules.omega_polar.nodes(node.nu, node.n_norm, node.rho, &mut polar);
                let mut gain = T::zero();
                for pn in &polar {
                    let c = cos_from(pn);
                    let s = (pn.one_plus * pn.one_minus).max(T::zero()).sqrt();
                    let mut ring = T::zero();
                    for &(cw, sw) in &rules.omega_azimuth.cos_sin {
                        let omega = w_frame.direction(c, s, cw, sw);
                        let shift = omega * (half * pair.rho) + n * (half * node.n_norm * c / (pair.nu + pair.rho));
                        let p_post = n * half + shift;
                        let a = evaluate_at(interp, pn.energy_p, &p_post);
                        if a == T::zero() {
                            continue;
                        }
                        let q_post = n * half - shift;
                        ring += a * evaluate_at(interp, pn.energy_q, &q_post);
                    }
                    gain += pn.weight * ring;
                }
                value += ww_az * gain;
            }
            acc.add(wq_az * node.weight * value);
        }
    }
    acc.value()
}

/// `Q_k(f, f)` at every grid node (a time derivative of `f`).
pub fn apply_qk<T: Real>(
    state: &DistributionState<T>,
    kernel: &KernelSpec<T>,
    cosmology: &CosmologyParams<T>,
    t: T,
    rules: &CollisionRules<T>,
) -> Result<Vec<T>> {
    apply_qk_with(state, kernel, cosmology.prefactor(kernel, t)?, rules, EvalMode::Auto)
}

/// [`apply_qk`] with an explicit prefactor and evaluation mode.
pub fn apply_qk_with<T: Real>(
    state: &DistributionState<T>,
    kernel: &KernelSpec<T>,
    prefactor: T,
    rules: &CollisionRules<T>,
    mode: EvalMode,
) -> Result<Vec<T>> {
    kernel.validate()?;
    let mut out = collision_integrals(state, kernel, rules, mode, true)?;
    out.iter_mut().for_each(|v| *v *= prefactor);
    Ok(out)
}

/// `4π ∫ K f(q) dq` at every node: the loss term divided by `f(p)` and the
/// prefactor.
pub fn loss_frequencies<T: Real>(
    state: &DistributionState<T>,
    kernel: &KernelSpec<T>,
    rules: &CollisionRules<T>,
) -> Result<Vec<T>> {
    kernel.validate()?;
    let grid = &state.grid;
    let interp = state.interpolant();
    let r_max = grid.radial.r_max;
    let nd = grid.n_directions();
    let isotropic = state.is_isotropic();
    let four_pi = T::lit(4.0) * T::PI();
    let per_node = |index: usize| {
        let p_len = grid.radius(index);
        let mut radial = Vec::new();
        let mut qs = Vec::new();
        q_nodes(p_len, rules, kernel, r_max, &mut radial, &mut qs);
        let mut acc = CompensatedSum::new();
        if isotropic {
            for node in &qs {
                acc.add(T::lit(2.0) * T::PI() * node.weight * interp.evaluate_radial(node.q));
            }
        } else {
            let frame = Frame::about(grid.directions.nodes[index % nd]);
            for node in &qs {
                for &(ca, sa) in &rules.q_azimuth.cos_sin {
                    let dir = frame.direction(node.cos, node.sin, ca, sa);
                    acc.add(rules.q_azimuth.weight * node.weight * evaluate_at(&interp, node.q, &dir));
                }
            }
        }
        four_pi * acc.value()
    };
    let values: Vec<T> = if isotropic {
        let shells: Vec<T> = (0..grid.n_radial()).into_par_iter().map(|i| per_node(i * nd)).collect();
        shells.iter().flat_map(|&v| std::iter::repeat_n(v, nd)).collect()
    } else {
        (0..grid.len()).into_par_iter().map(per_node).collect()
    };
    Ok(values)
}

/// `max_p Q⁻(f)(p) / f(p)` including the prefactor at time `t`.
pub fn loss_rate_bound<T: Real>(
    state: &DistributionState<T>,
    kernel: &KernelSpec<T>,
    cosmology: &CosmologyParams<T>,
    t: T,
    rules: &CollisionRules<T>,
) -> Result<T> {
    let prefactor = cosmology.prefactor(kernel, t)?;
    let nu = loss_frequencies(state, kernel, rules)?;
    Ok(prefactor * nu.iter().fold(T::zero(), |m, &v| m.max(v)))
}
