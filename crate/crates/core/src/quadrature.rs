//! Quadrature rules for the radial half-line (measure `r² dr`) and the unit
//! sphere.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kinematics::MomentumVector;
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Computed in `f64` by Newton iteration on the three-term recurrence and
/// converted to `T`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre_f64(n);
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut z = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule with `n` nodes mapped onto `[a, b]`.
pub fn gauss_legendre_interval<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| wi * half).collect(),
    )
}

/// Coordinate map from the Gauss variable `t ∈ [0, 1]` to the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadialMapping {
    /// `r = r_max t`
    Linear,
    /// `r = (1 + r_max)^t − 1`, geometric clustering towards the origin
    Log,
    /// `r = r_max t²`
    #[default]
    Stretched,
}

impl RadialMapping {
    fn map<T: Real>(self, t: T, r_max: T) -> (T, T) {
        match self {
            RadialMapping::Linear => (r_max * t, r_max),
            RadialMapping::Log => {
                let l = r_max.ln_1p();
                let e = (l * t).exp();
                ((l * t).exp_m1(), l * e)
            }
            RadialMapping::Stretched => (r_max * t * t, T::lit(2.0) * r_max * t),
        }
    }
}

impl FromStr for RadialMapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(RadialMapping::Linear),
            "log" => Ok(RadialMapping::Log),
            "stretched" => Ok(RadialMapping::Stretched),
            other => Err(Error::invalid(format!(
                "unknown radial mapping `{other}` (expected linear | log | stretched)"
            ))),
        }
    }
}

impl fmt::Display for RadialMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadialMapping::Linear => "linear",
            RadialMapping::Log => "log",
            RadialMapping::Stretched => "stretched",
        })
    }
}

/// Rule for `∫₀^{r_max} g(r) r² dr`; the `r²` factor lives in the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub r_max: T,
    pub mapping: RadialMapping,
}

impl<T: Real> RadialRule<T> {
    pub fn build(n: usize, r_max: T, mapping: RadialMapping) -> Result<Self> {
        if n < 4 {
            return Err(Error::invalid(format!("radial rule needs n >= 4 nodes, got {n}")));
        }
        if !(r_max > T::zero() && r_max.is_finite()) {
            return Err(Error::invalid(format!("r_max must be > 0, got {r_max}")));
        }
        let (x, w) = gauss_legendre::<T>(n);
        let half = T::lit(0.5);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&xi, &wi) in x.iter().zip(&w) {
            let t = half * (xi + T::one());
            let (r, jac) = mapping.map(t, r_max);
            nodes.push(r);
            weights.push(half * wi * jac * r * r);
        }
        Ok(Self {
            nodes,
            weights,
            r_max,
            mapping,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ g(rᵢ) ≈ ∫₀^{r_max} g(r) r² dr`
    pub fn integrate<F: Fn(T) -> T>(&self, g: F) -> T {
        crate::summation::compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * g(r)))
    }
}

/// Family a [`SphereRule`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereRuleKind {
    /// Gauss in `cos θ` × uniform azimuth.
    Product,
    /// Octahedrally symmetric Lebedev–Laikov rule.
    Lebedev,
}

impl FromStr for SphereRuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "product" => Ok(Self::Product),
            "lebedev" => Ok(Self::Lebedev),
            other => Err(Error::invalid(format!(
                "unknown sphere rule `{other}` (expected product | lebedev)"
            ))),
        }
    }
}

impl fmt::Display for SphereRuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Product => "product",
            Self::Lebedev => "lebedev",
        })
    }
}

/// Positive-weight rule on the unit sphere, weights summing to `4π`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule<T: Real> {
    pub nodes: Vec<MomentumVector<T>>,
    pub weights: Vec<T>,
    pub degree: usize,
    pub kind: SphereRuleKind,
}

/// Largest degree accepted by [`SphereRule::product`].
pub const MAX_PRODUCT_DEGREE: usize = 511;

impl<T: Real> SphereRule<T> {
    pub fn build(kind: SphereRuleKind, degree: usize) -> Result<Self> {
        match kind {
            SphereRuleKind::Product => Self::product(degree),
            SphereRuleKind::Lebedev => Self::lebedev(degree),
        }
    }

    /// Product rule exact for spherical harmonics up to `degree`:
    /// `⌈(d+1)/2⌉` Gauss nodes in `cos θ` times `d+1` azimuths rounded up to
    /// a multiple of four (so quarter turns about z permute the nodes).
    pub fn product(degree: usize) -> Result<Self> {
        if !(3..=MAX_PRODUCT_DEGREE).contains(&degree) {
            return Err(Error::UnsupportedDegree {
                degree,
                reason: "product rules support 3..=511",
            });
        }
        let polar = (degree + 2) / 2;
        let azimuth = azimuth_count(degree);
        let (x, w) = gauss_legendre::<T>(polar);
        let two_pi = T::TAU();
        let daz = two_pi / T::from_usize_lossy(azimuth);
        let mut nodes = Vec::with_capacity(polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        for (&c, &wc) in x.iter().zip(&w) {
            let s = (T::one() - c * c).max(T::zero()).sqrt();
            for j in 0..azimuth {
                let phi = daz * (T::from_usize_lossy(j) + T::lit(0.5));
                let (sp, cp) = phi.sin_cos();
                nodes.push(MomentumVector::new(s * cp, s * sp, c));
                weights.push(wc * daz);
            }
        }
        Ok(Self {
            nodes,
            weights,
            degree,
            kind: SphereRuleKind::Product,
        })
    }

    /// Lebedev–Laikov rules with 6, 14, 26, 38 and 50 nodes (degrees 3–11).
    pub fn lebedev(degree: usize) -> Result<Self> {
        let mut b = LebedevBuilder::default();
        match degree {
            3 => b.a1(1.0 / 6.0),
            5 => {
                b.a1(1.0 / 15.0);
                b.a3(3.0 / 40.0);
            }
            7 => {
                b.a1(1.0 / 21.0);
                b.a2(4.0 / 105.0);
                b.a3(9.0 / 280.0);
            }
            9 => {
                b.a1(1.0 / 105.0);
                b.a3(9.0 / 280.0);
                b.c1(0.459_700_843_380_983_1, 0.888_073_833_977_115_3, 1.0 / 35.0);
            }
            11 => {
                b.a1(4.0 / 315.0);
                b.a2(64.0 / 2835.0);
                b.a3(27.0 / 1280.0);
                let l = 1.0 / 11f64.sqrt();
                b.bk(l, 3.0 * l, 14641.0 / 725_760.0);
            }
            _ => {
                return Err(Error::UnsupportedDegree {
                    degree,
                    reason: "Lebedev rules are available for degrees 3, 5, 7, 9, 11",
                })
            }
        }
        let four_pi = 4.0 * std::f64::consts::PI;
        Ok(Self {
            nodes: b.nodes.iter().map(|&v| MomentumVector::from_f64(v)).collect(),
            weights: b.weights.iter().map(|&w| T::lit(w * four_pi)).collect(),
            degree,
            kind: SphereRuleKind::Lebedev,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&MomentumVector<T>) -> T>(&self, f: F) -> T {
        crate::summation::compensated_sum(self.nodes.iter().zip(&self.weights).map(|(n, &w)| w * f(n)))
    }
}

/// `build_sphere_rule`: the product construction for the requested degree.
pub fn build_sphere_rule<T: Real>(degree: usize) -> Result<SphereRule<T>> {
    SphereRule::product(degree)
}

/// Azimuth count for a declared degree: `d + 1` rounded up to a multiple of 4.
pub fn azimuth_count(degree: usize) -> usize {
    (degree + 1).div_ceil(4) * 4
}

#[derive(Default)]
struct LebedevBuilder {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl LebedevBuilder {
    fn push_signed(&mut self, base: [f64; 3], w: f64) {
        let mut seen: Vec<[f64; 3]> = Vec::new();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    let v = [base[0] * sx, base[1] * sy, base[2] * sz];
                    if !seen.contains(&v) {
                        seen.push(v);
                    }
                }
            }
        }
        for v in seen {
            if !self.nodes.contains(&v) {
                self.nodes.push(v);
                self.weights.push(w);
            }
        }
    }

    fn permuted(&mut self, a: f64, b: f64, c: f64, w: f64) {
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.push_signed(p, w);
        }
    }

    fn a1(&mut self, w: f64) {
        self.permuted(1.0, 0.0, 0.0, w);
    }

    fn a2(&mut self, w: f64) {
        let s = 0.5f64.sqrt();
        self.permuted(0.0, s, s, w);
    }

    fn a3(&mut self, w: f64) {
        let s = (1.0f64 / 3.0).sqrt();
        self.permuted(s, s, s, w);
    }

    fn bk(&mut self, l: f64, m: f64, w: f64) {
        self.permuted(l, l, m, w);
    }

    fn c1(&mut self, p: f64, q: f64, w: f64) {
        self.permuted(p, q, 0.0, w);
    }
}

/// Node of a [`PairPolarRule`] for the polar variable `c = n̂·ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPolarNode<T: Real> {
    /// `1 + c`
    pub one_plus: T,
    /// `1 − c`
    pub one_minus: T,
    /// `|p'| = (ν + |n| c) / 2`
    pub energy_p: T,
    /// `|q'| = (ν − |n| c) / 2`
    pub energy_q: T,
    /// Weight for `∫_{-1}^{1} dc`.
    pub weight: T,
}

/// Polar rule for `∫_{-1}^{1} h(c) dc` adapted to a collision pair with
/// energy `ν`, total momentum `|n|` and relative momentum `ϱ`.
///
/// The interval is split at `c = 0`. On the lower half `|p'| = xν/2` with
/// `x ∈ [a, 1]`, `a = ϱ²/(ν(ν + |n|))`, and Gauss–Legendre is applied in
/// `ln x`; the upper half mirrors this with `|q'|`. Integrands behaving like
/// powers of `1/|p'|` or `1/|q'|` near the collinear cone become smooth in
/// the log variable. Each half's weights are rescaled to integrate constants
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPolarRule<T: Real> {
    x: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> PairPolarRule<T> {
    /// `per_half` Gauss nodes on each half interval.
    pub fn new(per_half: usize) -> Result<Self> {
        if per_half == 0 {
            return Err(Error::invalid("pair polar rule needs at least one node per half"));
        }
        let (x, w) = gauss_legendre_interval::<T>(per_half, T::zero(), T::one());
        Ok(Self { x, w })
    }

    /// Rule with `⌈(d + 1)/2⌉` nodes per half.
    pub fn for_degree(degree: usize) -> Result<Self> {
        Self::new((degree + 1).div_ceil(2))
    }

    pub fn per_half(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        2 * self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Fills `out` with the nodes for one pair, lower half first.
    pub fn nodes(&self, nu: T, n_norm: T, rho: T, out: &mut Vec<PairPolarNode<T>>) {
        out.clear();
        let half = T::lit(0.5);
        let one = T::one();
        let two = T::lit(2.0);
        let m = self.x.len();
        if !(n_norm > T::lit(1e-12) * nu) {
            // |n| ≈ 0: energies do not depend on c
            for side in [-one, one] {
                for k in 0..m {
                    let c = side * self.x[k];
                    out.push(PairPolarNode {
                        one_plus: one + c,
                        one_minus: one - c,
                        energy_p: half * (nu + n_norm * c),
                        energy_q: half * (nu - n_norm * c),
                        weight: self.w[k],
                    });
                }
            }
            return;
        }
        // ν a = ν − |n| without cancellation
        let nu_a = rho * rho / (nu + n_norm);
        let ln_a = (nu_a / nu).ln();
        let span = -ln_a;
        let scale = nu_a / n_norm;
        let start = out.len();
        let mut total = T::zero();
        for k in 0..m {
            let u = span * self.x[k];
            let em1 = u.exp_m1();
            // 1 + c on the lower half; lower energy = (ν a / 2) eᵘ
            let near = scale * em1;
            let low = half * nu_a * u.exp();
            let weight = scale * u.exp() * span * self.w[k];
            total += weight;
            out.push(PairPolarNode {
                one_plus: near,
                one_minus: two - near,
                energy_p: low,
                energy_q: nu - low,
                weight,
            });
        }
        let norm = total.recip();
        for node in out[start..].iter_mut() {
            node.weight *= norm;
        }
        for k in 0..m {
            let lower = out[start + k];
            out.push(PairPolarNode {
                one_plus: lower.one_minus,
                one_minus: lower.one_plus,
                energy_p: lower.energy_q,
                energy_q: lower.energy_p,
                weight: lower.weight,
            });
        }
    }
}

/// Uniform azimuth nodes `φⱼ = (j + ½) 2π/A` as `(cos, sin)`, weight `2π/A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthRule<T: Real> {
    pub cos_sin: Vec<(T, T)>,
    pub weight: T,
}

impl<T: Real> AzimuthRule<T> {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("azimuth rule needs at least one node"));
        }
        let step = 2.0 * std::f64::consts::PI / count as f64;
        let cos_sin = (0..count)
            .map(|j| {
                let phi = (j as f64 + 0.5) * step;
                (T::lit(phi.cos()), T::lit(phi.sin()))
            })
            .collect();
        Ok(Self {
            cos_sin,
            weight: T::lit(step),
        })
    }

    pub fn len(&self) -> usize {
        self.cos_sin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos_sin.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// ∫_{S²} x^a y^b z^c dΩ via Gamma functions (Lanczos-free: half-integer
    /// factorials in closed form).
    fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        // Γ((k+1)/2) for even k = (k-1)!! √π / 2^{k/2}
        fn half_gamma_even(k: u32) -> f64 {
            let mut v = PI.sqrt();
            let mut j = 1;
            while j < k {
                v *= j as f64 / 2.0;
                j += 2;
            }
            v
        }
        // Γ(m/2) for integer m >= 3
        fn gamma_half(m: u32) -> f64 {
            if m.is_multiple_of(2) {
                (1..m / 2).map(|i| i as f64).product()
            } else {
                half_gamma_even(m - 1)
            }
        }
        2.0 * half_gamma_even(a) * half_gamma_even(b) * half_gamma_even(c) / gamma_half(a + b + c + 3)
    }

    fn max_monomial_error(rule: &SphereRule<f64>, degree: u32) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                for c in 0..=(degree - a - b) {
                    let got = rule.integrate(|n| n.0[0].powi(a as i32) * n.0[1].powi(b as i32) * n.0[2].powi(c as i32));
                    worst = worst.max((got - monomial_integral(a, b, c)).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn gauss_legendre_matches_known_nodes() {
        let (x, w) = gauss_legendre::<f64>(3);
        assert_relative_eq!(x[2], (0.6f64).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(w[1], 8.0 / 9.0, max_relative = 1e-15);
        assert_eq!(x[1], 0.0);
        let (_, w) = gauss_legendre::<f64>(64);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        for n in [1usize, 2, 5, 12, 33] {
            let (x, w) = gauss_legendre::<f64>(n);
            for k in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn radial_rule_polynomial_and_gamma_integrals() {
        for n in [4usize, 8] {
            let r = RadialRule::<f64>::build(n, 3.0, RadialMapping::Linear).unwrap();
            assert_relative_eq!(r.integrate(|_| 1.0), 9.0, max_relative = 1e-14);
        }
        let r = RadialRule::<f64>::build(32, 20.0, RadialMapping::Stretched).unwrap();
        // ∫₀²⁰ e^{-r} r² dr = 2 − e^{-20}(400 + 40 + 2)
        let exact = 2.0 - (-20.0f64).exp() * 442.0;
        assert_relative_eq!(r.integrate(|x| (-x).exp()), exact, max_relative = 1e-8);
        assert!((exact - 2.0).abs() < 1e-6);
        // ∫₀²⁰ e^{-r} r dr = 1 − 21 e^{-20}
        let exact = 1.0 - 21.0 * (-20.0f64).exp();
        assert_relative_eq!(r.integrate(|x| (-x).exp() / x), exact, max_relative = 1e-6);
    }

    #[test]
    fn radial_rule_invariants_and_errors() {
        for m in [RadialMapping::Linear, RadialMapping::Log, RadialMapping::Stretched] {
            let r = RadialRule::<f64>::build(16, 20.0, m).unwrap();
            assert!(r.nodes[0] > 0.0);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(*r.nodes.last().unwrap() <= 20.0);
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
        assert!(RadialRule::<f64>::build(3, 20.0, RadialMapping::Linear).is_err());
        assert!(RadialRule::<f64>::build(8, -1.0, RadialMapping::Linear).is_err());
        assert!("cubic".parse::<RadialMapping>().is_err());
        assert_eq!("log".parse::<RadialMapping>().unwrap(), RadialMapping::Log);
    }

    #[test]
    fn radial_rule_converges_under_doubling() {
        let exact = 2.0 - (-20.0f64).exp() * 442.0;
        let err = |n| {
            let r = RadialRule::<f64>::build(n, 20.0, RadialMapping::Stretched).unwrap();
            (r.integrate(|x| (-x).exp()) - exact).abs()
        };
        let (e4, e8, e16) = (err(4), err(8), err(16));
        assert!(e8 * 4.0 <= e4, "{e4} {e8}");
        assert!(e16 * 4.0 <= e8, "{e8} {e16}");
    }

    #[test]
    fn product_rule_exactness() {
        for d in [3usize, 4, 7, 11, 17] {
            let rule = SphereRule::<f64>::product(d).unwrap();
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 4.0 * PI, max_relative = 1e-12);
            assert!(rule.nodes.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
            assert!(max_monomial_error(&rule, d as u32) < 1e-12, "degree {d}");
        }
        let r3 = build_sphere_rule::<f64>(3).unwrap();
        assert_relative_eq!(r3.integrate(|n| n.0[2] * n.0[2]), 4.0 * PI / 3.0, epsilon = 1e-12);
        assert!(SphereRule::<f64>::product(2).is_err());
    }

    #[test]
    fn lebedev_rule_exactness() {
        for (d, count) in [(3usize, 6usize), (5, 14), (7, 26), (9, 38), (11, 50)] {
            let rule = SphereRule::<f64>::lebedev(d).unwrap();
            assert_eq!(rule.len(), count);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 4.0 * PI, max_relative = 1e-12);
            assert!(rule.nodes.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
            assert!(max_monomial_error(&rule, d as u32) < 1e-12, "degree {d}");
        }
        assert!(SphereRule::<f64>::lebedev(13).is_err());
    }

    #[test]
    fn rule_is_orientation_independent_within_degree() {
        // ∫ (ω·u)^k dω = 4π/(k+1) for even k, independent of u
        let rule = SphereRule::<f64>::product(11).unwrap();
        let leb = SphereRule::<f64>::lebedev(7).unwrap();
        for u in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.36, 0.48, 0.8], [1.0, 0.0, 0.0]] {
            let u = MomentumVector::from_f64(u);
            for k in [2, 4] {
                let exact = 4.0 * PI / (k as f64 + 1.0);
                assert!((rule.integrate(|n| n.dot(&u).powi(k)) - exact).abs() < 1e-10);
                assert!((leb.integrate(|n| n.dot(&u).powi(k)) - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pair_polar_rule_integrates_inverse_square_energy() {
        // p = (1,0,0), q = (0,1,0): ν = 2, |n| = ϱ = √2, ∫dω/|p'|² = 16π/ϱ² = 8π
        let rule = PairPolarRule::<f64>::for_degree(17).unwrap();
        let mut nodes = Vec::new();
        let s2 = 2f64.sqrt();
        rule.nodes(2.0, s2, s2, &mut nodes);
        assert_eq!(nodes.len(), rule.len());
        let total: f64 = nodes.iter().map(|n| 2.0 * PI * n.weight / (n.energy_p * n.energy_p)).sum();
        assert_relative_eq!(total, 8.0 * PI, max_relative = 1e-6);
        let measure: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_relative_eq!(measure, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn pair_polar_nodes_are_consistent() {
        let rule = PairPolarRule::<f64>::new(6).unwrap();
        let mut nodes = Vec::new();
        for (nu, n, rho) in [(3.0, 2.0, 5f64.sqrt()), (1.0, 0.999, (1.0f64 - 0.998001).sqrt()), (2.0, 0.0, 2.0)] {
            rule.nodes(nu, n, rho, &mut nodes);
            for node in &nodes {
                assert_relative_eq!(node.one_plus + node.one_minus, 2.0, max_relative = 1e-14);
                assert_relative_eq!(node.energy_p + node.energy_q, nu, max_relative = 1e-14);
                assert!(node.energy_p > 0.0 && node.energy_q > 0.0 && node.weight > 0.0);
            }
            let measure: f64 = nodes.iter().map(|n| n.weight).sum();
            assert_relative_eq!(measure, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn azimuth_rule_integrates_trigonometric_polynomials() {
        let rule = AzimuthRule::<f64>::new(12).unwrap();
        let int = |k: i32| -> f64 {
            rule.cos_sin
                .iter()
                .map(|&(c, s)| rule.weight * (k as f64 * f64::atan2(s, c)).cos())
                .sum()
        };
        assert_relative_eq!(int(0), 2.0 * PI, max_relative = 1e-14);
        for k in 1..12 {
            assert!(int(k).abs() < 1e-12, "k = {k}");
        }
        assert!(AzimuthRule::<f64>::new(0).is_err());
        assert_eq!(azimuth_count(7), 8);
        assert_eq!(azimuth_count(17), 20);
    }
}
