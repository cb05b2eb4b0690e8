//! Radiation-dominated FLRW background `R(t) = C (t + t₀)^{1/2}` and the
//! decaying collision prefactors `R^{-3+b}` (soft) and `R^{-3-a}` (hard).

use crate::collision::KernelSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scale-factor amplitude `C` and offset `t₀` (initial singularity at `t = −t₀`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosmologyParams<T: Real> {
    pub amplitude: T,
    pub t0: T,
}

impl<T: Real> Default for CosmologyParams<T> {
    fn default() -> Self {
        Self {
            amplitude: T::one(),
            t0: T::one(),
        }
    }
}

impl<T: Real> CosmologyParams<T> {
    pub fn new(amplitude: T, t0: T) -> Result<Self> {
        let p = Self { amplitude, t0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > T::zero() && self.amplitude.is_finite()) {
            return Err(Error::invalid(format!("cosmology.C must be > 0, got {}", self.amplitude)));
        }
        if !(self.t0 > T::zero() && self.t0.is_finite()) {
            return Err(Error::invalid(format!("cosmology.t0 must be > 0, got {}", self.t0)));
        }
        Ok(())
    }

    pub fn scale_factor(&self, t: T) -> Result<T> {
        check_time(t)?;
        Ok(self.amplitude * (t + self.t0).sqrt())
    }

    /// `R(t)^γ` with `γ = −3 + b` (soft) or `γ = −3 − a` (hard).
    pub fn prefactor(&self, kernel: &KernelSpec<T>, t: T) -> Result<T> {
        check_time(t)?;
        let gamma = kernel.prefactor_exponent();
        Ok(self.amplitude.powf(gamma) * (t + self.t0).powf(gamma * T::lit(0.5)))
    }

    /// `∫_{t1}^{t2} R(s)^γ ds` in closed form; `t2 = ∞` is allowed.
    pub fn prefactor_integral(&self, kernel: &KernelSpec<T>, t1: T, t2: T) -> Result<T> {
        check_time(t1)?;
        if t1 > t2 || t2.is_nan() {
            return Err(Error::invalid(format!("prefactor_integral needs t1 <= t2, got {t1} > {t2}")));
        }
        if t1 == t2 {
            return Ok(T::zero());
        }
        let (scale, beta) = self.antiderivative_params(kernel);
        let start = t1 + self.t0;
        if t2.is_infinite() {
            return Ok(scale * start.powf(beta));
        }
        // a^β − b^β = −a^β expm1(β ln(1 + (b − a)/a)), free of cancellation
        let ratio_log = ((t2 - t1) / start).ln_1p();
        Ok(scale * start.powf(beta) * -(beta * ratio_log).exp_m1())
    }

    /// Largest `dt` with `prefactor_integral(t, t + dt) <= budget`
    /// (infinite when the remaining integral never reaches the budget).
    pub fn time_for_budget(&self, kernel: &KernelSpec<T>, t: T, budget: T) -> Result<T> {
        check_time(t)?;
        if budget <= T::zero() {
            return Ok(T::zero());
        }
        let (scale, beta) = self.antiderivative_params(kernel);
        let start = (t + self.t0).powf(beta);
        let end = start - budget / scale;
        if end <= T::zero() {
            return Ok(T::infinity());
        }
        Ok((end.powf(beta.recip()) - (t + self.t0)).max(T::zero()))
    }

    /// `(C^γ / (−β), β)` with `β = γ/2 + 1 < 0`, so that
    /// `∫ R^γ = C^γ/(−β) · ((t1+t0)^β − (t2+t0)^β)`.
    fn antiderivative_params(&self, kernel: &KernelSpec<T>) -> (T, T) {
        let gamma = kernel.prefactor_exponent();
        let beta = gamma * T::lit(0.5) + T::one();
        (self.amplitude.powf(gamma) / (-beta), beta)
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be >= 0, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn soft(b: f64) -> KernelSpec<f64> {
        KernelSpec::soft(b, f64::INFINITY).unwrap()
    }

    fn hard(a: f64) -> KernelSpec<f64> {
        KernelSpec::hard(a, f64::INFINITY).unwrap()
    }

    #[test]
    fn scale_factor_values() {
        assert_eq!(CosmologyParams::new(1.0, 1.0).unwrap().scale_factor(0.0).unwrap(), 1.0);
        assert_eq!(CosmologyParams::new(2.0, 1.0).unwrap().scale_factor(3.0).unwrap(), 4.0);
        assert_eq!(CosmologyParams::new(1.0, 0.25).unwrap().scale_factor(0.0).unwrap(), 0.5);
        assert!(CosmologyParams::new(1.0, 1.0).unwrap().scale_factor(-1.0).is_err());
        assert!(CosmologyParams::new(0.0, 1.0).is_err());
        assert!(CosmologyParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn prefactor_values() {
        let c = CosmologyParams::default();
        assert_eq!(c.prefactor(&soft(0.5), 0.0).unwrap(), 1.0);
        assert_relative_eq!(c.prefactor(&hard(1.0), 3.0).unwrap(), 0.0625, max_relative = 1e-15);
        // 2^{-2.5}
        assert_relative_eq!(c.prefactor(&soft(0.5), 3.0).unwrap(), 0.176_776_695_296_636_9, max_relative = 1e-14);
        assert!(c.prefactor(&soft(0.5), -0.1).is_err());
    }

    #[test]
    fn prefactor_integral_values() {
        let c = CosmologyParams::default();
        assert_relative_eq!(c.prefactor_integral(&soft(0.5), 0.0, f64::INFINITY).unwrap(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(c.prefactor_integral(&hard(0.0), 0.0, f64::INFINITY).unwrap(), 2.0, max_relative = 1e-14);
        assert_eq!(c.prefactor_integral(&hard(1.5), 7.0, 7.0).unwrap(), 0.0);
        assert!(c.prefactor_integral(&soft(0.5), 2.0, 1.0).is_err());
    }

    #[test]
    fn prefactor_integral_matches_quadrature() {
        // composite Simpson on a fine mesh as an independent route
        let c = CosmologyParams::new(1.7, 0.4).unwrap();
        for k in [soft(0.3), soft(0.9), hard(0.0), hard(1.6)] {
            let (t1, t2) = (0.2, 5.0);
            let m = 20_000;
            let h = (t2 - t1) / m as f64;
            let mut s = 0.0;
            for i in 0..=m {
                let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * c.prefactor(&k, t1 + i as f64 * h).unwrap();
            }
            s *= h / 3.0;
            assert_relative_eq!(c.prefactor_integral(&k, t1, t2).unwrap(), s, max_relative = 1e-9);
        }
    }

    #[test]
    fn budget_inverts_integral() {
        let c = CosmologyParams::default();
        let k = soft(0.5);
        let dt = c.time_for_budget(&k, 2.0, 0.3).unwrap();
        assert_relative_eq!(c.prefactor_integral(&k, 2.0, 2.0 + dt).unwrap(), 0.3, max_relative = 1e-12);
        // only 4 units of budget exist from t = 0
        assert!(c.time_for_budget(&k, 0.0, 5.0).unwrap().is_infinite());
    }

    proptest! {
        #[test]
        fn integral_is_additive(t1 in 0.0..50.0f64, d1 in 0.0..50.0f64, d2 in 0.0..500.0f64, b in 0.05..0.95f64) {
            let c = CosmologyParams::default();
            let k = soft(b);
            let (t2, t3) = (t1 + d1, t1 + d1 + d2);
            let whole = c.prefactor_integral(&k, t1, t3).unwrap();
            let parts = c.prefactor_integral(&k, t1, t2).unwrap() + c.prefactor_integral(&k, t2, t3).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300));
        }

        #[test]
        fn prefactor_decreases(t in 0.0..1e4f64, dt in 1e-3..1e4f64, a in 0.0..1.99f64) {
            let c = CosmologyParams::default();
            let k = hard(a);
            prop_assert!(c.prefactor(&k, t + dt).unwrap() < c.prefactor(&k, t).unwrap());
        }
    }
}
