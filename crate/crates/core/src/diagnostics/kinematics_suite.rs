//! Randomised checks of the collision kinematics against exact identities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ReportText;
use crate::error::{Error, Result};
use crate::kinematics::{
    angular_integral_inv_p, angular_integral_inv_p2, angular_integral_inv_pq, post_collision, post_collision_energies,
    rho, CollisionPair, Frame, MomentumVector,
};
use crate::quadrature::{azimuth_count, AzimuthRule, PairPolarRule};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsSuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Degree of the `ω` rule used against the closed forms.
    pub omega_degree: usize,
    /// Pairs with `ϱ/ν` below this are skipped by the angular check.
    pub min_rho_over_nu: f64,
    /// Pointwise checks skip samples with `ϱ/ν` or `min(|p'|, |q'|)/ν`
    /// below this: relative errors in `|p'|` grow like `ε ν/|p'|`.
    pub degeneracy: f64,
    pub monte_carlo_samples: usize,
}

impl KinematicsSuiteConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            omega_degree: 29,
            min_rho_over_nu: 0.05,
            degeneracy: 1e-3,
            monte_carlo_samples: 1_000_000,
        }
    }
}

/// Paired Monte Carlo comparison of the two sides of the measure identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloCheck {
    pub samples: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of the paired difference.
    pub std_error: f64,
}

impl MonteCarloCheck {
    /// `|lhs − rhs|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.std_error
    }
}

/// Maximum relative errors per check.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicsReport {
    pub config: KinematicsSuiteConfig,
    pub energy: f64,
    pub rho_invariance: f64,
    /// Relative to `|p'|`.
    pub scalar_vector: f64,
    /// Relative to `ν`.
    pub scalar_vector_nu: f64,
    /// `∫dω/|p'|`, `∫dω/|p'|²`, `∫dω/(|p'||q'|)`
    pub angular: [f64; 3],
    pub measure: MonteCarloCheck,
}

impl KinematicsReport {
    pub fn to_text(&self, header: &[String]) -> String {
        let c = &self.config;
        ReportText::new()
            .comments(header)
            .section("kinematics")
            .kv("seed", c.seed)
            .kv("trials", c.trials)
            .kv("omega_degree", c.omega_degree)
            .num("min_rho_over_nu", c.min_rho_over_nu)
            .num("degeneracy", c.degeneracy)
            .num("energy_max_rel_error", self.energy)
            .num("rho_invariance_max_rel_error", self.rho_invariance)
            .num("scalar_vector_max_rel_error", self.scalar_vector)
            .num("scalar_vector_max_error_over_nu", self.scalar_vector_nu)
            .num("angular_inv_p_max_rel_error", self.angular[0])
            .num("angular_inv_p2_max_rel_error", self.angular[1])
            .num("angular_inv_pq_max_rel_error", self.angular[2])
            .section("kinematics.measure_identity")
            .kv("samples", self.measure.samples)
            .num("lhs", self.measure.lhs)
            .num("rhs", self.measure.rhs)
            .num("std_error", self.measure.std_error)
            .num("z_score", self.measure.z_score())
            .finish()
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> MomentumVector<f64> {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    MomentumVector::new(s * phi.cos(), s * phi.sin(), z)
}

/// Momentum with log-uniform modulus in `[10⁻², 10²]`.
fn momentum(rng: &mut ChaCha8Rng) -> MomentumVector<f64> {
    let r = 10f64.powf(rng.gen_range(-2.0..2.0));
    unit_vector(rng) * r
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn cast<T: Real>(v: &MomentumVector<f64>) -> MomentumVector<T> {
    MomentumVector::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
}

fn back<T: Real>(v: &MomentumVector<T>) -> MomentumVector<f64> {
    MomentumVector::new(v[0].to_f64_lossy(), v[1].to_f64_lossy(), v[2].to_f64_lossy())
}

/// The three angular integrals by quadrature in the pair-adapted frame.
pub fn angular_quadrature<T: Real>(
    p: &MomentumVector<T>,
    q: &MomentumVector<T>,
    polar: &PairPolarRule<T>,
    azimuth: &AzimuthRule<T>,
) -> [T; 3] {
    let pair = CollisionPair::new(*p, *q);
    let n_norm = pair.n.norm();
    let frame = Frame::about(pair.n.normalized().unwrap_or(MomentumVector::new(T::zero(), T::zero(), T::one())));
    let mut nodes = Vec::new();
    polar.nodes(pair.nu, n_norm, pair.rho, &mut nodes);
    let mut acc = [T::zero(); 3];
    for node in &nodes {
        let c = if node.one_plus < node.one_minus {
            node.one_plus - T::one()
        } else {
            T::one() - node.one_minus
        };
        let s = (node.one_plus * node.one_minus).max(T::zero()).sqrt();
        for &(ca, sa) in &azimuth.cos_sin {
            let omega = frame.direction(c, s, ca, sa);
            let (ep, eq) = post_collision_energies(p, q, &omega);
            let w = node.weight * azimuth.weight;
            acc[0] += w / ep;
            acc[1] += w / (ep * ep);
            acc[2] += w / (ep * eq);
        }
    }
    acc
}

/// Randomised kinematic checks; deterministic in `config.seed`.
pub fn run_kinematics_suite<T: Real>(config: &KinematicsSuiteConfig) -> Result<KinematicsReport> {
    if config.trials == 0 {
        return Err(Error::invalid("kinematics suite needs trials >= 1"));
    }
    let mut report = KinematicsReport {
        config: *config,
        energy: 0.0,
        rho_invariance: 0.0,
        scalar_vector: 0.0,
        scalar_vector_nu: 0.0,
        angular: [0.0; 3],
        measure: MonteCarloCheck {
            samples: 0,
            lhs: 0.0,
            rhs: 0.0,
            std_error: 0.0,
        },
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut accepted = 0;
    while accepted < config.trials {
        let (p, q, omega) = (momentum(&mut rng), momentum(&mut rng), unit_vector(&mut rng));
        let (pt, qt) = (cast::<T>(&p), cast::<T>(&q));
        let omega_t = cast::<T>(&omega).normalized().unwrap_or(cast(&omega));
        let omega = back(&omega_t);
        let nu = p.norm() + q.norm();
        let (ep, eq) = post_collision_energies(&p, &q, &omega);
        if rho(&p, &q) < config.degeneracy * nu || ep.min(eq) < config.degeneracy * nu {
            continue;
        }
        accepted += 1;
        let (pp, qp) = post_collision(&pt, &qt, &omega_t)?;
        let (pp, qp) = (back(&pp), back(&qp));
        report.energy = report.energy.max(rel(pp.norm() + qp.norm(), nu));
        report.rho_invariance = report.rho_invariance.max(rel(rho(&pp, &qp), rho(&p, &q)));
        report.scalar_vector = report.scalar_vector.max(rel(pp.norm(), ep)).max(rel(qp.norm(), eq));
        let abs = (pp.norm() - ep).abs().max((qp.norm() - eq).abs());
        report.scalar_vector_nu = report.scalar_vector_nu.max(abs / nu);
    }

    let polar = PairPolarRule::<T>::for_degree(config.omega_degree)?;
    let azimuth = AzimuthRule::<T>::new(azimuth_count(config.omega_degree))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);
    let mut accepted = 0;
    while accepted < config.trials {
        let (p, q) = (momentum(&mut rng), momentum(&mut rng));
        let nu = p.norm() + q.norm();
        if rho(&p, &q) < config.min_rho_over_nu * nu {
            continue;
        }
        accepted += 1;
        let quad = angular_quadrature(&cast::<T>(&p), &cast::<T>(&q), &polar, &azimuth);
        let exact = [
            angular_integral_inv_p(&p, &q)?,
            angular_integral_inv_p2(&p, &q)?,
            angular_integral_inv_pq(&p, &q)?,
        ];
        for k in 0..3 {
            report.angular[k] = report.angular[k].max(rel(quad[k].to_f64_lossy(), exact[k]));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(3);
    report.measure = measure_identity(&mut rng, config.monte_carlo_samples);
    Ok(report)
}

/// `∫∫∫ φ(p', q') dω dp dq/(|p||q|)` against `4π ∫∫ φ(p, q) dp dq/(|p||q|)`
/// for `φ = e^{-|p|-|q|} h(p, q)`. Momenta are drawn from the density
/// `e^{-|p|}/(4π|p|)`, so both sides reduce to `(4π)³ E[h]` at pre- and
/// post-collision momenta respectively.
fn measure_identity(rng: &mut ChaCha8Rng, samples: usize) -> MonteCarloCheck {
    let h = |p: &MomentumVector<f64>, q: &MomentumVector<f64>| {
        let (np, nq) = (p.norm(), q.norm());
        let pz = if np > 0.0 { p[2] / np } else { 0.0 };
        np / (1.0 + np) * (1.0 + pz) / (1.0 + nq)
    };
    let draw = |rng: &mut ChaCha8Rng| {
        let r = -(rng.gen::<f64>().max(f64::MIN_POSITIVE) * rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln();
        unit_vector(rng) * r
    };
    let scale = (4.0 * std::f64::consts::PI).powi(3);
    let (mut sum_l, mut sum_r, mut sum_d, mut sum_d2) = (0.0, 0.0, 0.0, 0.0);
    let n = samples.max(2);
    for _ in 0..n {
        let (p, q, omega) = (draw(rng), draw(rng), unit_vector(rng));
        let (pp, qp) = post_collision(&p, &q, &omega).expect("unit omega");
        let (a, b) = (h(&p, &q), h(&pp, &qp));
        sum_l += a;
        sum_r += b;
        sum_d += a - b;
        sum_d2 += (a - b) * (a - b);
    }
    let nf = n as f64;
    let mean_d = sum_d / nf;
    let var = (sum_d2 / nf - mean_d * mean_d).max(0.0) * nf / (nf - 1.0);
    MonteCarloCheck {
        samples: n,
        lhs: scale * sum_l / nf,
        rhs: scale * sum_r / nf,
        std_error: scale * (var / nf).sqrt(),
    }
}
