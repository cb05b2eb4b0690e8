//! The collision operator against a brute-force quadrature in absolute
//! coordinates, for the isotropic data `f = ε e^{-|p|}/(1 + |p|)`.

use std::f64::consts::PI;

use flrw_boltzmann::collision::{apply_qk_with, CollisionRules, EvalMode, KernelSpec};
use flrw_boltzmann::config::GridConfig;
use flrw_boltzmann::state::{DistributionState, InitFamily};

const EPS: f64 = 0.01;

fn f(r: f64) -> f64 {
    EPS * (-r).exp() / (1.0 + r)
}

/// Gauss-Legendre on `[a, b]` by Newton iteration.
fn gauss(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w));
    }
    out
}

/// Piecewise Gauss rule in `|q|`, with a break where the cutoff starts to
/// restrict the angle (the integrand has a kink there).
fn radial_rule(p: f64, kernel: &KernelSpec<f64>) -> Vec<(f64, f64)> {
    let k = kernel.cutoff;
    let kink = if kernel.is_soft() { 1.0 / (4.0 * k * k * p) } else { k * k / (4.0 * p) };
    let mut breaks = vec![0.0, 0.5, 2.0, 8.0, 20.0, 45.0];
    if kink > 0.0 && kink < 45.0 {
        breaks.push(kink);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    breaks.windows(2).flat_map(|w| gauss(24, w[0], w[1])).collect()
}

/// `Q(p)` for `p = |p| ẑ`. The `q` azimuth is trivial by symmetry; `ω` uses
/// a product rule in absolute angles. Cutoffs restrict the `cos∠(p,q)`
/// interval exactly.
fn brute_force(p: f64, kernel: &KernelSpec<f64>) -> f64 {
    let (soft, expo, k) = match kernel.family {
        flrw_boltzmann::collision::KernelFamily::Soft { b } => (true, 2.0 - b, kernel.cutoff),
        flrw_boltzmann::collision::KernelFamily::Hard { a } => (false, 2.0 + a, kernel.cutoff),
    };
    let radial = radial_rule(p, kernel);
    let omega_c = gauss(40, -1.0, 1.0);
    let omega_az: Vec<(f64, f64)> = (0..40).map(|j| ((j as f64 + 0.5) * 2.0 * PI / 40.0).sin_cos()).collect();
    let w_az = 2.0 * PI / 40.0;
    let mut total = 0.0;
    for &(q, wq) in &radial {
        // admissible range of c = cos∠(p, q) from ϱ² = 2pq(1 − c)
        let (lo, hi) = if soft {
            (-1.0, (1.0 - 1.0 / (2.0 * k * k * p * q)).min(1.0))
        } else {
            ((1.0 - k * k / (2.0 * p * q)).max(-1.0), 1.0)
        };
        if hi <= lo {
            continue;
        }
        for (c, wc) in gauss(48, lo, hi) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            let rho = (2.0 * p * q * (1.0 - c)).sqrt();
            let kern = rho.powf(expo) / (p * q);
            let n = [q * s, 0.0, p + q * c];
            let nu = p + q;
            let mut gain = 0.0;
            for &(cw, ww) in &omega_c {
                let sw = (1.0 - cw * cw).sqrt();
                for &(sa, ca) in &omega_az {
                    let nw = n[0] * sw * ca + n[1] * sw * sa + n[2] * cw;
                    let (pp, qp) = (0.5 * (nu + nw), 0.5 * (nu - nw));
                    gain += ww * w_az * f(pp) * f(qp);
                }
            }
            let loss = 4.0 * PI * f(p) * f(q);
            total += 2.0 * PI * q * q * wq * wc * kern * (gain - loss);
        }
    }
    total
}

fn check(rules: &CollisionRules<f64>, kernels: &[KernelSpec<f64>], tol: f64) {
    let grid = GridConfig::<f64>::default().build_grid().unwrap();
    let state = DistributionState::init(grid.clone(), &InitFamily::CanonicalSmall { epsilon: EPS }).unwrap();
    let nd = grid.n_directions();
    let picks: Vec<usize> = [0.3, 1.5, 4.0]
        .iter()
        .map(|&target| {
            (0..grid.n_radial())
                .min_by(|&a, &b| {
                    let d = |i: usize| (grid.radius(i * nd) - target).abs();
                    d(a).partial_cmp(&d(b)).unwrap()
                })
                .unwrap()
        })
        .collect();
    for kernel in kernels {
        let q = apply_qk_with(&state, kernel, 1.0, rules, EvalMode::Auto).unwrap();
        for &i in &picks {
            let p = grid.radius(i * nd);
            let oracle = brute_force(p, kernel);
            // the loss term alone sets the scale
            let scale = brute_force_loss(p, kernel);
            let err = (q[i * nd] - oracle).abs();
            assert!(
                err <= tol * scale,
                "{kernel} at |p| = {p}: {} vs {oracle} (loss {scale})",
                q[i * nd]
            );
        }
    }
}

fn kernels() -> Vec<KernelSpec<f64>> {
    vec![
        KernelSpec::soft(0.5, 1000.0).unwrap(),
        KernelSpec::soft(0.5, 2.0).unwrap(),
        KernelSpec::hard(1.0, 1000.0).unwrap(),
        KernelSpec::hard(0.0, 2.0).unwrap(),
    ]
}

#[test]
fn operator_matches_brute_force_at_default_rules() {
    check(&GridConfig::<f64>::default().build_rules().unwrap(), &kernels(), 1e-4);
}

#[test]
fn operator_converges_to_brute_force_under_refinement() {
    // interpolation of the grid data, not the rules, sets this floor
    check(&CollisionRules::new(48, 31, 45).unwrap(), &kernels(), 1e-5);
}

fn brute_force_loss(p: f64, kernel: &KernelSpec<f64>) -> f64 {
    // 4π ∫ K f(p) f(q) dq with the same radial rule
    let radial = radial_rule(p, kernel);
    let expo = kernel.rho_exponent();
    let mut total = 0.0;
    for &(q, wq) in &radial {
        for (c, wc) in gauss(48, -1.0, 1.0) {
            let rho = (2.0 * p * q * (1.0 - c)).sqrt();
            if !kernel.admits(rho) {
                continue;
            }
            total += 2.0 * PI * q * q * wq * wc * rho.powf(expo) / (p * q) * 4.0 * PI * f(p) * f(q);
        }
    }
    total
}
