//! Cutoff-removal study: solutions at increasing cutoffs against the
//! tightest one.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::ReportText;
use crate::collision::{CollisionRules, KernelSpec};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::DistributionState;

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffStudyReport<T: Real> {
    /// Kernel of the base configuration; its cutoff is ignored.
    pub kernel: KernelSpec<T>,
    pub cutoffs: Vec<T>,
    /// `‖f_{k_i} − f_{k_j}‖` at the final time.
    pub pairwise_dist: Vec<Vec<T>>,
    /// Distance of each run to the tightest-cutoff reference.
    pub distances: Vec<T>,
    /// Distance between the reference and a rerun with refined collision
    /// rules, used as the discretisation floor.
    pub floor: T,
    /// Slope of `ln(d − floor)` against `ln k` over points above twice the
    /// floor; `NaN` if fewer than two qualify.
    pub fitted_rate: T,
    /// Number of points entering the fit.
    pub fitted_points: usize,
    /// `−(1 − b)` or `−(2 − a)`.
    pub reference_rate: T,
    /// Time reached by each run (earlier than `t_end` if it froze).
    pub final_times: Vec<T>,
}

impl<T: Real> CutoffStudyReport<T> {
    /// Distances (excluding the reference) strictly decrease with `k`.
    pub fn strictly_decreasing(&self) -> bool {
        let d = &self.distances[..self.distances.len() - 1];
        d.windows(2).all(|w| w[1] < w[0])
    }

    /// Distance matrix as CSV with a `k` header row.
    pub fn matrix_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push('k');
        for k in &self.cutoffs {
            let _ = write!(out, ",{:.16e}", k.to_f64_lossy());
        }
        out.push('\n');
        for (k, row) in self.cutoffs.iter().zip(&self.pairwise_dist) {
            let _ = write!(out, "{:.16e}", k.to_f64_lossy());
            for d in row {
                let _ = write!(out, ",{:.16e}", d.to_f64_lossy());
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self, header: &[String]) -> String {
        let mut dist = String::from("k,distance_to_reference,final_time\n");
        for ((k, d), t) in self.cutoffs.iter().zip(&self.distances).zip(&self.final_times) {
            let _ = writeln!(
                dist,
                "{:.16e},{:.16e},{:.16e}",
                k.to_f64_lossy(),
                d.to_f64_lossy(),
                t.to_f64_lossy()
            );
        }
        ReportText::new()
            .comments(header)
            .section("cutoff_study")
            .kv("kernel", self.kernel)
            .kv("norm", if self.kernel.is_soft() { "L1 + L1_-1" } else { "L1 + L1_1" })
            .kv("runs", self.cutoffs.len())
            .num("floor", self.floor.to_f64_lossy())
            .num("fitted_rate", self.fitted_rate.to_f64_lossy())
            .kv("fitted_points", self.fitted_points)
            .num("reference_rate", self.reference_rate.to_f64_lossy())
            .kv("strictly_decreasing", self.strictly_decreasing())
            .table("cutoff_study.distances", &dist)
            .table("cutoff_study.pairwise", &self.matrix_csv(&[]))
            .finish()
    }
}

fn study_distance<T: Real>(a: &DistributionState<T>, b: &DistributionState<T>, soft: bool) -> Result<T> {
    let r = if soft { -T::one() } else { T::one() };
    Ok(a.distance_l1r(b, T::zero())? + a.distance_l1r(b, r)?)
}

fn refined_rules<T: Real>(base: &RunConfig<T>) -> Result<CollisionRules<T>> {
    let g = &base.grid;
    CollisionRules::new(
        g.q_radial_nodes + g.q_radial_nodes.div_ceil(2),
        2 * g.q_degree + 1,
        2 * g.omega_degree + 1,
    )
}

/// Least-squares slope of `y` against `x`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Runs `base` at each cutoff (sorted ascending) plus a refined-rule rerun
/// of the tightest one, all concurrently.
pub fn run_cutoff_study<T: Real>(base: &RunConfig<T>, cutoffs: &[T]) -> Result<CutoffStudyReport<T>> {
    base.validate()?;
    if cutoffs.len() < 3 {
        return Err(Error::invalid("cutoff study needs at least 3 cutoffs"));
    }
    let mut ks = cutoffs.to_vec();
    if ks.iter().any(|k| !(*k > T::zero() && k.is_finite())) {
        return Err(Error::invalid("cutoffs must be finite and > 0"));
    }
    ks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let ratios: Vec<f64> = ks.windows(2).map(|w| (w[1] / w[0]).to_f64_lossy()).collect();
    if ratios.iter().any(|&q| (q - ratios[0]).abs() > 1e-6 * ratios[0]) {
        return Err(Error::invalid("cutoffs must be geometrically spaced"));
    }

    let initial = base.initial_state()?;
    let mut jobs: Vec<(T, Option<CollisionRules<T>>)> = ks.iter().map(|&k| (k, None)).collect();
    jobs.push((*ks.last().expect("non-empty"), Some(refined_rules(base)?)));
    let finals: Vec<DistributionState<T>> = jobs
        .par_iter()
        .map(|(k, rules)| {
            let mut cfg = base.clone();
            cfg.kernel = base.kernel.with_cutoff(*k)?;
            let mut problem = cfg.problem()?;
            if let Some(rules) = rules {
                problem.rules = rules.clone();
            }
            Ok(problem.simulate(initial.clone())?.final_state)
        })
        .collect::<Result<_>>()?;

    let soft = base.kernel.is_soft();
    let m = ks.len();
    let mut pairwise = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let d = study_distance(&finals[i], &finals[j], soft)?;
            pairwise[i][j] = d;
            pairwise[j][i] = d;
        }
    }
    let distances: Vec<T> = pairwise.iter().map(|row| row[m - 1]).collect();
    let floor = study_distance(&finals[m - 1], &finals[m], soft)?;

    let points: Vec<(f64, f64)> = ks[..m - 1]
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d > T::lit(2.0) * floor)
        .map(|(k, &d)| (k.to_f64_lossy().ln(), (d - floor).to_f64_lossy().ln()))
        .collect();
    let fitted_rate = if points.len() >= 2 { slope(&points) } else { f64::NAN };

    Ok(CutoffStudyReport {
        kernel: base.kernel,
        final_times: finals[..m].iter().map(|s| s.time).collect(),
        cutoffs: ks,
        pairwise_dist: pairwise,
        distances,
        floor,
        fitted_rate: T::lit(fitted_rate),
        fitted_points: points.len(),
        reference_rate: -base.kernel.reference_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [2.0f64, 4.0, 8.0, 16.0]
            .iter()
            .map(|k| (k.ln(), (3.0 * k.powf(-1.5)).ln()))
            .collect();
        assert!((slope(&pts) + 1.5).abs() < 1e-12);
    }
}
