//! Rotational symmetry of the evolution, run through the general
//! (non-isotropic) operator path.

use super::ReportText;
use crate::collision::EvalMode;
use crate::config::RunConfig;
use crate::error::Result;
use crate::kinematics::{MomentumVector, Rotation};
use crate::scalar::Real;
use crate::state::{DistributionState, InitFamily};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport<T: Real> {
    /// Largest relative direction variance over all shells and steps.
    pub isotropy_variance: T,
    /// `‖evolve(rotate f₀) − rotate(evolve f₀)‖_{L¹} / N(0)`.
    pub equivariance_error: T,
    /// Anisotropic data with `β = 0` reproduces the canonical run bit for bit.
    pub beta_zero_identical: bool,
    pub steps: usize,
    pub final_time: T,
}

impl<T: Real> SymmetryReport<T> {
    pub fn to_text(&self, header: &[String]) -> String {
        ReportText::new()
            .comments(header)
            .section("symmetry")
            .kv("rotation", "quarter turn about z")
            .kv("steps", self.steps)
            .num("final_time", self.final_time.to_f64_lossy())
            .num("isotropy_max_direction_variance", self.isotropy_variance.to_f64_lossy())
            .num("equivariance_l1_over_n0", self.equivariance_error.to_f64_lossy())
            .kv("beta_zero_identical", self.beta_zero_identical)
            .finish()
    }
}

fn epsilon_of<T: Real>(init: &InitFamily<T>) -> T {
    match *init {
        InitFamily::CanonicalSmall { epsilon } | InitFamily::Anisotropic { epsilon, .. } => epsilon,
        InitFamily::PureEquilibrium { .. } => T::lit(0.01),
    }
}

/// Evolves canonical data, anisotropic data and its rotated copy with the
/// config's grid, kernel and integrator. Isotropic data are evolved in
/// [`EvalMode::General`] so the fast path cannot hide a defect.
pub fn run_symmetry_suite<T: Real>(config: &RunConfig<T>) -> Result<SymmetryReport<T>> {
    config.validate()?;
    let grid = config.grid.build_grid()?;
    let epsilon = epsilon_of(&config.init);
    let mut problem = config.problem()?;
    problem.mode = EvalMode::General;

    let canonical = InitFamily::CanonicalSmall { epsilon };
    let mut variance = T::zero();
    let iso = problem.simulate_with(DistributionState::init(grid.clone(), &canonical)?, |s| {
        variance = variance.max(s.max_direction_variance());
        Ok(())
    })?;

    let zero = T::zero();
    let x_axis = MomentumVector::new(T::one(), zero, zero);
    let aniso = InitFamily::Anisotropic {
        epsilon,
        beta: T::one(),
        axis: x_axis,
    };
    let f0 = DistributionState::init(grid.clone(), &aniso)?;
    let (n0, _) = f0.moments();
    let rotation = Rotation::quarter_turn_z();
    let evolved = problem.simulate(f0.clone())?.final_state.rotated(&rotation)?;
    let rotated_first = problem.simulate(f0.rotated(&rotation)?)?.final_state;
    let equivariance = evolved.distance_l1r(&rotated_first, T::zero())? / n0;

    let flat = InitFamily::Anisotropic {
        epsilon,
        beta: zero,
        axis: x_axis,
    };
    let mut auto = config.problem()?;
    auto.mode = EvalMode::Auto;
    let a = auto.simulate(DistributionState::init(grid.clone(), &flat)?)?;
    let b = auto.simulate(DistributionState::init(grid, &canonical)?)?;
    let identical = a.final_state.g.len() == b.final_state.g.len()
        && a.final_state
            .g
            .iter()
            .zip(&b.final_state.g)
            .all(|(x, y)| x.to_f64_lossy().to_bits() == y.to_f64_lossy().to_bits())
        && a.final_state.time == b.final_state.time;

    Ok(SymmetryReport {
        isotropy_variance: variance,
        equivariance_error: equivariance,
        beta_zero_identical: identical,
        steps: iso.steps,
        final_time: iso.final_state.time,
    })
}
