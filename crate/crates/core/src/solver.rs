//! Explicit time integration of `∂ₜf = Q_k(f, f)`.
//!
//! The state stores `g = w f`, so a stage advances `g` by `w · Q_k`. Step
//! sizes follow the loss-rate stability limit, which relaxes as the
//! prefactor decays.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::collision::{apply_qk_with, loss_frequencies, CollisionRules, EvalMode, KernelSpec};
use crate::cosmology::CosmologyParams;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{weight_function, DistributionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rk4" => Ok(Method::Rk4),
            "euler" => Ok(Method::Euler),
            other => Err(Error::invalid(format!("unknown method `{other}` (expected rk4 | euler)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T: Real> {
    pub method: Method,
    /// Fraction of the loss-rate stability limit, in `(0, 1]`.
    pub cfl: T,
    pub t_end: T,
    pub max_steps: usize,
    pub output_stride: usize,
    /// Abort once `‖f‖_{L^∞_w}` exceeds this multiple of its initial value.
    pub blowup_factor: T,
    /// Stop early once `∫_t^{t_end} prefactor × max loss frequency` drops
    /// below this.
    pub freeze_tolerance: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            cfl: T::lit(0.5),
            t_end: T::lit(1000.0),
            max_steps: 100_000,
            output_stride: 1,
            blowup_factor: T::lit(10.0),
            freeze_tolerance: T::lit(1e-10),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if self.max_steps == 0 || self.output_stride == 0 {
            return Err(Error::invalid("max_steps and output_stride must be >= 1"));
        }
        if !(self.blowup_factor > T::one()) {
            return Err(Error::invalid(format!(
                "blowup_factor must be > 1, got {}",
                self.blowup_factor
            )));
        }
        if !(self.freeze_tolerance >= T::zero()) {
            return Err(Error::invalid("freeze_tolerance must be >= 0"));
        }
        Ok(())
    }
}

/// Everything needed to advance a state.
#[derive(Debug, Clone)]
pub struct Problem<T: Real> {
    pub kernel: KernelSpec<T>,
    pub cosmology: CosmologyParams<T>,
    pub rules: CollisionRules<T>,
    pub integrator: IntegratorConfig<T>,
    pub mode: EvalMode,
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome<T: Real> {
    pub state: DistributionState<T>,
    /// `Σ W_p |min(f, 0)|` removed by clipping.
    pub clipped_mass: T,
}

impl<T: Real> Problem<T> {
    pub fn new(kernel: KernelSpec<T>, cosmology: CosmologyParams<T>, rules: CollisionRules<T>) -> Self {
        Self {
            kernel,
            cosmology,
            rules,
            integrator: IntegratorConfig::default(),
            mode: EvalMode::Auto,
        }
    }

    /// `dg/dt = w · Q_k(f, f)` at time `t`.
    pub fn rhs(&self, state: &DistributionState<T>, t: T) -> Result<Vec<T>> {
        let prefactor = self.cosmology.prefactor(&self.kernel, t)?;
        let mut q = apply_qk_with(state, &self.kernel, prefactor, &self.rules, self.mode)?;
        for (i, v) in q.iter_mut().enumerate() {
            *v *= weight_function(state.grid.radius(i));
        }
        Ok(q)
    }

    /// One explicit step of size `dt`; negative values are clipped to zero.
    pub fn step(&self, state: &DistributionState<T>, dt: T) -> Result<StepOutcome<T>> {
        if !(dt > T::zero()) {
            return Err(Error::invalid(format!("step size must be > 0, got {dt}")));
        }
        let t = state.time;
        let axpy = |base: &DistributionState<T>, k: &[T], h: T| {
            let mut s = base.clone();
            for (g, &d) in s.g.iter_mut().zip(k) {
                *g += h * d;
            }
            s
        };
        let mut next = match self.integrator.method {
            Method::Euler => axpy(state, &self.rhs(state, t)?, dt),
            Method::Rk4 => {
                let half = T::lit(0.5) * dt;
                let k1 = self.rhs(state, t)?;
                let k2 = self.rhs(&axpy(state, &k1, half), t + half)?;
                let k3 = self.rhs(&axpy(state, &k2, half), t + half)?;
                let k4 = self.rhs(&axpy(state, &k3, dt), t + dt)?;
                let sixth = dt / T::lit(6.0);
                let two = T::lit(2.0);
                let mut s = state.clone();
                for i in 0..s.g.len() {
                    s.g[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
                }
                s
            }
        };
        next.time = t + dt;
        if let Some(bad) = next.g.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state value {bad} at t = {}", next.time)));
        }
        let mut clipped = T::zero();
        for i in 0..next.g.len() {
            if next.g[i] < T::zero() {
                clipped += next.grid.weight(i) * (-next.g[i]) / weight_function(next.grid.radius(i));
                next.g[i] = T::zero();
            }
        }
        Ok(StepOutcome {
            state: next,
            clipped_mass: clipped,
        })
    }

    /// Largest loss frequency `max_p 4π ∫ K f(q) dq` (no prefactor).
    pub fn loss_scale(&self, state: &DistributionState<T>) -> Result<T> {
        let nu = loss_frequencies(state, &self.kernel, &self.rules)?;
        Ok(nu.iter().fold(T::zero(), |m, &v| m.max(v)))
    }

    /// Step size at the state's time; see [`Problem::choose_dt_with_scale`].
    pub fn choose_dt(&self, state: &DistributionState<T>) -> Result<T> {
        self.choose_dt_with_scale(state, self.loss_scale(state)?)
    }

    /// `cfl / loss rate`, capped so that the prefactor integral over the
    /// step stays below `cfl / ‖f‖_{L^∞_w}`, and clamped to `t_end`.
    pub fn choose_dt_with_scale(&self, state: &DistributionState<T>, loss_scale: T) -> Result<T> {
        let t = state.time;
        let cfg = &self.integrator;
        let remaining = cfg.t_end - t;
        if !(remaining > T::zero()) {
            return Ok(T::zero());
        }
        let mut dt = remaining;
        let rate = self.cosmology.prefactor(&self.kernel, t)? * loss_scale;
        if rate > T::zero() {
            dt = dt.min(cfg.cfl / rate);
        }
        let sup = state.norm_linf_w();
        if sup > T::zero() {
            let budget = self.cosmology.time_for_budget(&self.kernel, t, cfg.cfl / sup)?;
            dt = dt.min(budget);
        }
        Ok(dt)
    }
}

/// One emitted row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record<T: Real> {
    pub t: T,
    pub scale_factor: T,
    pub number: T,
    pub energy: T,
    pub l1_m1: T,
    /// `‖f‖_{L¹_{-2}}` for soft kernels, `‖f‖_{L¹_1}` for hard ones.
    pub l1_family: T,
    pub linf_w: T,
    /// Cumulative clipped mass.
    pub clipped_mass: T,
    /// Step that produced this row (zero for the initial row).
    pub dt: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T: Real> {
    pub soft: bool,
    pub records: Vec<Record<T>>,
}

impl<T: Real> TimeSeries<T> {
    pub fn header(&self) -> &'static str {
        if self.soft {
            "t,R,N,E,l1_m1,l1_m2,linf_w,clipped_mass,dt"
        } else {
            "t,R,N,E,l1_m1,l1_p1,linf_w,clipped_mass,dt"
        }
    }

    /// CSV with `# ` comment lines first; 17 significant digits.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str(self.header());
        out.push('\n');
        for r in &self.records {
            let cols = [
                r.t,
                r.scale_factor,
                r.number,
                r.energy,
                r.l1_m1,
                r.l1_family,
                r.linf_w,
                r.clipped_mass,
                r.dt,
            ];
            for (i, c) in cols.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Supremum of `‖f‖_{L^∞_w}` over the rows.
    pub fn sup_linf_w(&self) -> T {
        self.records.iter().fold(T::zero(), |m, r| m.max(r.linf_w))
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    Frozen,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct SimulationResult<T: Real> {
    pub series: TimeSeries<T>,
    pub final_state: DistributionState<T>,
    pub steps: usize,
    pub termination: Termination,
}

impl<T: Real> Problem<T> {
    pub fn record(&self, state: &DistributionState<T>, clipped: T, dt: T) -> Result<Record<T>> {
        let (number, energy) = state.moments();
        let family = if self.kernel.is_soft() { T::lit(-2.0) } else { T::one() };
        Ok(Record {
            t: state.time,
            scale_factor: self.cosmology.scale_factor(state.time)?,
            number,
            energy,
            l1_m1: state.norm_l1r(-T::one())?,
            l1_family: state.norm_l1r(family)?,
            linf_w: state.norm_linf_w(),
            clipped_mass: clipped,
            dt,
        })
    }

    /// Integrates from `initial` to `t_end`, `max_steps`, or freezing.
    pub fn simulate(&self, initial: DistributionState<T>) -> Result<SimulationResult<T>> {
        self.simulate_with(initial, |_| Ok(()))
    }

    /// [`Problem::simulate`], calling `observe` on the initial state and
    /// after every step.
    pub fn simulate_with<F>(&self, initial: DistributionState<T>, mut observe: F) -> Result<SimulationResult<T>>
    where
        F: FnMut(&DistributionState<T>) -> Result<()>,
    {
        self.kernel.validate()?;
        self.cosmology.validate()?;
        self.integrator.validate()?;
        let cfg = &self.integrator;
        let mut state = initial;
        let initial_sup = state.norm_linf_w();
        let limit = cfg.blowup_factor * initial_sup;
        let mut clipped = T::zero();
        let mut series = TimeSeries {
            soft: self.kernel.is_soft(),
            records: vec![self.record(&state, clipped, T::zero())?],
        };
        observe(&state)?;
        let mut steps = 0;
        let mut last_dt = T::zero();
        let mut emitted = true;
        let termination = loop {
            if state.time >= cfg.t_end {
                break Termination::Completed;
            }
            if steps >= cfg.max_steps {
                break Termination::MaxSteps;
            }
            let scale = self.loss_scale(&state)?;
            let ahead = self.cosmology.prefactor_integral(&self.kernel, state.time, cfg.t_end)?;
            if ahead * scale < cfg.freeze_tolerance {
                break Termination::Frozen;
            }
            let dt = self.choose_dt_with_scale(&state, scale)?;
            let mut outcome = self.step(&state, dt)?;
            if cfg.t_end - outcome.state.time <= T::lit(8.0) * T::epsilon() * cfg.t_end {
                outcome.state.time = cfg.t_end;
            }
            state = outcome.state;
            clipped += outcome.clipped_mass;
            steps += 1;
            last_dt = dt;
            observe(&state)?;
            let sup = state.norm_linf_w();
            if sup > limit {
                return Err(Error::BlowUp {
                    time: state.time.to_f64_lossy(),
                    norm: sup.to_f64_lossy(),
                    limit: limit.to_f64_lossy(),
                });
            }
            emitted = steps % cfg.output_stride == 0;
            if emitted {
                series.records.push(self.record(&state, clipped, dt)?);
            }
        };
        if !emitted {
            series.records.push(self.record(&state, clipped, last_dt)?);
        }
        Ok(SimulationResult {
            series,
            final_state: state,
            steps,
            termination,
        })
    }
}
