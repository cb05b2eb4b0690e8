//! Run configuration and its `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! kernel.family = soft          # soft | hard
//! kernel.exponent = 0.5         # b for soft, a for hard
//! kernel.cutoff = 1000          # k, or inf
//! cosmology.C = 1
//! cosmology.t0 = 1
//! grid.radial_nodes = 64
//! grid.r_max = 30
//! grid.mapping = log            # linear | log | stretched
//! grid.direction_rule = lebedev # lebedev | product
//! grid.direction_degree = 7
//! grid.q_radial_nodes = 24
//! grid.q_degree = 11
//! grid.omega_degree = 17
//! integrator.method = rk4       # rk4 | euler
//! integrator.cfl = 0.5
//! integrator.t_end = 1000
//! integrator.max_steps = 100000
//! integrator.blowup_factor = 10
//! integrator.freeze_tolerance = 1e-10
//! init.family = canonical_small # canonical_small | anisotropic | pure_equilibrium
//! init.epsilon = 0.01
//! init.beta = 1                 # anisotropic only
//! init.axis = 0 0 1             # anisotropic only
//! init.temperature = 1          # pure_equilibrium only
//! output.directory = out
//! output.stride = 1
//! seed = 0
//! ```
//!
//! Only `kernel.family` and `kernel.exponent` are required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use crate::collision::{CollisionRules, EvalMode, KernelFamily, KernelSpec};
use crate::cosmology::CosmologyParams;
use crate::error::{Error, Result};
use crate::kinematics::MomentumVector;
use crate::quadrature::{RadialMapping, RadialRule, SphereRule, SphereRuleKind};
use crate::scalar::Real;
use crate::solver::{IntegratorConfig, Method, Problem};
use crate::state::{DistributionState, InitFamily, MomentumGrid};

/// State grid and collision rule sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig<T: Real> {
    pub radial_nodes: usize,
    pub r_max: T,
    pub mapping: RadialMapping,
    pub direction_rule: SphereRuleKind,
    pub direction_degree: usize,
    pub q_radial_nodes: usize,
    pub q_degree: usize,
    pub omega_degree: usize,
}

impl<T: Real> Default for GridConfig<T> {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            r_max: T::lit(30.0),
            mapping: RadialMapping::Log,
            direction_rule: SphereRuleKind::Lebedev,
            direction_degree: 7,
            q_radial_nodes: 24,
            q_degree: 11,
            omega_degree: 17,
        }
    }
}

impl<T: Real> GridConfig<T> {
    pub fn build_grid(&self) -> Result<Arc<MomentumGrid<T>>> {
        Ok(Arc::new(MomentumGrid::new(
            RadialRule::build(self.radial_nodes, self.r_max, self.mapping)?,
            SphereRule::build(self.direction_rule, self.direction_degree)?,
        )?))
    }

    pub fn build_rules(&self) -> Result<CollisionRules<T>> {
        CollisionRules::new(self.q_radial_nodes, self.q_degree, self.omega_degree)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T: Real> {
    pub cosmology: CosmologyParams<T>,
    pub kernel: KernelSpec<T>,
    pub grid: GridConfig<T>,
    pub integrator: IntegratorConfig<T>,
    pub init: InitFamily<T>,
    pub output: OutputConfig,
    pub seed: u64,
}

/// Cutoff used when `kernel.cutoff` is absent.
pub const DEFAULT_CUTOFF: f64 = 1000.0;

impl<T: Real> RunConfig<T> {
    /// Defaults around the given kernel.
    pub fn with_kernel(kernel: KernelSpec<T>) -> Self {
        Self {
            cosmology: CosmologyParams::default(),
            kernel,
            grid: GridConfig::default(),
            integrator: IntegratorConfig::default(),
            init: InitFamily::CanonicalSmall { epsilon: T::lit(0.01) },
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cosmology.validate()?;
        self.kernel.validate()?;
        self.integrator.validate()?;
        self.init.validate()?;
        if self.output.stride == 0 {
            return Err(Error::config("output.stride", "must be >= 1"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem<T>> {
        let mut problem = Problem::new(self.kernel, self.cosmology, self.grid.build_rules()?);
        problem.integrator = self.integrator.clone();
        problem.integrator.output_stride = self.output.stride;
        problem.mode = EvalMode::Auto;
        Ok(problem)
    }

    pub fn initial_state(&self) -> Result<DistributionState<T>> {
        DistributionState::init(self.grid.build_grid()?, &self.init)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn serialize(&self) -> String {
        self.entries()
            .into_iter()
            .fold(String::new(), |mut out, (k, v)| {
                let _ = writeln!(out, "{k} = {v}");
                out
            })
    }

    /// Resolved `(key, value)` pairs in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let (family, exponent) = match self.kernel.family {
            KernelFamily::Soft { b } => ("soft", b),
            KernelFamily::Hard { a } => ("hard", a),
        };
        let g = &self.grid;
        let i = &self.integrator;
        let mut e = vec![
            ("kernel.family", family.to_string()),
            ("kernel.exponent", num(exponent)),
            ("kernel.cutoff", num(self.kernel.cutoff)),
            ("cosmology.C", num(self.cosmology.amplitude)),
            ("cosmology.t0", num(self.cosmology.t0)),
            ("grid.radial_nodes", g.radial_nodes.to_string()),
            ("grid.r_max", num(g.r_max)),
            ("grid.mapping", g.mapping.to_string()),
            ("grid.direction_rule", g.direction_rule.to_string()),
            ("grid.direction_degree", g.direction_degree.to_string()),
            ("grid.q_radial_nodes", g.q_radial_nodes.to_string()),
            ("grid.q_degree", g.q_degree.to_string()),
            ("grid.omega_degree", g.omega_degree.to_string()),
            ("integrator.method", i.method.to_string()),
            ("integrator.cfl", num(i.cfl)),
            ("integrator.t_end", num(i.t_end)),
            ("integrator.max_steps", i.max_steps.to_string()),
            ("integrator.blowup_factor", num(i.blowup_factor)),
            ("integrator.freeze_tolerance", num(i.freeze_tolerance)),
        ];
        match self.init {
            InitFamily::CanonicalSmall { epsilon } => {
                e.push(("init.family", "canonical_small".into()));
                e.push(("init.epsilon", num(epsilon)));
            }
            InitFamily::Anisotropic { epsilon, beta, axis } => {
                e.push(("init.family", "anisotropic".into()));
                e.push(("init.epsilon", num(epsilon)));
                e.push(("init.beta", num(beta)));
                e.push(("init.axis", format!("{} {} {}", num(axis[0]), num(axis[1]), num(axis[2]))));
            }
            InitFamily::PureEquilibrium { temperature } => {
                e.push(("init.family", "pure_equilibrium".into()));
                e.push(("init.temperature", num(temperature)));
            }
        }
        e.push(("output.directory", self.output.directory.display().to_string()));
        e.push(("output.stride", self.output.stride.to_string()));
        e.push(("seed", self.seed.to_string()));
        e
    }
}

fn num<T: Real>(x: T) -> String {
    if x.is_infinite() && x > T::zero() {
        "inf".to_string()
    } else {
        // Display of f32/f64 is the shortest string that parses back exactly
        format!("{x}")
    }
}

const KEYS: &[&str] = &[
    "kernel.family",
    "kernel.exponent",
    "kernel.cutoff",
    "cosmology.C",
    "cosmology.t0",
    "grid.radial_nodes",
    "grid.r_max",
    "grid.mapping",
    "grid.direction_rule",
    "grid.direction_degree",
    "grid.q_radial_nodes",
    "grid.q_degree",
    "grid.omega_degree",
    "integrator.method",
    "integrator.cfl",
    "integrator.t_end",
    "integrator.max_steps",
    "integrator.blowup_factor",
    "integrator.freeze_tolerance",
    "init.family",
    "init.epsilon",
    "init.beta",
    "init.axis",
    "init.temperature",
    "output.directory",
    "output.stride",
    "seed",
];

struct Entries<'a> {
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.map.get(key).map(|(l, _)| *l),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|(_, v)| *v)
    }

    fn parse<V: std::str::FromStr>(&self, key: &str, default: V) -> Result<V> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| self.err(key, format!("cannot parse `{v}`"))),
        }
    }

    fn real<T: Real>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some("inf") | Some("infinity") => Ok(T::infinity()),
            Some(v) => v
                .parse::<T>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| self.err(key, format!("`{v}` is not a number"))),
        }
    }

    /// Wraps a validation error with this key's context.
    fn check(&self, key: &str, r: Result<()>) -> Result<()> {
        r.map_err(|e| match e {
            Error::InvalidArgument(m) => self.err(key, m),
            other => other,
        })
    }
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config<T: Real>(text: &str) -> Result<RunConfig<T>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config {
                line: Some(line),
                key: Some(k.to_string()),
                message: "unknown key".into(),
            });
        }
        if v.is_empty() {
            return Err(Error::Config {
                line: Some(line),
                key: Some(k.to_string()),
                message: "missing value".into(),
            });
        }
        if map.insert(k, (line, v)).is_some() {
            return Err(Error::Config {
                line: Some(line),
                key: Some(k.to_string()),
                message: "duplicate key".into(),
            });
        }
    }
    let e = Entries { map };

    let family = e
        .raw("kernel.family")
        .ok_or_else(|| Error::config("kernel.family", "required (soft | hard)"))?;
    let exponent: T = match e.raw("kernel.exponent") {
        Some(_) => e.real("kernel.exponent", T::zero())?,
        None => return Err(Error::config("kernel.exponent", "required")),
    };
    let cutoff = e.real("kernel.cutoff", T::lit(DEFAULT_CUTOFF))?;
    let kernel = KernelSpec {
        family: match family {
            "soft" => KernelFamily::Soft { b: exponent },
            "hard" => KernelFamily::Hard { a: exponent },
            other => return Err(e.err("kernel.family", format!("unknown family `{other}` (soft | hard)"))),
        },
        cutoff,
    };
    let kernel_key = if kernel.cutoff > T::zero() { "kernel.exponent" } else { "kernel.cutoff" };
    e.check(kernel_key, kernel.validate())?;

    let mut cfg = RunConfig::with_kernel(kernel);
    cfg.cosmology = CosmologyParams {
        amplitude: e.real("cosmology.C", T::one())?,
        t0: e.real("cosmology.t0", T::one())?,
    };
    let c_key = if cfg.cosmology.amplitude > T::zero() { "cosmology.t0" } else { "cosmology.C" };
    e.check(c_key, cfg.cosmology.validate())?;

    let d = GridConfig::<T>::default();
    cfg.grid = GridConfig {
        radial_nodes: e.parse("grid.radial_nodes", d.radial_nodes)?,
        r_max: e.real("grid.r_max", d.r_max)?,
        mapping: parse_enum(&e, "grid.mapping", d.mapping)?,
        direction_rule: parse_enum(&e, "grid.direction_rule", d.direction_rule)?,
        direction_degree: e.parse("grid.direction_degree", d.direction_degree)?,
        q_radial_nodes: e.parse("grid.q_radial_nodes", d.q_radial_nodes)?,
        q_degree: e.parse("grid.q_degree", d.q_degree)?,
        omega_degree: e.parse("grid.omega_degree", d.omega_degree)?,
    };
    e.check("grid.radial_nodes", {
        let g = &cfg.grid;
        RadialRule::build(g.radial_nodes, g.r_max, g.mapping).map(|_| ())
    })?;
    if let Err(err) = SphereRule::<T>::build(cfg.grid.direction_rule, cfg.grid.direction_degree) {
        return Err(e.err("grid.direction_degree", err.to_string()));
    }
    e.check("grid.q_radial_nodes", cfg.grid.build_rules().map(|_| ()))?;

    let di = IntegratorConfig::<T>::default();
    cfg.integrator = IntegratorConfig {
        method: parse_enum::<Method>(&e, "integrator.method", di.method)?,
        cfl: e.real("integrator.cfl", di.cfl)?,
        t_end: e.real("integrator.t_end", di.t_end)?,
        max_steps: e.parse("integrator.max_steps", di.max_steps)?,
        output_stride: e.parse("output.stride", di.output_stride)?,
        blowup_factor: e.real("integrator.blowup_factor", di.blowup_factor)?,
        freeze_tolerance: e.real("integrator.freeze_tolerance", di.freeze_tolerance)?,
    };
    e.check("integrator", cfg.integrator.validate())?;

    let init_family = e.raw("init.family").unwrap_or("canonical_small");
    let allowed: &[&str] = match init_family {
        "canonical_small" => &["init.epsilon"],
        "anisotropic" => &["init.epsilon", "init.beta", "init.axis"],
        "pure_equilibrium" => &["init.temperature"],
        other => return Err(e.err("init.family", format!("unknown initial data `{other}`"))),
    };
    for key in ["init.epsilon", "init.beta", "init.axis", "init.temperature"] {
        if e.raw(key).is_some() && !allowed.contains(&key) {
            return Err(e.err(key, format!("not used by init.family = {init_family}")));
        }
    }
    let epsilon = e.real("init.epsilon", T::lit(0.01))?;
    cfg.init = match init_family {
        "canonical_small" => InitFamily::CanonicalSmall { epsilon },
        "anisotropic" => {
            let axis = match e.raw("init.axis") {
                None => MomentumVector::new(T::zero(), T::zero(), T::one()),
                Some(v) => {
                    let parts: Vec<T> = v
                        .split_whitespace()
                        .map(|s| s.parse::<T>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| e.err("init.axis", format!("expected three numbers, found `{v}`")))?;
                    if parts.len() != 3 {
                        return Err(e.err("init.axis", format!("expected three numbers, found `{v}`")));
                    }
                    MomentumVector::new(parts[0], parts[1], parts[2])
                }
            };
            InitFamily::Anisotropic {
                epsilon,
                beta: e.real("init.beta", T::one())?,
                axis,
            }
        }
        _ => InitFamily::PureEquilibrium {
            temperature: e.real("init.temperature", T::one())?,
        },
    };
    e.check("init", cfg.init.validate())?;

    cfg.output = OutputConfig {
        directory: PathBuf::from(e.raw("output.directory").unwrap_or("out")),
        stride: cfg.integrator.output_stride,
    };
    cfg.seed = e.parse("seed", 0u64)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_enum<V>(e: &Entries<'_>, key: &str, default: V) -> Result<V>
where
    V: std::str::FromStr<Err = Error>,
{
    match e.raw(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|err: Error| match err {
            Error::InvalidArgument(m) => e.err(key, m),
            other => other,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: RunConfig<f64> = parse_config("kernel.family = soft\nkernel.exponent = 0.5\n").unwrap();
        assert_eq!(cfg.kernel, KernelSpec::soft(0.5, DEFAULT_CUTOFF).unwrap());
        assert_eq!(cfg.cosmology, CosmologyParams::new(1.0, 1.0).unwrap());
        assert_eq!(cfg.integrator.cfl, 0.5);
        assert_eq!(cfg.integrator.method, Method::Rk4);
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.init, InitFamily::CanonicalSmall { epsilon: 0.01 });
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn out_of_range_exponent_cites_range() {
        let err = parse_config::<f64>("kernel.family = soft\nkernel.exponent = 1.5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0, 1)"), "{msg}");
        assert!(matches!(err, Error::Config { line: Some(2), .. }), "{err:?}");
        let err = parse_config::<f64>("kernel.family = hard\nkernel.exponent = 2").unwrap_err();
        assert!(err.to_string().contains("[0, 2)"));
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let err = parse_config::<f64>("kernel.family = soft\nkernel.exponent = 0.5\ngrid.bogus = 3").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(3), ref key, .. } if key.as_deref() == Some("grid.bogus")));
        let err = parse_config::<f64>("kernel.family = soft\nkernel.family = hard\nkernel.exponent = 0.5").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse_config::<f64>("kernel.family = soft\nkernel.exponent 0.5").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_config::<f64>("kernel.exponent = 0.5").is_err());
    }

    #[test]
    fn bad_values_carry_key() {
        let base = "kernel.family = hard\nkernel.exponent = 1\n";
        for (extra, key) in [
            ("integrator.cfl = 1.5", "integrator"),
            ("grid.mapping = spiral", "grid.mapping"),
            ("cosmology.C = -1", "cosmology.C"),
            ("init.epsilon = abc", "init.epsilon"),
            ("init.beta = 2", "init.beta"),
            ("grid.radial_nodes = 2", "grid.radial_nodes"),
        ] {
            let err = parse_config::<f64>(&format!("{base}{extra}\n")).unwrap_err();
            match err {
                Error::Config { key: Some(k), .. } => assert_eq!(k, key, "{extra}"),
                other => panic!("{extra}: {other:?}"),
            }
        }
    }

    #[test]
    fn serialize_round_trip() {
        let text = "kernel.family = hard\nkernel.exponent = 0.3\nkernel.cutoff = inf\n\
                    init.family = anisotropic\ninit.beta = 0.25\ninit.axis = 1 0 0\n\
                    integrator.t_end = 12.5 # short\nseed = 42\n";
        let cfg: RunConfig<f64> = parse_config(text).unwrap();
        let again: RunConfig<f64> = parse_config(&cfg.serialize()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.serialize(), again.serialize());
        assert!(cfg.kernel.cutoff.is_infinite());
    }
}
