//! Command line front end: simulations and verification suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flrw_boltzmann::config::parse_config;
use flrw_boltzmann::diagnostics::{
    run_cutoff_study, run_kinematics_suite, run_symmetry_suite, KinematicsSuiteConfig, ReportText,
};
use flrw_boltzmann::state::{parse_snapshot, serialize_snapshot};
use flrw_boltzmann::{DistributionState, Error, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "flrw-boltzmann", version, about = "Massless Boltzmann solver in an expanding FLRW background")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run configuration (key = value text).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the configured initial data; writes a CSV time series and the
    /// final snapshot.
    Simulate(Common),
    /// Randomised checks of the collision kinematics.
    VerifyKinematics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 29)]
        omega_degree: usize,
    },
    /// Runs the configuration at each cutoff and compares against the
    /// tightest one.
    CutoffStudy {
        #[command(flatten)]
        common: Common,
        /// Comma separated, geometrically spaced.
        #[arg(long, value_delimiter = ',', required = true)]
        cutoffs: Vec<f64>,
    },
    /// Isotropy preservation and rotation equivariance.
    SymmetrySuite(Common),
    /// Norms of a snapshot, or of the configured initial data.
    Norms {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parse { .. } | Error::InvalidArgument(_) | Error::UnsupportedDegree { .. } => {
            EXIT_CONFIG
        }
        Error::DegenerateConfiguration(_) | Error::NonFinite(_) | Error::BlowUp { .. } => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn load_config(common: &Common) -> flrw_boltzmann::Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config {
            line: None,
            key: None,
            message: "--config is required for this command".into(),
        })?;
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut config: RunConfig = parse_config(&text)?;
    if let Some(out) = &common.out {
        config.output.directory = out.clone();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn config_header(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("flrw-boltzmann {}", env!("CARGO_PKG_VERSION"))];
    lines.extend(config.entries().into_iter().map(|(k, v)| format!("{k} = {v}")));
    lines
}

fn write(dir: &Path, name: &str, contents: &str) -> flrw_boltzmann::Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn simulate(common: &Common) -> flrw_boltzmann::Result<()> {
    let config = load_config(common)?;
    config.validate()?;
    let header = config_header(&config);
    let result = config.problem()?.simulate(config.initial_state()?)?;
    let dir = &config.output.directory;
    let csv = write(dir, "timeseries.csv", &result.series.to_csv(&header))?;
    let snap = write(dir, "final_snapshot.txt", &serialize_snapshot(&result.final_state, &header))?;
    println!(
        "{:?} after {} steps at t = {:e}",
        result.termination, result.steps, result.final_state.time
    );
    println!("wrote {}", csv.display());
    println!("wrote {}", snap.display());
    Ok(())
}

fn verify_kinematics(common: &Common, trials: usize, samples: usize, omega_degree: usize) -> flrw_boltzmann::Result<()> {
    let (seed, dir, mut header) = match &common.config {
        Some(_) => {
            let config = load_config(common)?;
            (config.seed, Some(config.output.directory.clone()), config_header(&config))
        }
        None => (
            common.seed.unwrap_or(0),
            common.out.clone(),
            vec![format!("flrw-boltzmann {}", env!("CARGO_PKG_VERSION"))],
        ),
    };
    header.push(format!("seed = {seed}"));
    let mut suite = KinematicsSuiteConfig::new(seed, trials);
    suite.monte_carlo_samples = samples;
    suite.omega_degree = omega_degree;
    let report = run_kinematics_suite::<f64>(&suite)?.to_text(&header);
    print!("{report}");
    if let Some(dir) = dir {
        write(&dir, "kinematics_report.txt", &report)?;
    }
    Ok(())
}

fn cutoff_study(common: &Common, cutoffs: &[f64]) -> flrw_boltzmann::Result<()> {
    let config = load_config(common)?;
    let header = config_header(&config);
    let report = run_cutoff_study(&config, cutoffs)?;
    let text = report.to_text(&header);
    print!("{text}");
    let dir = &config.output.directory;
    write(dir, "cutoff_report.txt", &text)?;
    write(dir, "cutoff_distances.csv", &report.matrix_csv(&header))?;
    Ok(())
}

fn symmetry_suite(common: &Common) -> flrw_boltzmann::Result<()> {
    let config = load_config(common)?;
    let header = config_header(&config);
    let text = run_symmetry_suite(&config)?.to_text(&header);
    print!("{text}");
    write(&config.output.directory, "symmetry_report.txt", &text)?;
    Ok(())
}

fn norms(common: &Common, snapshot: Option<&Path>) -> flrw_boltzmann::Result<()> {
    let (state, mut header): (DistributionState, Vec<String>) = match snapshot {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            (parse_snapshot(&text)?, vec![format!("snapshot = {}", path.display())])
        }
        None => {
            let config = load_config(common)?;
            (config.initial_state()?, config_header(&config))
        }
    };
    header.insert(0, format!("flrw-boltzmann {}", env!("CARGO_PKG_VERSION")));
    let (number, energy) = state.moments();
    let mut report = ReportText::new()
        .comments(&header)
        .section("norms")
        .num("t", state.time)
        .num("number", number)
        .num("energy", energy);
    for (key, r) in [("l1_m2", -2.0), ("l1_m1", -1.0), ("l1_0", 0.0), ("l1_1", 1.0)] {
        report = report.num(key, state.norm_l1r(r)?);
    }
    let text = report
        .num("linf_w", state.norm_linf_w())
        .num("max_direction_variance", state.max_direction_variance())
        .finish();
    print!("{text}");
    if let Some(dir) = &common.out {
        write(dir, "norms.txt", &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(common) => simulate(common),
        Command::VerifyKinematics {
            common,
            trials,
            samples,
            omega_degree,
        } => verify_kinematics(common, *trials, *samples, *omega_degree),
        Command::CutoffStudy { common, cutoffs } => cutoff_study(common, cutoffs),
        Command::SymmetrySuite(common) => symmetry_suite(common),
        Command::Norms { common, snapshot } => norms(common, snapshot.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_categories() {
        assert_eq!(exit_code(&Error::Parse { line: 1, message: "x".into() }), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), EXIT_CONFIG);
        let blow = Error::BlowUp {
            time: 1.0,
            norm: 2.0,
            limit: 1.0,
        };
        assert_eq!(exit_code(&blow), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::NonFinite("x".into())), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
    }

    #[test]
    fn cli_parses_cutoff_list() {
        let cli = Cli::try_parse_from(["flrw-boltzmann", "cutoff-study", "--config", "a.cfg", "--cutoffs", "2,4,8"]).unwrap();
        match cli.command {
            Command::CutoffStudy { cutoffs, .. } => assert_eq!(cutoffs, vec![2.0, 4.0, 8.0]),
            other => panic!("{other:?}"),
        }
    }
}
