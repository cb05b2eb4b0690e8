//! Verification suites: kinematic oracles, cutoff removal, symmetry.
//!
//! Reports render as key-value text with `[section]` headers; tables are
//! embedded as CSV blocks under `[section.table]`.

mod cutoff;
mod kinematics_suite;
mod symmetry;

use std::fmt::{Display, Write as _};

pub use cutoff::{run_cutoff_study, CutoffStudyReport};
pub use kinematics_suite::{run_kinematics_suite, KinematicsReport, KinematicsSuiteConfig, MonteCarloCheck};
pub use symmetry::{run_symmetry_suite, SymmetryReport};

/// Builder for the report text format.
#[derive(Debug, Default, Clone)]
pub struct ReportText {
    out: String,
}

impl ReportText {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comments(mut self, lines: &[String]) -> Self {
        for l in lines {
            let _ = writeln!(self.out, "# {l}");
        }
        self
    }

    pub fn section(mut self, name: &str) -> Self {
        if !self.out.is_empty() && !self.out.ends_with("\n\n") {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "[{name}]");
        self
    }

    pub fn kv(mut self, key: &str, value: impl Display) -> Self {
        let _ = writeln!(self.out, "{key} = {value}");
        self
    }

    /// Float in the 17-significant-digit form used by every output file.
    pub fn num(self, key: &str, value: f64) -> Self {
        self.kv(key, format!("{value:.16e}"))
    }

    pub fn table(mut self, name: &str, csv: &str) -> Self {
        self = self.section(name);
        self.out.push_str(csv);
        if !csv.ends_with('\n') {
            self.out.push('\n');
        }
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}
