//! Verification harness: sampling, grid and multi-start checks of
//! `f_n >= 0`, replays of the `n = 2, 3` arguments, audits of the flow
//! lemmas, and deterministic JSON/CSV reports.
//!
//! Every random draw comes from ChaCha8 seeded with `RunConfig::seed` and
//! split into fixed-size substreams, so a report depends only on the config
//! and not on how many workers produced it.

mod commands;
mod lemmas;
mod minimize;
mod parallel;
mod report;
mod sampling;
mod small_n;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use commands::{
    eval_report, flow_report, parse_exact, tables_report, EvalReport, ExactEval, FlowRunReport,
    TablesReport, TrajectorySummary,
};
pub use lemmas::{check_lemmas, LemmaReport};
pub use minimize::{local_minimize, verify_minimize, LocalMin, MINIMIZE_MAX_ITERS, MIN_COORD};
pub use parallel::{with_threads, CHUNK};
pub use report::{emit_report, write_report, Report};
pub use sampling::{grid_side, probes, verify_grid, verify_sampling, CROSS_CHECK_SAMPLES};
pub use small_n::{check_n2, check_n3};

use crate::error::{Error, Result};

/// Inequality slack allowed by default.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Relative agreement required between evaluators of `L_n`.
pub const EVALUATOR_TOL: f64 = 1e-9;
/// Distance from `1` allowed for a point where `|f| <= tolerance`.
pub const EQUALITY_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sample,
    Grid,
    Minimize,
    Flow,
    Lemmas,
    Tables,
    Eval,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sample => "sample",
            Mode::Grid => "grid",
            Mode::Minimize => "minimize",
            Mode::Flow => "flow",
            Mode::Lemmas => "lemmas",
            Mode::Tables => "tables",
            Mode::Eval => "eval",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sample" => Mode::Sample,
            "grid" => Mode::Grid,
            "minimize" => Mode::Minimize,
            "flow" => Mode::Flow,
            "lemmas" => Mode::Lemmas,
            "tables" => Mode::Tables,
            "eval" => Mode::Eval,
            other => return Err(Error::ParameterOutOfRange(format!("unknown mode {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::ParameterOutOfRange(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Upper bound per coordinate of the sampling box.
    pub box_bound: f64,
    pub mode: Mode,
    pub output_format: OutputFormat,
    pub exact: bool,
    /// Worker cap; `None` uses the global pool. Not part of the report.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults: 10^4 samples, seed 0, tolerance 1e-12, box `6n`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            samples: 10_000,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            box_bound: 6.0 * n as f64,
            mode: Mode::Sample,
            output_format: OutputFormat::Json,
            exact: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.box_bound > 0.0 && self.box_bound.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "box must be positive, got {}",
                self.box_bound
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::ParameterOutOfRange("thread count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            n: self.n,
            seed: self.seed,
            samples: self.samples,
            tolerance: self.tolerance,
            box_bound: self.box_bound,
            mode: self.mode,
        }
    }
}

/// The part of a [`RunConfig`] that determines a report.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub box_bound: f64,
    pub mode: Mode,
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// The extreme value of the checked quantity (its direction is given by
    /// `requirement`).
    pub worst: f64,
    pub checked: usize,
    pub requirement: String,
}

impl CheckOutcome {
    pub fn new(passed: bool, worst: f64, checked: usize, requirement: impl Into<String>) -> Self {
        Self {
            passed,
            worst,
            checked,
            requirement: requirement.into(),
        }
    }

    /// Passes when every value is `>= bound`; `worst` is the minimum.
    pub fn at_least(values: impl IntoIterator<Item = f64>, bound: f64, req: &str) -> Self {
        Self::fold(values, f64::min, |w| w >= bound, req)
    }

    /// Passes when every value is `> bound`; `worst` is the minimum.
    pub fn above(values: impl IntoIterator<Item = f64>, bound: f64, req: &str) -> Self {
        Self::fold(values, f64::min, |w| w > bound, req)
    }

    /// Passes when every value is `< bound`; `worst` is the maximum.
    pub fn below(values: impl IntoIterator<Item = f64>, bound: f64, req: &str) -> Self {
        Self::fold(values, f64::max, |w| w < bound, req)
    }

    /// Passes when every value is `<= bound`; `worst` is the maximum.
    pub fn at_most(values: impl IntoIterator<Item = f64>, bound: f64, req: &str) -> Self {
        Self::fold(values, f64::max, |w| w <= bound, req)
    }

    fn fold(
        values: impl IntoIterator<Item = f64>,
        pick: fn(f64, f64) -> f64,
        ok: impl Fn(f64) -> bool,
        req: &str,
    ) -> Self {
        let mut worst: Option<f64> = None;
        let mut checked = 0;
        let mut passed = true;
        for v in values {
            checked += 1;
            passed &= ok(v);
            worst = Some(match worst {
                Some(w) => pick(w, v),
                None => v,
            });
        }
        // NaN fails `ok`; keep the report serializable anyway.
        let worst = worst.filter(|w| w.is_finite()).unwrap_or(0.0);
        Self::new(passed, worst, checked, req)
    }
}

/// Named checks in a stable (sorted) order.
pub type Checks = BTreeMap<String, CheckOutcome>;

pub fn all_passed(checks: &Checks) -> bool {
    checks.values().all(|c| c.passed)
}

/// Result of a sampling, grid or multi-start run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerifyReport {
    pub config: ConfigEcho,
    pub min_f: f64,
    pub argmin: Vec<f64>,
    /// Index of the minimizer among probes followed by samples (or starts).
    pub argmin_index: usize,
    /// Points with `f < -tolerance`.
    pub violations: usize,
    pub samples_run: usize,
    pub probes: usize,
    pub evaluator_max_disagreement: f64,
    pub evaluator_points: usize,
    pub checks: Checks,
    pub passed: bool,
}

/// Dispatches on `cfg.mode` to sampling, grid or multi-start minimization.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    match cfg.mode {
        Mode::Sample => verify_sampling(cfg),
        Mode::Grid => verify_grid(cfg),
        Mode::Minimize => verify_minimize(cfg),
        other => Err(Error::ParameterOutOfRange(format!(
            "verify supports sample, grid and minimize modes, got {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_folds() {
        let c = CheckOutcome::at_least([3.0, 1.0, 2.0], 1.0, "x >= 1");
        assert!(c.passed);
        assert_eq!((c.worst, c.checked), (1.0, 3));
        assert!(!CheckOutcome::above([3.0, 1.0], 1.0, "x > 1").passed);
        assert!(CheckOutcome::below([-3.0, -1.0], 0.0, "x < 0").passed);
        let empty = CheckOutcome::at_most(std::iter::empty(), 0.0, "none");
        assert!(empty.passed && empty.checked == 0 && empty.worst == 0.0);
        let nan = CheckOutcome::at_least([f64::NAN], 0.0, "nan");
        assert!(!nan.passed && nan.worst == 0.0);
    }

    #[test]
    fn config_validation_and_parsing() {
        let mut cfg = RunConfig::new(4);
        assert_eq!(cfg.box_bound, 24.0);
        assert!(cfg.validate().is_ok());
        cfg.tolerance = 0.0;
        assert!(cfg.validate().is_err());
        assert_eq!("grid".parse::<Mode>().unwrap(), Mode::Grid);
        assert!("nope".parse::<Mode>().is_err());
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        cfg.tolerance = 1e-12;
        cfg.mode = Mode::Tables;
        assert!(verify(&cfg).is_err());
    }
}
