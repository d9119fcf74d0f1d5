//! Batch experiments: moment and distribution suites, convergence studies,
//! error ratios and a multilevel Monte Carlo harness. Every suite returns
//! report rows; a row passes when `|estimate - target| <= tolerance`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

pub mod config;
pub mod engine;
mod suites;

pub use config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Moments,
    LevyArea,
    Sst,
    ShuffleCheck,
    Convergence,
    Ratio,
    Mlmc,
}

impl Suite {
    pub fn all() -> [Suite; 7] {
        use Suite::*;
        [Moments, LevyArea, Sst, ShuffleCheck, Convergence, Ratio, Mlmc]
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::LevyArea => "levy-area",
            Suite::Sst => "sst",
            Suite::ShuffleCheck => "shuffle-check",
            Suite::Convergence => "convergence",
            Suite::Ratio => "ratio",
            Suite::Mlmc => "mlmc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::all().into_iter().find(|x| x.name() == s).ok_or_else(|| invalid(format!("unknown experiment `{s}`")))
    }
}

/// One line of a report. Informational rows carry a NaN target and always pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub solver: String,
    pub n: Option<usize>,
    pub paths: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub tolerance: f64,
    pub runtime_s: f64,
}

impl Row {
    pub fn new(experiment: impl Into<String>, solver: impl Into<String>, paths: usize, estimate: f64, stderr: f64) -> Row {
        Row {
            experiment: experiment.into(),
            solver: solver.into(),
            n: None,
            paths,
            estimate,
            stderr,
            target: f64::NAN,
            tolerance: f64::NAN,
            runtime_s: 0.0,
        }
    }

    pub fn with_n(mut self, n: usize) -> Row {
        self.n = Some(n);
        self
    }

    /// Checked against `target` with an absolute tolerance.
    pub fn check(mut self, target: f64, tolerance: f64) -> Row {
        self.target = target;
        self.tolerance = tolerance;
        self
    }

    /// Checked against `target` within `k` standard errors.
    pub fn check_se(self, target: f64, k: f64) -> Row {
        let tol = k * self.stderr;
        self.check(target, tol)
    }

    /// Checked to lie in `[lo, hi]`.
    pub fn check_range(self, lo: f64, hi: f64) -> Row {
        self.check(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn is_informational(&self) -> bool {
        self.target.is_nan()
    }

    pub fn pass(&self) -> bool {
        self.is_informational() || (self.estimate - self.target).abs() <= self.tolerance
    }

    /// Multiples of the standard error between estimate and target.
    pub fn se_multiple(&self) -> f64 {
        (self.estimate - self.target).abs() / self.stderr
    }
}

pub const CSV_HEADER: [&str; 9] = ["experiment", "solver", "N", "paths", "estimate", "stderr", "target", "tolerance", "runtime_s"];

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Row {
    /// Fields in [`CSV_HEADER`] order.
    pub fn fields(&self) -> [String; 9] {
        [
            self.experiment.clone(),
            self.solver.clone(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.paths.to_string(),
            format_float(self.estimate),
            format_float(self.stderr),
            format_float(self.target),
            format_float(self.tolerance),
            format_float(self.runtime_s),
        ]
    }
}

/// Runs one suite.
pub fn run(suite: Suite, cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    if let Some(name) = &cfg.experiment {
        if name != suite.name() {
            return Err(invalid(format!("config is for `{name}`, not `{suite}`")));
        }
    }
    match suite {
        Suite::Moments => suites::moments(cfg),
        Suite::LevyArea => suites::levy_area(cfg),
        Suite::Sst => suites::sst(cfg),
        Suite::ShuffleCheck => suites::shuffle_check(cfg),
        Suite::Convergence => suites::convergence(cfg),
        Suite::Ratio => suites::ratio(cfg),
        Suite::Mlmc => suites::mlmc(cfg),
    }
}
