//! The normalized description of one run.

use std::path::PathBuf;

use latstretch_core::asymptotics::CountTarget;
use latstretch_core::optimizer::Objective;
use serde::{Deserialize, Serialize};

use crate::body::BodySource;
use crate::error::CliError;

/// Evaluation budget for heuristic optimization when none is given.
pub const DEFAULT_BUDGET: usize = 20_000;
/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "LATSTRETCH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Count,
    Balance,
    Predict,
    Optimize,
    Sweep,
    Weyl,
    FourierCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    MaxPositive,
    MinNonnegative,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MaxPositive => Objective::MaximizePositive,
            ObjectiveArg::MinNonnegative => Objective::MinimizeNonnegative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    Positive,
    Nonnegative,
    Nonzero,
    All,
    Hyperplane,
}

impl From<TargetArg> for CountTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Positive => CountTarget::Positive,
            TargetArg::Nonnegative => CountTarget::Nonnegative,
            TargetArg::Nonzero => CountTarget::Nonzero,
            TargetArg::All => CountTarget::All,
            TargetArg::Hyperplane => CountTarget::Hyperplane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// One value or an inclusive `start:stop:step` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Grid {
    Value(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("expected a number or start:stop:step, got `{text}`"));
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            [v] => Ok(Grid::Value(num(v)?)),
            [a, b, c] => {
                let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
                if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && start <= stop) {
                    return Err(CliError::Usage(format!("grid `{text}` needs finite start <= stop and step > 0")));
                }
                Ok(Grid::Range { start, stop, step })
            }
            _ => Err(bad()),
        }
    }

    /// `start + i step` up to `stop` (inclusive up to rounding).
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Value(v) => vec![v],
            Grid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, Grid::Value(_))
    }
}

/// A comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number `{s}` in list `{text}`"))))
        .collect()
}

/// Parsed invocation with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub body: Option<BodySource>,
    pub r: Option<Grid>,
    /// Diagonal of `A`; must have product 1.
    pub stretch: Option<Vec<f64>>,
    pub objective: ObjectiveArg,
    pub target: TargetArg,
    /// `None` picks exact in the plane and heuristic otherwise.
    pub mode: Option<ModeArg>,
    pub seed: u64,
    pub budget: usize,
    /// Search interval `[a_lo, a_hi]` for planar optimization.
    pub interval: Option<(f64, f64)>,
    pub delta: Option<f64>,
    pub truncation: Option<f64>,
    pub sides: Option<Vec<f64>>,
    pub lambda: Option<Grid>,
    pub neumann: bool,
    pub check: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            body: None,
            r: None,
            stretch: None,
            objective: ObjectiveArg::MaxPositive,
            target: TargetArg::Positive,
            mode: None,
            seed: 0,
            budget: DEFAULT_BUDGET,
            interval: None,
            delta: None,
            truncation: None,
            sides: None,
            lambda: None,
            neumann: false,
            check: false,
            format: if command == Command::Sweep { Format::Csv } else { Format::Json },
            out: None,
            threads: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// JSON, or TOML when `toml` is set.
    pub fn parse(text: &str, toml: bool) -> Result<Self, CliError> {
        let parsed = if toml {
            toml::from_str(text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Usage(format!("malformed run config: {e}")))
    }

    /// `--threads`, else `LATSTRETCH_THREADS`, else all cores.
    pub fn resolved_threads(&self) -> Result<Option<usize>, CliError> {
        if let Some(n) = self.threads {
            return Ok(Some(n));
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
            Err(_) => Ok(None),
        }
    }
}
