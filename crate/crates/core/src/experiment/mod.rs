//! Reproducible experiments behind the `setyoung` binary.
//!
//! A run takes an [`ExperimentConfig`] and produces an [`Outcome`]: numeric
//! claims tagged with where their value comes from, bound checks, and one
//! table of series data. [`write_outputs`] turns it into `results.json` and
//! `series.csv`; both are pure functions of the config and seed.

mod commands;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Steiner,
    Metrics,
    Young,
    Aumann,
    Discretize,
    Example3,
    Inclusion,
    Funnel,
    FbmCheck,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    /// Command-specific parameters; missing keys take their defaults.
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64, params: Value) -> Self {
        ExperimentConfig {
            command,
            seed,
            out_dir: None,
            params,
        }
    }
}

/// Where a number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A bound or value stated by the theory.
    PaperBound,
    /// A constant or tolerance we picked where the theory leaves one free.
    OurConstantChoice,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub value: Value,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// `measured (relation) bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: Claim,
    pub relation: Relation,
    pub bound: Claim,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub claims: Vec<Claim>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub series: Series,
}

impl Outcome {
    fn claim(&mut self, name: &str, value: impl Serialize, provenance: Provenance) {
        self.claims.push(Claim {
            name: name.into(),
            value: serde_json::to_value(value).expect("serializable"),
            provenance,
        });
    }

    fn measured(&mut self, name: &str, value: impl Serialize) {
        self.claim(name, value, Provenance::Measured);
    }

    fn check(&mut self, name: &str, measured: f64, relation: Relation, bound: f64, provenance: Provenance) {
        let passed = match relation {
            Relation::AtMost => measured <= bound,
            Relation::AtLeast => measured >= bound,
        };
        self.checks.push(Check {
            name: name.into(),
            measured: Claim {
                name: name.into(),
                value: number(measured),
                provenance: Provenance::Measured,
            },
            relation,
            bound: Claim {
                name: format!("{name}_bound"),
                value: number(bound),
                provenance,
            },
            passed,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Unknown command, malformed config, missing or invalid parameter.
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 2 for usage errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Usage(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<(Value, Outcome)> {
    commands::dispatch(cfg.command, &cfg.params, cfg.seed)
}

#[derive(Serialize)]
struct ResultsFile<'a> {
    command: Command,
    seed: u64,
    params: &'a Value,
    all_checks_passed: bool,
    claims: &'a [Claim],
    checks: &'a [Check],
    warnings: &'a [String],
}

/// Writes `results.json` and `series.csv` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, params: &Value, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let results = ResultsFile {
        command: cfg.command,
        seed: cfg.seed,
        params,
        all_checks_passed: outcome.all_passed(),
        claims: &outcome.claims,
        checks: &outcome.checks,
        warnings: &outcome.warnings,
    };
    let mut json = serde_json::to_string_pretty(&results).map_err(|e| ExperimentError::Numerical(e.to_string()))?;
    json.push('\n');
    std::fs::write(dir.join("results.json"), json)?;
    let mut w = csv::Writer::from_path(dir.join("series.csv")).map_err(csv_err)?;
    w.write_record(&outcome.series.header).map_err(csv_err)?;
    for row in &outcome.series.rows {
        w.write_record(row.iter().map(|x| crate::paths::format_float(*x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(std::io::Error::other(e.to_string()))
}
