//! Experiment runner for the `dvlab` command.
//!
//! Every preset returns a [`Report`]: a list of named assertions plus CSV
//! tables. [`emit`] writes the tables and a `summary.json`; all floats are
//! printed in shortest round-trip form so reruns are byte-identical.

pub mod presets;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dvlab_core::cache::atomic_write;
use dvlab_core::dirichlet::fmt_f64;
use dvlab_core::measures::MeasureSpec;
use dvlab_core::norms::StripGrid;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const PRESETS: [&str; 8] = [
    "exp-weights",
    "exp-nu-gamma",
    "exp-lacunary",
    "exp-lp-identity",
    "exp-schatten",
    "exp-compactness",
    "exp-radicality",
    "exp-functionals",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown preset `{0}`; expected one of {PRESETS:?} or `custom`")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dvlab_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// σ grid of the strip `0 < σ ≤ 1` and the `t` window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sigma_min: f64,
    pub n_sigma: usize,
    pub t_max: f64,
    pub n_t: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { sigma_min: 2f64.powi(-20), n_sigma: 200, t_max: 50.0, n_t: 401 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<StripGrid> {
        Ok(StripGrid::new(self.sigma_min, self.n_sigma, self.t_max, self.n_t)?)
    }
}

/// Contents of `--config cfg.json`. Unset fields take the preset's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default, rename = "N", alias = "truncation")]
    pub truncation: Option<u64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Preset-specific knobs such as `dim`, `pairs` or `series_csv`.
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            measure: None,
            truncation: None,
            grid: None,
            seed: 0,
            output_dir: None,
            params: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name != "custom" && !PRESETS.contains(&self.name.as_str()) {
            return Err(CliError::UnknownPreset(self.name.clone()));
        }
        if let Some(n) = self.truncation {
            if n < 2 {
                return Err(CliError::Config(format!("N must be at least 2, got {n}")));
            }
        }
        if let Some(m) = &self.measure {
            dvlab_core::AdmissibleMeasure::new(m.clone())?;
        }
        Ok(())
    }

    pub fn param_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| CliError::Config(format!("param `{key}` must be a nonnegative integer"))),
        }
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| CliError::Config(format!("param `{key}` must be a number"))),
        }
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(Value::as_str)
    }
}

/// One checked statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// The inequality or identity being checked.
    pub claim: String,
    pub passed: bool,
    /// Observed quantities behind the verdict.
    pub observed: Value,
}

impl Assertion {
    pub fn new(name: &str, claim: &str, passed: bool, observed: Value) -> Self {
        Self { name: name.to_string(), claim: claim.to_string(), passed, observed }
    }
}

/// A CSV file: header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    /// Row whose first cell is an integer index.
    pub fn push_indexed(&mut self, index: u64, row: &[f64]) {
        self.rows.push(std::iter::once(index.to_string()).chain(row.iter().map(|x| fmt_f64(*x))).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Core(dvlab_core::Error::from(e));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub preset: String,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    /// Parameters actually used, after defaults were applied.
    pub parameters: Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub preset: String,
    pub passed: bool,
    pub parameters: Value,
    pub assertions: Vec<Assertion>,
    pub files: Vec<String>,
}

/// Writes every table as `<name>.csv` and the summary as `summary.json`.
pub fn emit(report: &Report, out: &Path) -> Result<Summary> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    let mut files = Vec::new();
    for t in &report.tables {
        let name = format!("{}.csv", t.name);
        atomic_write(&out.join(&name), &t.render()?)?;
        files.push(name);
    }
    let summary = Summary {
        preset: report.preset.clone(),
        passed: report.passed(),
        parameters: report.parameters.clone(),
        assertions: report.assertions.clone(),
        files,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    atomic_write(&out.join("summary.json"), text.as_bytes())?;
    Ok(summary)
}

/// Runs the preset named by `cfg.name`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.name.as_str() {
        "exp-weights" => presets::weights(cfg),
        "exp-nu-gamma" => presets::nu_gamma(cfg),
        "exp-lacunary" => presets::lacunary(cfg),
        "exp-lp-identity" => presets::lp_identity(cfg),
        "exp-schatten" => presets::schatten(cfg),
        "exp-compactness" => presets::compactness(cfg),
        "exp-radicality" => presets::radicality(cfg),
        "exp-functionals" => presets::functionals(cfg),
        "custom" => presets::custom(cfg),
        other => Err(CliError::UnknownPreset(other.to_string())),
    }
}
