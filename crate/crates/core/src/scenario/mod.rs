//! Declarative scenarios: TOML configuration, deterministic execution, CSV
//! tables, an `index.json` describing the run, and SVG plots of the tables.
//!
//! Every table is written with a fixed column order and 17 significant
//! digits. Reductions run in a fixed order (parallel jobs are collected in
//! request order), so identical configurations give identical bytes. Wall
//! times appear only in `index.json`.

mod config;
mod plot;
mod runners;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    ConfigError, FockSectorsParams, HartreeCoulombParams, HydrogenParams, KernelVerifyParams, NseEvolveParams,
    NseGroundParams, SceMisstepParams, ScenarioConfig, ScenarioKind,
};
pub use plot::{plot_dir, render_svg, PlotOutcome};

use crate::output::CsvTable;

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("computation failed: {0}")]
    Compute(String),
}

macro_rules! compute_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Compute(e.to_string())
            }
        }
    )*};
}

compute_errors!(
    crate::nse::NseError,
    crate::fock::FockError,
    crate::kernels::KernelError,
    crate::lattice::LatticeError,
    crate::grid::GridError,
    crate::meanfield::MeanFieldError,
    crate::sce::SceError
);

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// How to draw a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub y: Vec<String>,
    /// One series per distinct value of this column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_by: Option<String>,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
}

impl PlotSpec {
    pub fn lines(title: &str, x: &str, y: &[&str]) -> Self {
        Self {
            title: title.into(),
            x: x.into(),
            y: y.iter().map(|s| s.to_string()).collect(),
            group_by: None,
            log_x: false,
            log_y: false,
        }
    }

    pub fn grouped(mut self, column: &str) -> Self {
        self.group_by = Some(column.into());
        self
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

pub struct Table {
    pub file: String,
    pub table: CsvTable,
    pub plot: Option<PlotSpec>,
}

impl Table {
    pub fn new(file: impl Into<String>, table: CsvTable) -> Self {
        Self { file: file.into(), table, plot: None }
    }

    pub fn plot(mut self, spec: PlotSpec) -> Self {
        self.plot = Some(spec);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn check(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn failed(name: &str, detail: impl Into<String>) -> Self {
        Self::check(name, false, detail)
    }

    /// Passes when `value < bound` (or `value <= bound` for a zero-valued pass).
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        let passed = value < bound || (value == 0.0 && bound == 0.0);
        Self::check(name, passed && !value.is_nan(), format!("{value:e} < {bound:e}"))
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self::check(name, value > bound, format!("{value:e} > {bound:e}"))
    }
}

pub struct ScenarioOutput {
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub summary: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotSpec>,
}

/// Contents of `index.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: ScenarioKind,
    pub config_hash: String,
    /// Canonical TOML of the effective configuration; parses back to it.
    pub config: String,
    pub files: Vec<FileEntry>,
    pub assertions: Vec<Assertion>,
    pub summary: serde_json::Value,
    pub wall_ms: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(INDEX_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Compute(format!("{}: {e}", path.display())))
    }
}

/// Executes the scenario without touching the filesystem.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    config.validate()?;
    let missing = || RunError::Config(ConfigError { line: None, message: "missing scenario section".into() });
    match config.scenario {
        ScenarioKind::NseEvolve => runners::nse_evolve(config.nse_evolve.as_ref().ok_or_else(missing)?),
        ScenarioKind::NseGround => runners::nse_ground(config.nse_ground.as_ref().ok_or_else(missing)?),
        ScenarioKind::HartreeCoulomb => runners::hartree_coulomb(config.hartree_coulomb.as_ref().ok_or_else(missing)?),
        ScenarioKind::FockSectors => {
            runners::fock_sectors(config.fock_sectors.as_ref().ok_or_else(missing)?, config.seed)
        }
        ScenarioKind::MeanfieldConverge => {
            runners::meanfield_converge(config.meanfield_converge.as_ref().ok_or_else(missing)?)
        }
        ScenarioKind::SceMisstep => runners::sce_misstep(config.sce_misstep.as_ref().ok_or_else(missing)?),
        ScenarioKind::HydrogenWrongNse => {
            runners::hydrogen_wrong_nse(config.hydrogen_wrong_nse.as_ref().ok_or_else(missing)?)
        }
        ScenarioKind::KernelVerify => runners::kernel_verify(config.kernel_verify.as_ref().ok_or_else(missing)?),
    }
}

/// Directory a run writes to: the explicit override, else the config's
/// `output_dir`, else `runs/<scenario>`.
pub fn output_dir(config: &ScenarioConfig, override_dir: Option<&Path>) -> PathBuf {
    match (override_dir, &config.output_dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("runs").join(config.scenario.name()),
    }
}

/// Runs the scenario and writes its tables and `index.json` into `dir`.
pub fn run(config: &ScenarioConfig, dir: &Path) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let output = execute(config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    for t in &output.tables {
        let path = dir.join(&t.file);
        fs::write(&path, t.table.to_csv()).map_err(io_err(&path))?;
        files.push(FileEntry {
            name: t.file.clone(),
            columns: t.table.columns.clone(),
            rows: t.table.len(),
            plot: t.plot.clone(),
        });
    }
    let report = RunReport {
        scenario: config.scenario,
        config_hash: config.content_hash(),
        config: config.to_toml(),
        files,
        assertions: output.assertions,
        summary: output.summary,
        wall_ms,
    };
    let path = dir.join(INDEX_FILE);
    let text = serde_json::to_string_pretty(&report).map_err(|e| RunError::Compute(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(report)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ScenarioConfig::parse(&text)?)
}
