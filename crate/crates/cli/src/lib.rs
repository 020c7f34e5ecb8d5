//! Batch front-end for the `unipert` engines: JSON scenario configs in,
//! CSV rows and JSON summaries out.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub mod config;
pub mod report;
pub mod scenario;

use config::{Engine, IonTrapConfig, ModelConfig, ScenarioConfig, Tolerances};
use scenario::{csv_text, summary_json, ScenarioResult};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] unipert::Error),
    #[error("checks failed: {}", .0.join("; "))]
    CheckFailed(Vec<String>),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 1 for I/O, 2 for invalid input, 3 for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) | CliError::Model(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `<stem>.csv` and `<stem>.summary.json` under `out`.
pub fn write_result(out: &Path, result: &ScenarioResult) -> Result<(), CliError> {
    let stem = result.config.stem();
    write_file(&out.join(format!("{stem}.csv")), &csv_text(result))?;
    write_file(&out.join(format!("{stem}.summary.json")), &summary_json(result))
}

/// Names of failed checks across `results`, as `id:check`.
pub fn failed_checks(results: &[ScenarioResult]) -> Vec<String> {
    results
        .iter()
        .flat_map(|r| r.summary.checks.iter().filter(|c| !c.pass).map(move |c| format!("{}:{}", r.config.id, c.name)))
        .collect()
}

/// Default ion-trap comparison: RWA against the unitary expansions, Magnus and Dyson.
pub fn demo_scenarios(model: IonTrapConfig) -> Vec<ScenarioConfig> {
    let horizon = 3.0 * 2.0 * PI / model.nu;
    let time_grid: Vec<f64> = (1..=12).map(|j| horizon * j as f64 / 12.0).collect();
    let lambda_grid = vec![0.02, 0.01, 0.005, 0.0025];
    [
        (Engine::Rwa, 1),
        (Engine::TdMean, 1),
        (Engine::TdMean, 2),
        (Engine::Ti, 2),
        (Engine::Magnus, 2),
        (Engine::Dyson, 1),
    ]
    .into_iter()
    .map(|(engine, order)| ScenarioConfig {
        id: format!("iontrap-{}-{order}", engine.name()),
        model: ModelConfig::IonTrap(model.clone()),
        engine,
        order,
        lambda_grid: lambda_grid.clone(),
        time_grid: time_grid.clone(),
        tolerances: Tolerances::default(),
        gauge: None,
        output: None,
    })
    .collect()
}
