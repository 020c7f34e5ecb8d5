//! Side-by-side error tables for scenarios sharing a model and grids.

use serde::Serialize;

use crate::config::Engine;
use crate::scenario::{ScenarioResult, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub label: String,
    pub scenario_id: String,
    pub engine: &'static str,
    pub order: usize,
    /// Largest error over the time grid, per λ.
    pub errors: Vec<f64>,
    pub slope: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub lambda_grid: Vec<f64>,
    pub time_grid: Vec<f64>,
    pub columns: Vec<Column>,
}

/// Column order: RWA, then the unitary expansions by order, then Magnus, then Dyson.
fn rank(engine: Engine) -> u8 {
    match engine {
        Engine::Rwa => 0,
        Engine::Ti | Engine::TdMean | Engine::TdGauged | Engine::FloquetMagnus => 1,
        Engine::Magnus => 2,
        Engine::Dyson => 3,
    }
}

pub fn compare_report(results: &[ScenarioResult]) -> Result<Comparison, CliError> {
    if results.len() < 2 {
        return Err(CliError::Config(format!("a report needs at least 2 scenarios, got {}", results.len())));
    }
    let first = &results[0].config;
    for r in &results[1..] {
        let c = &r.config;
        if c.model != first.model {
            return Err(CliError::Config(format!("scenario '{}' uses a different model than '{}'", c.id, first.id)));
        }
        if c.lambda_grid != first.lambda_grid || c.time_grid != first.time_grid {
            return Err(CliError::Config(format!("grid mismatch between '{}' and '{}'", first.id, c.id)));
        }
    }
    let mut sorted: Vec<&ScenarioResult> = results.iter().collect();
    sorted.sort_by_key(|r| (rank(r.config.engine), r.config.order));
    let columns = sorted
        .into_iter()
        .map(|r| Column {
            label: format!("{} N={}", r.config.engine.name(), r.config.order),
            scenario_id: r.config.id.clone(),
            engine: r.config.engine.name(),
            order: r.config.order,
            errors: r.summary.window_errors.clone(),
            slope: r.summary.slope.as_ref().map(|s| s.value),
            flags: r.summary.flags.clone(),
        })
        .collect();
    Ok(Comparison {
        schema_version: SCHEMA_VERSION,
        lambda_grid: first.lambda_grid.clone(),
        time_grid: first.time_grid.clone(),
        columns,
    })
}

pub fn markdown(c: &Comparison) -> String {
    let mut out = String::from("# Propagator error comparison\n\n");
    out.push_str("Largest Frobenius error against the numerical propagator over the time grid.\n\n");
    out.push_str("| lambda |");
    for col in &c.columns {
        out.push_str(&format!(" {} |", col.label));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(c.columns.len()));
    out.push('\n');
    for (i, l) in c.lambda_grid.iter().enumerate() {
        out.push_str(&format!("| {l} |"));
        for col in &c.columns {
            out.push_str(&format!(" {:.3e} |", col.errors[i]));
        }
        out.push('\n');
    }
    out.push_str("| slope |");
    for col in &c.columns {
        match col.slope {
            Some(s) => out.push_str(&format!(" {s:.2} |")),
            None => out.push_str(" - |"),
        }
    }
    out.push('\n');
    let flagged: Vec<String> = c
        .columns
        .iter()
        .filter(|col| !col.flags.is_empty())
        .map(|col| format!("- {}: {}", col.label, col.flags.join(", ")))
        .collect();
    if !flagged.is_empty() {
        out.push_str("\nFlags:\n\n");
        out.push_str(&flagged.join("\n"));
        out.push('\n');
    }
    out
}

pub fn json(c: &Comparison) -> String {
    serde_json::to_string_pretty(c).expect("comparison serialises") + "\n"
}
