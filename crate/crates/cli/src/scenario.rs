//! Scenario execution: engine propagators against the numerical oracle on a
//! (λ, t) grid.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use unipert::expansion_td::{
    interaction_factor, magnus_mode, solve_td_gauged, solve_td_mean, verify_effective_hamiltonian, ConstantChoice,
    TDSolution,
};
use unipert::expansion_ti::{evolution_ti, solve_ti, TISolution};
use unipert::linalg::{hermitian_exponential, re, unitarity_defect};
use unipert::models::{rotating_frame, rwa_effective, unit_drive, Resonance, RESONANCE_TOL};
use unipert::oracle::{dyson_truncation, error_scaling_fit, integrate_at};
use unipert::{Operator, TrigPoly};

use crate::config::{matrix, matrix_spec, periodic_chain, Engine, ModelConfig, ScenarioConfig};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "scenario_id,engine,N,lambda,t,error_vs_oracle,unitarity_defect,commutation_residual,runtime_ms";

/// Flag attached to RWA runs whose error does not fall faster than first order.
pub const FIRST_ORDER_DEFICIENT: &str = "first-order-deficient";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Seed for the randomised verification times.
    pub seed: u64,
    /// Record wall-clock time per grid point (makes the CSV non-reproducible).
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub lambda: f64,
    pub t: f64,
    pub error_vs_oracle: f64,
    pub unitarity_defect: f64,
    pub commutation_residual: Option<f64>,
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Slope {
    pub value: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario_id: String,
    pub engine: &'static str,
    pub order: usize,
    pub dim: usize,
    pub lambda_grid: Vec<f64>,
    pub time_grid: Vec<f64>,
    /// Largest error over the time grid, per λ.
    pub window_errors: Vec<f64>,
    /// Log-log fit of `window_errors` over the positive λ values.
    pub slope: Option<Slope>,
    pub max_unitarity_defect: f64,
    pub flags: Vec<String>,
    pub checks: Vec<Check>,
    pub seed: u64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Solved engine, ready to produce a propagator at any (λ, t).
enum Prepared {
    /// Static model, compared in the laboratory frame.
    StaticTi { h0: Operator, h_list: Vec<Operator>, sol: TISolution },
    /// Rotating-frame expansion of the ion trap, compared in the interaction picture.
    FrameTi { h0: Operator, sol: TISolution, chain: Vec<TrigPoly> },
    Td { sol: TDSolution, chain: Vec<TrigPoly> },
    Rwa { unit: Operator, chain: Vec<TrigPoly> },
    Dyson { order: usize, chain: Vec<TrigPoly> },
}

fn model_error(e: unipert::Error) -> CliError {
    CliError::Model(e)
}

fn invalid(e: String) -> CliError {
    CliError::Config(e)
}

fn gauges(cfg: &ScenarioConfig) -> Result<Vec<Operator>, CliError> {
    let Some(list) = &cfg.gauge else { return Ok(Vec::new()) };
    list.iter().enumerate().map(|(i, g)| matrix(g, &format!("gauge[{i}]")).map_err(invalid)).collect()
}

fn prepare(cfg: &ScenarioConfig) -> Result<Prepared, CliError> {
    let n = cfg.order;
    let gauge = gauges(cfg)?;
    let chain = match &cfg.model {
        ModelConfig::Static { h0, h } => {
            let h0 = matrix(h0, "h0").map_err(invalid)?;
            let h_list = h.iter().map(|x| matrix(x, "h")).collect::<Result<Vec<_>, _>>().map_err(invalid)?;
            let g = (!gauge.is_empty()).then_some(gauge.as_slice());
            let sol = solve_ti(&h0, &h_list, n, g).map_err(model_error)?;
            return Ok(Prepared::StaticTi { h0, h_list, sol });
        }
        ModelConfig::IonTrap(m) => vec![unit_drive(&m.params(), m.form()).map_err(model_error)?],
        ModelConfig::Periodic { frequencies, drive } => periodic_chain(frequencies, drive).map_err(invalid)?,
    };
    let td = |sol| Ok(Prepared::Td { sol, chain: chain.clone() });
    match cfg.engine {
        Engine::Ti => {
            let ModelConfig::IonTrap(m) = &cfg.model else { unreachable!("validated") };
            let (h0, _) = rotating_frame(&m.params()).map_err(model_error)?;
            // H̃₁(t) = e^{i𝔥₀t} 𝔥₁ e^{-i𝔥₀t}, so the rotating-frame perturbation is H̃₁(0).
            let h1 = chain[0].evaluate(0.0);
            let g = (!gauge.is_empty()).then_some(gauge.as_slice());
            let sol = solve_ti(&h0, &[h1], n, g).map_err(model_error)?;
            Ok(Prepared::FrameTi { h0, sol, chain })
        }
        Engine::TdMean => td(solve_td_mean(&chain, n).map_err(model_error)?),
        Engine::TdGauged => td(solve_td_gauged(&chain, n, &gauge, &ConstantChoice::Mean).map_err(model_error)?),
        Engine::FloquetMagnus => td(solve_td_gauged(&chain, n, &[], &ConstantChoice::Mean).map_err(model_error)?),
        Engine::Magnus => td(magnus_mode(&chain, n).map_err(model_error)?),
        Engine::Rwa => {
            let ModelConfig::IonTrap(m) = &cfg.model else { unreachable!("validated") };
            let p = m.params();
            let delta = p.delta();
            let resonance = [Resonance::Carrier, Resonance::Red, Resonance::Blue]
                .into_iter()
                .find(|r| (delta - r.detuning(p.nu)).abs() <= RESONANCE_TOL * p.nu)
                .ok_or(unipert::Error::OffResonance { delta, nu: p.nu })
                .map_err(model_error)?;
            let unit = rwa_effective(&p.clone().with_lambda(1.0), resonance).map_err(model_error)?;
            Ok(Prepared::Rwa { unit, chain })
        }
        Engine::Dyson => Ok(Prepared::Dyson { order: n, chain }),
    }
}

fn drive_sum(chain: &[TrigPoly], lambda: f64) -> Result<TrigPoly, CliError> {
    let mut total = TrigPoly::zero(chain[0].basis().clone(), chain[0].dim());
    let mut lp = 1.0;
    for h in chain {
        lp *= lambda;
        total = TrigPoly::combine(re(1.0), &total, re(lp), h).map_err(model_error)?;
    }
    Ok(total)
}

impl Prepared {
    fn dim(&self) -> usize {
        match self {
            Prepared::StaticTi { h0, .. } | Prepared::FrameTi { h0, .. } => h0.dim(),
            Prepared::Td { chain, .. } | Prepared::Rwa { chain, .. } | Prepared::Dyson { chain, .. } => {
                chain[0].dim()
            }
        }
    }

    /// `|H(λ=0)|_F` of the propagated Hamiltonian; zero in the interaction picture.
    fn free_norm(&self) -> f64 {
        match self {
            Prepared::StaticTi { h0, .. } => h0.norm(),
            _ => 0.0,
        }
    }

    fn oracle(&self, lambda: f64, times: &[f64], rel_tol: f64) -> Result<Vec<Operator>, CliError> {
        let trace = match self {
            Prepared::StaticTi { h0, h_list, .. } => {
                let mut h = h0.clone();
                let mut lp = 1.0;
                for x in h_list {
                    lp *= lambda;
                    h.axpy(re(lp), x);
                }
                integrate_at(&h, times, rel_tol)
            }
            Prepared::FrameTi { chain, .. }
            | Prepared::Td { chain, .. }
            | Prepared::Rwa { chain, .. }
            | Prepared::Dyson { chain, .. } => integrate_at(&drive_sum(chain, lambda)?, times, rel_tol),
        }
        .map_err(model_error)?;
        Ok(trace.u_values[1..].to_vec())
    }

    fn propagator(&self, lambda: f64, t: f64) -> unipert::Result<Operator> {
        match self {
            Prepared::StaticTi { sol, .. } => evolution_ti(sol, lambda, t),
            Prepared::FrameTi { h0, sol, .. } => Ok(&hermitian_exponential(h0, -t)? * &evolution_ti(sol, lambda, t)?),
            Prepared::Td { sol, .. } => interaction_factor(sol, lambda, t),
            Prepared::Rwa { unit, .. } => hermitian_exponential(unit, lambda * t),
            Prepared::Dyson { order, chain } => dyson_truncation(chain, lambda, *order, t),
        }
    }

    /// `|[C_[N](λ), H₀]| / (|C_[N](λ)| |H₀|)` for the time-independent engines.
    fn commutation(&self, lambda: f64) -> Option<f64> {
        match self {
            Prepared::StaticTi { sol, .. } | Prepared::FrameTi { sol, .. } => {
                let scale = sol.c_total(lambda).norm() * sol.h0.norm();
                Some(if scale > 0.0 { sol.commutation_residual(lambda) / scale } else { 0.0 })
            }
            _ => None,
        }
    }
}

/// Runs one scenario on the current rayon pool.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioResult, CliError> {
    cfg.validate().map_err(invalid)?;
    let prepared = prepare(cfg)?;
    let tol = &cfg.tolerances;

    let per_lambda: Vec<Vec<Row>> = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| -> Result<Vec<Row>, CliError> {
            let exact = prepared.oracle(lambda, &cfg.time_grid, tol.oracle_rel_tol)?;
            let commutation = prepared.commutation(lambda);
            cfg.time_grid
                .iter()
                .zip(&exact)
                .map(|(&t, u)| {
                    let start = Instant::now();
                    let v = prepared.propagator(lambda, t).map_err(model_error)?;
                    let runtime_ms = opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
                    Ok(Row {
                        lambda,
                        t,
                        error_vs_oracle: v.distance(u),
                        unitarity_defect: unitarity_defect(&v),
                        commutation_residual: commutation,
                        runtime_ms,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Row> = per_lambda.into_iter().flatten().collect();
    let summary = summarize(cfg, &prepared, &rows, opts)?;
    Ok(ScenarioResult { config: cfg.clone(), rows, summary })
}

fn summarize(cfg: &ScenarioConfig, prepared: &Prepared, rows: &[Row], opts: &RunOptions) -> Result<Summary, CliError> {
    let tol = &cfg.tolerances;
    let n = cfg.order;
    let dim = prepared.dim();
    let window_errors: Vec<f64> = cfg
        .lambda_grid
        .iter()
        .map(|&l| rows.iter().filter(|r| r.lambda == l).map(|r| r.error_vs_oracle).fold(0.0, f64::max))
        .collect();
    let (lambdas, errors): (Vec<f64>, Vec<f64>) =
        cfg.lambda_grid.iter().zip(&window_errors).filter(|(l, _)| **l > 0.0).map(|(l, e)| (*l, *e)).unzip();
    let slope = error_scaling_fit(&lambdas, &errors).ok().map(|(value, r2)| Slope { value, r2 });
    let max_defect = rows.iter().map(|r| r.unitarity_defect).fold(0.0, f64::max);

    let mut flags = Vec::new();
    let mut checks = Vec::new();
    let mut check = |name: &str, pass: bool, value: f64, threshold: f64| {
        checks.push(Check { name: name.into(), pass, value, threshold });
    };

    if cfg.engine == Engine::Dyson {
        flags.push("non-unitary".to_string());
    } else {
        let bound = tol.unitarity_per_dim * dim as f64;
        check("unitarity", max_defect <= bound, max_defect, bound);
    }
    let slope_value = slope.as_ref().map(|s| s.value).unwrap_or(f64::NAN);
    if cfg.engine == Engine::Rwa {
        if slope_value < 1.0 + tol.slope_margin {
            flags.push(FIRST_ORDER_DEFICIENT.to_string());
        }
        check(FIRST_ORDER_DEFICIENT, slope_value <= tol.rwa_max_slope, slope_value, tol.rwa_max_slope);
    } else {
        let need = n as f64 + tol.slope_margin;
        check("order", slope_value >= need, slope_value, need);
    }
    let comm = rows.iter().filter_map(|r| r.commutation_residual).fold(f64::NEG_INFINITY, f64::max);
    if comm.is_finite() {
        check("commutation", comm <= tol.commutation, comm, tol.commutation);
    }
    // The oracle's global error grows like rel_tol·|H(0)|·t, so λ = 0 rows are scaled by that.
    let h_free = prepared.free_norm();
    let zero_rows: Vec<f64> = rows
        .iter()
        .filter(|r| r.lambda == 0.0)
        .map(|r| r.error_vs_oracle / (h_free * r.t).max(1.0))
        .collect();
    if !zero_rows.is_empty() {
        let worst = zero_rows.iter().cloned().fold(0.0, f64::max);
        check("zero-coupling", worst <= tol.oracle_rel_tol, worst, tol.oracle_rel_tol);
    }

    match prepared {
        Prepared::StaticTi { sol, .. } | Prepared::FrameTi { sol, .. } => {
            let worst = sol.recursion_residuals().map_err(model_error)?.into_iter().fold(0.0, f64::max);
            check("recursion", worst <= tol.verify, worst, tol.verify);
        }
        Prepared::Td { sol, chain } => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let t_max = cfg.time_grid.last().copied().unwrap_or(0.0).max(1.0);
            let times: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..t_max)).collect();
            let mut worst: f64 = 0.0;
            for &l in &cfg.lambda_grid {
                worst = worst.max(verify_effective_hamiltonian(sol, l, chain, &times).map_err(model_error)?);
            }
            check("effective-hamiltonian", worst <= tol.verify, worst, tol.verify);
        }
        _ => {}
    }

    Ok(Summary {
        schema_version: SCHEMA_VERSION,
        scenario_id: cfg.id.clone(),
        engine: cfg.engine.name(),
        order: n,
        dim,
        lambda_grid: cfg.lambda_grid.clone(),
        time_grid: cfg.time_grid.clone(),
        window_errors,
        slope,
        max_unitarity_defect: max_defect,
        flags,
        checks,
        seed: opts.seed,
    })
}

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_text(result: &ScenarioResult) -> String {
    let cfg = &result.config;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let fields = [
            cfg.id.clone(),
            cfg.engine.name().to_string(),
            cfg.order.to_string(),
            fmt_float(r.lambda),
            fmt_float(r.t),
            fmt_float(r.error_vs_oracle),
            fmt_float(r.unitarity_defect),
            r.commutation_residual.map(fmt_float).unwrap_or_default(),
            r.runtime_ms.map(fmt_float).unwrap_or_default(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_json(result: &ScenarioResult) -> String {
    serde_json::to_string_pretty(&result.summary).expect("summary serialises") + "\n"
}

/// Solved generators of the scenario's engine, as JSON.
pub fn generators_json(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let value = match prepare(cfg)? {
        Prepared::StaticTi { sol, .. } | Prepared::FrameTi { sol, .. } => serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "engine": cfg.engine.name(),
            "order": sol.order,
            "c": sol.c_list.iter().map(matrix_spec).collect::<Vec<_>>(),
            "z": sol.z_list.iter().map(matrix_spec).collect::<Vec<_>>(),
        }),
        Prepared::Td { sol, .. } => {
            let c_terms: Vec<Vec<serde_json::Value>> = sol
                .c_list
                .iter()
                .map(|c| {
                    c.terms()
                        .map(|(k, p, a)| serde_json::json!({ "k": k.coeffs(), "power": p, "matrix": matrix_spec(a) }))
                        .collect()
                })
                .collect();
            let z: Vec<Vec<serde_json::Value>> = sol
                .z_list
                .iter()
                .map(|z| z.terms().map(|(k, a)| serde_json::json!({ "k": k.coeffs(), "matrix": matrix_spec(a) })).collect())
                .collect();
            serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "engine": cfg.engine.name(),
                "mode": sol.mode.name(),
                "order": sol.order,
                "frequencies": sol.basis.frequencies(),
                "c": c_terms,
                "z": z,
            })
        }
        _ => {
            return Err(CliError::Config(format!("engine '{}' has no generators to export", cfg.engine.name())));
        }
    };
    Ok(serde_json::to_string_pretty(&value).expect("generators serialise") + "\n")
}
