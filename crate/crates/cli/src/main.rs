use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unipert_cli::config::{load_scenarios, Engine, IonTrapConfig, ScenarioConfig};
use unipert_cli::report::{compare_report, json, markdown};
use unipert_cli::scenario::{generators_json, run_scenario, RunOptions, ScenarioResult};
use unipert_cli::{demo_scenarios, failed_checks, write_file, write_result, CliError};

#[derive(Parser)]
#[command(name = "unipert", version, about = "Unitary perturbative propagators against a numerical oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = "unipert-out")]
    out: PathBuf,
    /// Worker threads for the (λ, t) grid; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomised verification times.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exit with status 3 if any check fails.
    #[arg(long, global = true)]
    check: bool,
    /// Fill the runtime_ms column (output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time-independent expansion; also writes the generators.
    TiSolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time-dependent expansion (td-mean, td-gauged, magnus, floquet-magnus); also writes the generators.
    TdSolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Built-in ion-trap comparison with a report.
    IontrapDemo {
        /// Ion-trap model overrides (JSON object).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every scenario in a config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Comparison tables for scenarios sharing a model and grids.
    Report {
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
    },
}

fn run_all(scenarios: &[ScenarioConfig], common: &Common) -> Result<Vec<ScenarioResult>, CliError> {
    let opts = RunOptions { seed: common.seed, timing: common.timing };
    let mut results = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        log::info!("running scenario '{}' ({} N={})", s.id, s.engine.name(), s.order);
        let r = run_scenario(s, &opts)?;
        write_result(&common.out, &r)?;
        results.push(r);
    }
    Ok(results)
}

fn require_engines(scenarios: &[ScenarioConfig], ok: impl Fn(Engine) -> bool, what: &str) -> Result<(), CliError> {
    match scenarios.iter().find(|s| !ok(s.engine)) {
        Some(s) => Err(CliError::Config(format!("scenario '{}': engine '{}' is not {what}", s.id, s.engine.name()))),
        None => Ok(()),
    }
}

fn solve(path: &Path, common: &Common, ok: impl Fn(Engine) -> bool, what: &str) -> Result<Vec<ScenarioResult>, CliError> {
    let scenarios = load_scenarios(path)?;
    require_engines(&scenarios, ok, what)?;
    for s in &scenarios {
        write_file(&common.out.join(format!("{}.generators.json", s.stem())), &generators_json(s)?)?;
    }
    run_all(&scenarios, common)
}

fn write_report(results: &[ScenarioResult], out: &Path) -> Result<(), CliError> {
    let cmp = compare_report(results)?;
    write_file(&out.join("report.md"), &markdown(&cmp))?;
    write_file(&out.join("report.json"), &json(&cmp))
}

fn execute(cli: &Cli) -> Result<Vec<ScenarioResult>, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::TiSolve { config } => solve(config, common, |e| e == Engine::Ti, "time independent"),
        Command::TdSolve { config } => solve(config, common, Engine::is_time_dependent, "a time-dependent expansion"),
        Command::IontrapDemo { config } => {
            let model = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    serde_json::from_str::<IonTrapConfig>(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                }
                None => IonTrapConfig::default(),
            };
            let results = run_all(&demo_scenarios(model), common)?;
            write_report(&results, &common.out)?;
            Ok(results)
        }
        Command::Sweep { config } => run_all(&load_scenarios(config)?, common),
        Command::Report { config } => {
            let mut scenarios = Vec::new();
            for path in config {
                scenarios.extend(load_scenarios(path)?);
            }
            let results = run_all(&scenarios, common)?;
            write_report(&results, &common.out)?;
            Ok(results)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = pool.install(|| execute(&cli)).and_then(|results| {
        for r in &results {
            let status = if r.summary.passed() { "ok" } else { "check failed" };
            let slope = r.summary.slope.as_ref().map(|s| format!("{:.2}", s.value)).unwrap_or_else(|| "-".into());
            println!("{}: {} N={} slope {slope} [{status}]", r.config.id, r.config.engine.name(), r.config.order);
        }
        let failed = failed_checks(&results);
        if cli.common.check && !failed.is_empty() {
            return Err(CliError::CheckFailed(failed));
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
