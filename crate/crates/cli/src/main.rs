//! `sim`: run scenarios, sweeps, cost reports and mobility traces.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
//! run or an output write fails.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use vcsim_core::costmodel::{self, CostInputs};
use vcsim_core::experiments::{parse_values, write_sweep_csv, SweepError};
use vcsim_core::metrics::write_records_csv;
use vcsim_core::mobility::{mobility_trace, write_trace_csv};
use vcsim_core::{run_scenario_full, sweep, ConfigError, SimConfig, Strategy, SweepAxis, SweepPlan};

const OUT_DIR_ENV: &str = "VCSIM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sim", version, about = "Cloud / edge / vehicular-cloud offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one seeded scenario and write its summary as JSON.
    Scenario(ScenarioArgs),
    /// Sweep one parameter and write one CSV row per run.
    Sweep(SweepArgs),
    /// Pay-per-request versus edge capex break-even.
    Cost(CostArgs),
    /// Sample vehicle positions and write them as CSV.
    Trace(TraceArgs),
}

/// Options shared by every command that builds a [`SimConfig`].
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Flat `key = value` file; keys are config field names.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a single field, e.g. `--set beacon_hz=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    users: Option<u32>,
    #[arg(long)]
    vehicles: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Summary JSON path; `-` for stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the per-task records as CSV.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyChoice {
    Both,
    Ecfirst,
    Vccfirst,
}

impl StrategyChoice {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyChoice::Both => Strategy::BOTH.to_vec(),
            StrategyChoice::Ecfirst => vec![Strategy::EcFirst],
            StrategyChoice::Vccfirst => vec![Strategy::VccFirst],
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// users, vehicles, vcc_mips, workload_mi or speed_kmh.
    #[arg(long)]
    axis: String,
    /// `a:b`, `a:b:step` or `v1,v2,...`.
    #[arg(long)]
    values: String,
    #[arg(long, value_enum, default_value = "both")]
    strategy: StrategyChoice,
    /// Seeds per point: seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// CSV path; `-` for stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Dollars per offloaded request.
    #[arg(long, default_value_t = 2e-5)]
    price: f64,
    /// Requests per second.
    #[arg(long, default_value_t = 40.0)]
    rate: f64,
    /// Edge equipment cost in dollars.
    #[arg(long, default_value_t = 1000.0)]
    capex: f64,
    /// Also report the spend over this many seconds.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Sampling interval in seconds.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// CSV path; `-` for stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Sweep(_) => 1,
            CliError::Io { .. } | CliError::Csv(_) => 2,
        }
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

impl ConfigArgs {
    /// Defaults, then the file, then `--set`, then the dedicated flags.
    fn build(&self) -> Result<SimConfig, CliError> {
        let mut cfg = SimConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_kv(&text)?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v)?;
        }
        if let Some(n) = self.users {
            cfg.n_users = n;
        }
        if let Some(n) = self.vehicles {
            cfg.n_vehicles = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.duration {
            cfg.duration_s = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Where an output goes: an explicit path, `-` for stdout, otherwise
/// `default_name` under `$VCSIM_OUT_DIR`, otherwise stdout.
fn destination(out: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p.clone()),
        None => std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(default_name)),
    }
}

fn open(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            Ok(Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)))
        }
    }
}

/// Writes the effective config next to a CSV output as `<file>.config`.
fn write_sidecar(csv_path: &Option<PathBuf>, header: &str, cfg: &SimConfig) -> Result<(), CliError> {
    let Some(p) = csv_path else { return Ok(()) };
    let mut name = p.as_os_str().to_owned();
    name.push(".config");
    let side = PathBuf::from(name);
    let text = format!("{header}{}", cfg.to_kv());
    fs::write(&side, text).map_err(io_err(&side))
}

#[derive(Serialize)]
struct ScenarioJson<'a> {
    config: &'a SimConfig,
    summary: &'a vcsim_core::RunSummary,
}

fn scenario(args: &ScenarioArgs) -> Result<(), CliError> {
    let mut cfg = args.cfg.build()?;
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    let out = run_scenario_full(&cfg)?;
    let doc = ScenarioJson { config: &out.config, summary: &out.summary };
    let name = format!("scenario-{}-seed{}.json", cfg.strategy, cfg.seed);
    let path = destination(&args.out, &name);
    let mut w = open(&path)?;
    let shown = path.as_deref().unwrap_or(Path::new("<stdout>"));
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Io {
        path: shown.display().to_string(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(shown))?;
    if let Some(records) = &args.records {
        let records_path = Some(records.clone());
        let f = open(&records_path)?;
        write_records_csv(&out.records, f).map_err(|e| CliError::Csv(e.to_string()))?;
        write_sidecar(&records_path, "", &cfg)?;
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let base = args.cfg.build()?;
    let axis: SweepAxis = args.axis.parse()?;
    let values = parse_values(&args.values)?;
    let plan = SweepPlan::new(axis, values, base.clone())
        .strategies(&args.strategy.strategies())
        .repeats(args.repeats);
    let rows = sweep(&plan)?;
    let path = destination(&args.out, &format!("sweep-{axis}.csv"));
    write_sweep_csv(&rows, open(&path)?).map_err(|e| CliError::Csv(e.to_string()))?;
    let header = format!(
        "# sweep axis = {axis}; values = {}; strategies = {}; repeats = {}\n",
        args.values,
        plan.strategies.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
        args.repeats
    );
    write_sidecar(&path, &header, &base)
}

fn cost(args: &CostArgs) -> Result<(), CliError> {
    let inputs = CostInputs {
        price_per_request_usd: args.price,
        request_rate_per_s: args.rate,
        edge_capex_usd: args.capex,
        horizon_s: args.horizon,
    };
    if !inputs.is_valid() || args.horizon.is_some_and(|h| !(h >= 0.0)) {
        return Err(CliError::Usage(
            "price and rate must be >= 0, capex > 0, horizon >= 0".into(),
        ));
    }
    let report = costmodel::report(&inputs);
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    let path = args.out.as_ref().filter(|p| p.as_os_str() != "-").cloned();
    let mut w = open(&path)?;
    let shown = path.as_deref().unwrap_or(Path::new("<stdout>"));
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_err(shown))
}

fn trace(args: &TraceArgs) -> Result<(), CliError> {
    let cfg = args.cfg.build()?;
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Usage("--dt must be > 0".into()));
    }
    let rows = mobility_trace(&cfg, args.dt);
    let path = destination(&args.out, &format!("trace-seed{}.csv", cfg.seed));
    write_trace_csv(&rows, open(&path)?).map_err(|e| CliError::Csv(e.to_string()))?;
    write_sidecar(&path, &format!("# trace dt = {}\n", args.dt), &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Scenario(a) => scenario(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Cost(a) => cost(a),
        Command::Trace(a) => trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
