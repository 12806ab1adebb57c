mod overrides;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use essim_core::sweep::{Grid, SweepOptions};
use essim_core::{sim, validate, Clock, EnvironmentConfig, RunMetrics, Scenario, SweepSpec, World};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "essim", version, about = "Single-node electricity market simulator with storage agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its hourly trace.
    Run(RunArgs),
    /// Run every scenario of a grid and score them.
    Sweep(SweepArgs),
    /// Compare simulated monthly prices with a reference series.
    Validate(ValidateArgs),
    /// Write default run, sweep and grid files to the output directory.
    EmitDefaults(OutArgs),
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, env = "ESSIM_OUT", default_value = "essim-out")]
    out: PathBuf,
}

#[derive(Args)]
struct Common {
    /// JSON config file; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted override, e.g. `--set scenario.ess_roundtrip_eff_pct=70`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon_years: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Grid JSON file, or `default` / `desk` for the built-in grids.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    reps: Option<u32>,
    /// Skip runs already recorded in the output directory's journal.
    #[arg(long)]
    resume: bool,
    /// Print the plan and exit without running anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// `month_index,value` CSV of observed prices.
    #[arg(long)]
    reference: PathBuf,
}

/// One fully specified simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    scenario: Scenario,
    #[serde(default)]
    env: EnvironmentConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_run_years")]
    horizon_years: u32,
}

fn default_run_years() -> u32 {
    20
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            env: EnvironmentConfig::default(),
            seed: 0,
            horizon_years: default_run_years(),
        }
    }
}

/// Bad input from the user: reported with exit code 2.
#[derive(Debug)]
struct UserError(String);

impl fmt::Display for UserError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

fn user(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| user(format!("{}: {e}", path.display())))
}

/// File < overrides. The file is parsed into `T` first so missing fields are
/// defaulted and unknown ones rejected, then overrides edit the full tree.
fn load<T: Serialize + DeserializeOwned + Default>(path: Option<&Path>, sets: &[String]) -> Result<T> {
    let base: T = match path {
        Some(p) => serde_json::from_value(read_json(p)?).map_err(|e| user(format!("{}: {e}", p.display())))?,
        None => T::default(),
    };
    let mut tree = serde_json::to_value(&base)?;
    for s in sets {
        overrides::apply(&mut tree, s).map_err(user)?;
    }
    serde_json::from_value(tree).map_err(|e| user(format!("override: {e}")))
}

fn rebase_series(env: &mut EnvironmentConfig, config: Option<&Path>) {
    if let Some(dir) = config.and_then(Path::parent) {
        env.time_series.rebase(dir);
    }
}

fn load_run(c: &Common) -> Result<RunConfig> {
    let mut cfg: RunConfig = load(c.config.as_deref(), &c.overrides)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(y) = c.horizon_years {
        cfg.horizon_years = y;
    }
    if cfg.horizon_years == 0 {
        return Err(user("invalid configuration at `horizon_years`: must be at least 1"));
    }
    rebase_series(&mut cfg.env, c.config.as_deref());
    Ok(cfg)
}

fn simulate(cfg: &RunConfig) -> Result<sim::RunRecord> {
    let mut world = World::build(cfg.scenario, Arc::new(cfg.env.clone()), Clock::with_years(cfg.horizon_years), cfg.seed)?;
    Ok(sim::run(&mut world)?)
}

fn out_dir(o: &OutArgs) -> Result<&Path> {
    fs::create_dir_all(&o.out).with_context(|| format!("creating {}", o.out.display()))?;
    Ok(&o.out)
}

fn na(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.digits$}"))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = load_run(&args.common)?;
    let record = simulate(&cfg)?;
    let dir = out_dir(&args.common.out)?;
    let trace = dir.join("trace.csv");
    sim::write_trace_file(&record, &trace)?;
    let m = RunMetrics::from_record(&record, 0, 0);
    println!(
        "seed={} npv={} price={} blackout_hours={} co2_t={:.1} no_trade_ticks={} trace={}",
        m.seed,
        na(m.run_npv_eur, 2),
        na(m.run_price_eur_per_mwh, 4),
        m.run_blackout_hours,
        m.run_emission_tco2,
        m.no_trade_ticks,
        trace.display()
    );
    Ok(())
}

fn load_grid(arg: &str) -> Result<Grid> {
    match arg {
        "default" => Ok(Grid::default()),
        "desk" => Ok(Grid::desk()),
        path => {
            let p = Path::new(path);
            serde_json::from_value(read_json(p)?).map_err(|e| user(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let c = &args.common;
    let mut spec: SweepSpec = load(c.config.as_deref(), &c.overrides)?;
    rebase_series(&mut spec.env, c.config.as_deref());
    if let Some(g) = &args.grid {
        spec.grid = load_grid(g)?;
    }
    if let Some(s) = c.seed {
        spec.base_seed = s;
    }
    if let Some(y) = c.horizon_years {
        spec.horizon_years = y;
    }
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    if let Some(r) = args.reps {
        spec.replications = r;
    }
    spec.validate()?;
    let plan = spec.plan();
    if args.dry_run {
        println!("scenarios={} runs={} fingerprint={}", plan.scenarios, plan.pairs, spec.fingerprint());
        return Ok(());
    }

    let dir = out_dir(&c.out)?;
    let step = (plan.pairs / 100).max(1);
    let mut progress = |done: usize, total: usize| {
        if done.is_multiple_of(step) || done == total {
            eprint!("\r{done}/{total} runs");
            let _ = std::io::stderr().flush();
        }
    };
    let out = essim_core::run_sweep(
        &spec,
        dir,
        SweepOptions {
            resume: args.resume,
            progress: Some(&mut progress),
        },
    )?;
    eprintln!();
    println!(
        "scenarios={} runs={} executed={} threshold={} out={}",
        plan.scenarios,
        plan.pairs,
        out.executed,
        na(out.table.profitability_threshold.map(|t| t.value), 2),
        dir.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let cfg = load_run(&args.common)?;
    let reference = validate::load_reference(&args.reference)?;
    let record = simulate(&cfg)?;
    let report = validate::compare(&validate::simulated_prices(&record), &reference)?;
    let dir = out_dir(&args.common.out)?;
    let path = dir.join("validation.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    validate::write_report(&report, file)?;
    validate::write_report(&report, std::io::stdout())?;
    Ok(())
}

fn write_pretty(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_emit_defaults(args: OutArgs) -> Result<()> {
    let dir = out_dir(&args)?;
    write_pretty(&dir.join("run.json"), &RunConfig::default())?;
    write_pretty(&dir.join("sweep.json"), &SweepSpec::default())?;
    write_pretty(&dir.join("default-grid.json"), &Grid::default())?;
    write_pretty(&dir.join("default-desk.json"), &Grid::desk())?;
    println!("wrote run.json sweep.json default-grid.json default-desk.json to {}", dir.display());
    Ok(())
}

fn is_user_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UserError>() || c.downcast_ref::<essim_core::Error>().is_some_and(essim_core::Error::is_user_error)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
        Command::EmitDefaults(a) => cmd_emit_defaults(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_user_error(&e) { 2 } else { 1 })
        }
    }
}
