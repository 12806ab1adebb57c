//! Full-factorial scenario sweeps over a worker pool, with a resumable
//! journal of completed runs.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};

use serde::{Deserialize, Serialize};

use crate::clock::{Clock, DEFAULT_HORIZON_YEARS};
use crate::config::EnvironmentConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    normalize_scores, scenario_aggregate, write_runs_csv, write_scenarios_csv, write_scores_csv, GoalWeights,
    RunMetrics, ScenarioMetrics, ScoreTable,
};
use crate::scenario::{BusinessModel, Scenario};
use crate::seed::run_seed;
use crate::sim;
use crate::world::World;

/// Values of every scenario axis, in axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub business_model: Vec<BusinessModel>,
    pub ess_desirability_pct: Vec<f64>,
    pub grid_ess_capacity_mw: Vec<f64>,
    pub max_ess_energy_rating_mwh: Vec<f64>,
    pub ess_power_capex_keur_per_mw: Vec<f64>,
    pub ess_energy_capex_keur_per_mwh: Vec<f64>,
    pub ess_roundtrip_eff_pct: Vec<f64>,
    pub res_growth_pct_per_y: Vec<f64>,
    pub nonres_growth_pct_per_y: Vec<f64>,
    pub co2_price_growth_pct_per_y: Vec<f64>,
    pub demand_growth_pct_per_y: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            business_model: vec![BusinessModel::WholesaleArbitrage, BusinessModel::ReserveCapacity],
            ess_desirability_pct: vec![0.0, 50.0, 100.0],
            grid_ess_capacity_mw: vec![10.0, 1000.0],
            max_ess_energy_rating_mwh: vec![10.0, 1000.0],
            ess_power_capex_keur_per_mw: vec![1.0, 100.0],
            ess_energy_capex_keur_per_mwh: vec![1.0, 100.0],
            ess_roundtrip_eff_pct: vec![70.0, 85.0, 100.0],
            res_growth_pct_per_y: vec![0.0, 25.0],
            nonres_growth_pct_per_y: vec![-10.0, 0.0, 10.0],
            co2_price_growth_pct_per_y: vec![0.0, 10.0],
            demand_growth_pct_per_y: vec![0.0, 2.0, 4.0],
        }
    }
}

impl Grid {
    /// The default grid with the middle value of each three-valued axis
    /// dropped: every axis has two values, 2048 scenarios.
    pub fn desk() -> Self {
        Self {
            ess_desirability_pct: vec![0.0, 100.0],
            ess_roundtrip_eff_pct: vec![70.0, 100.0],
            nonres_growth_pct_per_y: vec![-10.0, 10.0],
            demand_growth_pct_per_y: vec![0.0, 4.0],
            ..Self::default()
        }
    }

    /// A grid holding only `s`.
    pub fn single(s: &Scenario) -> Self {
        Self {
            business_model: vec![s.business_model],
            ess_desirability_pct: vec![s.ess_desirability_pct],
            grid_ess_capacity_mw: vec![s.grid_ess_capacity_mw],
            max_ess_energy_rating_mwh: vec![s.max_ess_energy_rating_mwh],
            ess_power_capex_keur_per_mw: vec![s.ess_power_capex_keur_per_mw],
            ess_energy_capex_keur_per_mwh: vec![s.ess_energy_capex_keur_per_mwh],
            ess_roundtrip_eff_pct: vec![s.ess_roundtrip_eff_pct],
            res_growth_pct_per_y: vec![s.res_growth_pct_per_y],
            nonres_growth_pct_per_y: vec![s.nonres_growth_pct_per_y],
            co2_price_growth_pct_per_y: vec![s.co2_price_growth_pct_per_y],
            demand_growth_pct_per_y: vec![s.demand_growth_pct_per_y],
        }
    }

    fn numeric_axes(&self) -> [(&'static str, &Vec<f64>); 10] {
        [
            ("ess_desirability_pct", &self.ess_desirability_pct),
            ("grid_ess_capacity_mw", &self.grid_ess_capacity_mw),
            ("max_ess_energy_rating_mwh", &self.max_ess_energy_rating_mwh),
            ("ess_power_capex_keur_per_mw", &self.ess_power_capex_keur_per_mw),
            ("ess_energy_capex_keur_per_mwh", &self.ess_energy_capex_keur_per_mwh),
            ("ess_roundtrip_eff_pct", &self.ess_roundtrip_eff_pct),
            ("res_growth_pct_per_y", &self.res_growth_pct_per_y),
            ("nonres_growth_pct_per_y", &self.nonres_growth_pct_per_y),
            ("co2_price_growth_pct_per_y", &self.co2_price_growth_pct_per_y),
            ("demand_growth_pct_per_y", &self.demand_growth_pct_per_y),
        ]
    }

    pub fn axis_lengths(&self) -> [usize; 11] {
        let mut out = [self.business_model.len(); 11];
        for (i, (_, axis)) in self.numeric_axes().iter().enumerate() {
            out[i + 1] = axis.len();
        }
        out
    }

    pub fn scenario_count(&self) -> usize {
        self.axis_lengths().iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.business_model.is_empty() {
            return Err(Error::config("grid.business_model", "axis is empty"));
        }
        for (name, axis) in self.numeric_axes() {
            if axis.is_empty() {
                return Err(Error::config(format!("grid.{name}"), "axis is empty"));
            }
            for &v in axis {
                let mut s = Scenario::default();
                set_axis(&mut s, name, v);
                s.validate()
                    .map_err(|e| Error::config(format!("grid.{name}"), e.to_string()))?;
            }
        }
        Ok(())
    }
}

fn set_axis(s: &mut Scenario, name: &str, v: f64) {
    match name {
        "ess_desirability_pct" => s.ess_desirability_pct = v,
        "grid_ess_capacity_mw" => s.grid_ess_capacity_mw = v,
        "max_ess_energy_rating_mwh" => s.max_ess_energy_rating_mwh = v,
        "ess_power_capex_keur_per_mw" => s.ess_power_capex_keur_per_mw = v,
        "ess_energy_capex_keur_per_mwh" => s.ess_energy_capex_keur_per_mwh = v,
        "ess_roundtrip_eff_pct" => s.ess_roundtrip_eff_pct = v,
        "res_growth_pct_per_y" => s.res_growth_pct_per_y = v,
        "nonres_growth_pct_per_y" => s.nonres_growth_pct_per_y = v,
        "co2_price_growth_pct_per_y" => s.co2_price_growth_pct_per_y = v,
        "demand_growth_pct_per_y" => s.demand_growth_pct_per_y = v,
        _ => unreachable!("unknown axis {name}"),
    }
}

/// Lexicographic full factorial: the first axis varies slowest. The index
/// in the returned list is the scenario id.
pub fn enumerate_scenarios(grid: &Grid) -> Vec<Scenario> {
    let lens = grid.axis_lengths();
    let total = grid.scenario_count();
    let axes = grid.numeric_axes();
    let mut out = Vec::with_capacity(total);
    let mut digits = [0usize; 11];
    for _ in 0..total {
        let mut s = Scenario {
            business_model: grid.business_model[digits[0]],
            ..Scenario::default()
        };
        for (k, (name, axis)) in axes.iter().enumerate() {
            set_axis(&mut s, name, axis[digits[k + 1]]);
        }
        out.push(s);
        for k in (0..11).rev() {
            digits[k] += 1;
            if digits[k] < lens[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

fn default_replications() -> u32 {
    20
}

fn default_horizon() -> u32 {
    DEFAULT_HORIZON_YEARS
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_horizon")]
    pub horizon_years: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub weights: GoalWeights,
    #[serde(default)]
    pub env: EnvironmentConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            grid: Grid::default(),
            replications: default_replications(),
            horizon_years: default_horizon(),
            base_seed: 0,
            workers: default_workers(),
            weights: GoalWeights::default(),
            env: EnvironmentConfig::default(),
        }
    }
}

impl SweepSpec {
    /// The reduced grid used for desk-scale checks: 2048 scenarios, 3
    /// replications, 5 years.
    pub fn desk() -> Self {
        Self {
            grid: Grid::desk(),
            replications: 3,
            horizon_years: 5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        if self.horizon_years == 0 {
            return Err(Error::config("horizon_years", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        self.weights.validate()?;
        self.env.validate()
    }

    pub fn plan(&self) -> SweepPlan {
        let scenarios = self.grid.scenario_count();
        SweepPlan {
            scenarios,
            pairs: scenarios * self.replications as usize,
        }
    }

    /// Hash of everything that determines the results (worker count excluded).
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 0;
        let json = serde_json::to_string(&canonical).expect("spec serializes");
        format!("{:016x}", fnv1a(json.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepPlan {
    pub scenarios: usize,
    pub pairs: usize,
}

/// Execute one (scenario, replication) pair.
pub fn execute_pair(
    scenario: Scenario,
    env: Arc<EnvironmentConfig>,
    horizon_years: u32,
    base_seed: u64,
    scenario_id: u64,
    rep: u32,
) -> Result<RunMetrics> {
    let seed = run_seed(base_seed, scenario_id, rep as u64);
    let mut world = World::build(scenario, env, Clock::with_years(horizon_years), seed)?;
    let record = sim::run(&mut world)?;
    Ok(RunMetrics::from_record(&record, scenario_id, rep))
}

pub const JOURNAL_FILE: &str = "journal.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const SCENARIOS_FILE: &str = "scenarios.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const JOURNAL_MAGIC: &str = "# essim-journal v1 fingerprint=";
const MAX_ATTEMPTS: u32 = 3;

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn journal_line(m: &RunMetrics) -> String {
    format!(
        "{},{},done,{},{},{},{},{},{}\n",
        m.scenario_id,
        m.rep,
        m.seed,
        na(m.run_npv_eur),
        na(m.run_price_eur_per_mwh),
        m.run_blackout_hours,
        m.run_emission_tco2,
        m.no_trade_ticks
    )
}

fn parse_journal_line(line: &str) -> Option<RunMetrics> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 9 || f[2] != "done" {
        return None;
    }
    let opt = |s: &str| -> Option<Option<f64>> {
        if s == "NA" {
            Some(None)
        } else {
            s.parse().ok().map(Some)
        }
    };
    Some(RunMetrics {
        scenario_id: f[0].parse().ok()?,
        rep: f[1].parse().ok()?,
        seed: f[3].parse().ok()?,
        run_npv_eur: opt(f[4])?,
        run_price_eur_per_mwh: opt(f[5])?,
        run_blackout_hours: f[6].parse().ok()?,
        run_emission_tco2: f[7].parse().ok()?,
        no_trade_ticks: f[8].parse().ok()?,
    })
}

/// Completed runs recorded in a journal. A last line without its newline is
/// an interrupted write and is ignored; anything else unreadable refuses the
/// resume.
pub fn read_journal(path: &Path, fingerprint: &str, plan: SweepPlan, replications: u32) -> Result<Vec<RunMetrics>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corrupt = |reason: String| Error::Journal {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines: Vec<&str> = text.split_inclusive('\n').collect();
    if lines.last().is_some_and(|l| !l.ends_with('\n')) {
        lines.pop();
    }
    let mut it = lines.into_iter();
    let header = it.next().ok_or_else(|| corrupt("missing header".into()))?;
    let found = header
        .trim_end()
        .strip_prefix(JOURNAL_MAGIC)
        .ok_or_else(|| corrupt("bad header".into()))?;
    if found != fingerprint {
        return Err(corrupt(format!(
            "written for a different sweep spec (fingerprint {found}, expected {fingerprint})"
        )));
    }
    let mut done = BTreeMap::new();
    for (n, line) in it.enumerate() {
        let m = parse_journal_line(line.trim_end())
            .ok_or_else(|| corrupt(format!("malformed line {}", n + 2)))?;
        if m.scenario_id as usize >= plan.scenarios || m.rep >= replications {
            return Err(corrupt(format!("line {} is outside the grid", n + 2)));
        }
        if done.insert((m.scenario_id, m.rep), m).is_some() {
            return Err(corrupt(format!("duplicate pair on line {}", n + 2)));
        }
    }
    Ok(done.into_values().collect())
}

#[derive(Default)]
pub struct SweepOptions<'a> {
    pub resume: bool,
    /// Called with (completed, total) after each run finishes.
    pub progress: Option<&'a mut dyn FnMut(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub plan: SweepPlan,
    pub executed: usize,
    pub runs: Vec<RunMetrics>,
    pub scenarios: Vec<ScenarioMetrics>,
    pub table: ScoreTable,
}

#[derive(Serialize)]
struct Summary<'a> {
    fingerprint: String,
    scenarios: usize,
    runs: usize,
    executed: usize,
    weights: &'a GoalWeights,
    degenerate: &'a crate::metrics::Degenerate,
    profitability_threshold: Option<crate::metrics::Threshold>,
}

enum Message {
    Done(RunMetrics),
    Panicked { scenario_id: u64, rep: u32, attempt: u32 },
    Failed(Error),
}

struct Job {
    scenario_id: u64,
    rep: u32,
    attempt: u32,
}

/// Run every pending (scenario, replication) pair, journal each completion,
/// then write the result tables into `out_dir`.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path, mut options: SweepOptions) -> Result<SweepOutput> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let plan = spec.plan();
    let scenarios = enumerate_scenarios(&spec.grid);
    let fingerprint = spec.fingerprint();
    let journal_path = out_dir.join(JOURNAL_FILE);

    let mut done: BTreeMap<(u64, u32), RunMetrics> = BTreeMap::new();
    if options.resume && journal_path.exists() {
        for m in read_journal(&journal_path, &fingerprint, plan, spec.replications)? {
            done.insert((m.scenario_id, m.rep), m);
        }
        // Rewrite without any torn tail so appends start on a clean line.
        let mut w = BufWriter::new(File::create(&journal_path).map_err(|e| Error::io(&journal_path, e))?);
        let mut body = format!("{JOURNAL_MAGIC}{fingerprint}\n");
        for m in done.values() {
            body.push_str(&journal_line(m));
        }
        w.write_all(body.as_bytes()).map_err(|e| Error::io(&journal_path, e))?;
        w.flush().map_err(|e| Error::io(&journal_path, e))?;
    } else {
        fs::write(&journal_path, format!("{JOURNAL_MAGIC}{fingerprint}\n"))
            .map_err(|e| Error::io(&journal_path, e))?;
    }

    let pending: Vec<Job> = (0..plan.scenarios as u64)
        .flat_map(|sid| (0..spec.replications).map(move |rep| (sid, rep)))
        .filter(|key| !done.contains_key(key))
        .map(|(scenario_id, rep)| Job {
            scenario_id,
            rep,
            attempt: 0,
        })
        .collect();
    let executed = pending.len();

    if !pending.is_empty() {
        let mut journal = OpenOptions::new()
            .append(true)
            .open(&journal_path)
            .map_err(|e| Error::io(&journal_path, e))?;
        let env = Arc::new(spec.env.clone());
        let cancel = AtomicBool::new(false);
        let (job_tx, job_rx) = crossbeam_channel::unbounded::<Job>();
        let (msg_tx, msg_rx) = mpsc::channel::<Message>();
        for job in pending {
            job_tx.send(job).expect("queue open");
        }
        let workers = spec.workers.min(executed).max(1);
        let outcome: Result<()> = std::thread::scope(|scope| {
            for _ in 0..workers {
                let job_rx = job_rx.clone();
                let msg_tx = msg_tx.clone();
                let env = env.clone();
                let scenarios = &scenarios;
                let cancel = &cancel;
                scope.spawn(move || {
                    while let Ok(job) = job_rx.recv() {
                        if cancel.load(Ordering::Relaxed) {
                            break;
                        }
                        let scenario = scenarios[job.scenario_id as usize];
                        let result = catch_unwind(AssertUnwindSafe(|| {
                            execute_pair(
                                scenario,
                                env.clone(),
                                spec.horizon_years,
                                spec.base_seed,
                                job.scenario_id,
                                job.rep,
                            )
                        }));
                        let msg = match result {
                            Ok(Ok(m)) => Message::Done(m),
                            Ok(Err(e)) => Message::Failed(e),
                            Err(_) => Message::Panicked {
                                scenario_id: job.scenario_id,
                                rep: job.rep,
                                attempt: job.attempt,
                            },
                        };
                        if msg_tx.send(msg).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(msg_tx);

            let total = plan.pairs;
            let mut outstanding = executed;
            let mut result = Ok(());
            while outstanding > 0 {
                let Ok(msg) = msg_rx.recv() else { break };
                match msg {
                    Message::Done(m) => {
                        outstanding -= 1;
                        if let Err(e) = journal
                            .write_all(journal_line(&m).as_bytes())
                            .and_then(|_| journal.flush())
                        {
                            result = Err(Error::io(&journal_path, e));
                            break;
                        }
                        done.insert((m.scenario_id, m.rep), m);
                        if let Some(cb) = options.progress.as_mut() {
                            cb(done.len(), total);
                        }
                    }
                    Message::Panicked {
                        scenario_id,
                        rep,
                        attempt,
                    } => {
                        if attempt + 1 < MAX_ATTEMPTS {
                            job_tx
                                .send(Job {
                                    scenario_id,
                                    rep,
                                    attempt: attempt + 1,
                                })
                                .expect("queue open");
                        } else {
                            result = Err(Error::WorkerFailed {
                                scenario_id,
                                rep,
                                attempts: MAX_ATTEMPTS,
                            });
                            break;
                        }
                    }
                    Message::Failed(e) => {
                        result = Err(e);
                        break;
                    }
                }
            }
            cancel.store(result.is_err(), Ordering::Relaxed);
            drop(job_tx);
            result
        });
        outcome?;
    }

    let runs: Vec<RunMetrics> = done.into_values().collect();
    let mut scenario_metrics = Vec::with_capacity(plan.scenarios);
    let reps = spec.replications as usize;
    for (sid, chunk) in runs.chunks(reps).enumerate() {
        scenario_metrics.push(scenario_aggregate(sid as u64, scenarios[sid], chunk)?);
    }
    let table = normalize_scores(&scenario_metrics, &spec.weights);

    write_outputs(out_dir, &runs, &scenario_metrics, &table)?;
    let summary = Summary {
        fingerprint,
        scenarios: plan.scenarios,
        runs: runs.len(),
        executed,
        weights: &spec.weights,
        degenerate: &table.degenerate,
        profitability_threshold: table.profitability_threshold,
    };
    let summary_path = out_dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, json + "\n").map_err(|e| Error::io(&summary_path, e))?;

    Ok(SweepOutput {
        plan,
        executed,
        runs,
        scenarios: scenario_metrics,
        table,
    })
}

fn create(path: PathBuf) -> Result<(BufWriter<File>, PathBuf)> {
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((BufWriter::new(f), path))
}

fn write_outputs(out_dir: &Path, runs: &[RunMetrics], scenarios: &[ScenarioMetrics], table: &ScoreTable) -> Result<()> {
    let (w, _) = create(out_dir.join(RUNS_FILE))?;
    write_runs_csv(runs, w)?;
    let (w, _) = create(out_dir.join(SCENARIOS_FILE))?;
    write_scenarios_csv(scenarios, table, w)?;
    let (w, _) = create(out_dir.join(SCORES_FILE))?;
    write_scores_csv(scenarios, table, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_cardinality() {
        let spec = SweepSpec::default();
        assert_eq!(spec.plan(), SweepPlan { scenarios: 10_368, pairs: 207_360 });
        assert_eq!(enumerate_scenarios(&spec.grid).len(), 10_368);
    }

    #[test]
    fn desk_grid_cardinality() {
        assert_eq!(Grid::desk().scenario_count(), 2048);
        assert_eq!(SweepSpec::desk().plan().pairs, 6144);
    }

    #[test]
    fn single_value_grid() {
        let g = Grid::single(&Scenario::default());
        assert_eq!(enumerate_scenarios(&g), vec![Scenario::default()]);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let s = enumerate_scenarios(&Grid::default());
        assert_eq!(s[0].business_model, BusinessModel::WholesaleArbitrage);
        assert_eq!(s[0].demand_growth_pct_per_y, 0.0);
        assert_eq!(s[1].demand_growth_pct_per_y, 2.0);
        assert_eq!(s[3].co2_price_growth_pct_per_y, 10.0);
        assert_eq!(s[5184].business_model, BusinessModel::ReserveCapacity);
        assert_eq!(s[10_367].demand_growth_pct_per_y, 4.0);
        let mut uniq = s.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 10_368);
    }

    #[test]
    fn empty_axis_rejected() {
        let mut spec = SweepSpec::desk();
        spec.grid.res_growth_pct_per_y.clear();
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("grid.res_growth_pct_per_y"), "{err}");
        let mut spec = SweepSpec::desk();
        spec.replications = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn fingerprint_ignores_workers() {
        let a = SweepSpec { workers: 1, ..SweepSpec::desk() };
        let b = SweepSpec { workers: 8, ..SweepSpec::desk() };
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = SweepSpec { base_seed: 1, ..SweepSpec::desk() };
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn journal_line_roundtrip() {
        let m = RunMetrics {
            scenario_id: 17,
            rep: 2,
            seed: u64::MAX - 3,
            run_npv_eur: Some(-1_234.000_000_1),
            run_price_eur_per_mwh: None,
            run_blackout_hours: 12,
            run_emission_tco2: 0.1 + 0.2,
            no_trade_ticks: 3,
        };
        let line = journal_line(&m);
        assert_eq!(parse_journal_line(line.trim_end()), Some(m));
        assert_eq!(parse_journal_line("1,2,started,3"), None);
    }
}
