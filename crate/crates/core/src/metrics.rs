//! Evaluation criteria, scenario aggregation and min-max goal scores.

use std::io::Write;

use serde::Serialize;

use crate::clock::TICKS_PER_YEAR;
use crate::error::{Error, Result};
use crate::scenario::{Scenario, PARAMETER_COLUMNS};
use crate::sim::{LedgerEntry, RunRecord};

/// Post-hoc project NPV from the tick ledger: minus the capital cost plus
/// every tick's net flow (fixed O&M spread evenly over the year's ticks),
/// discounted by the 1-based year of the tick.
pub fn project_npv(
    ledger: &[LedgerEntry],
    capital_cost_eur: f64,
    interest_rate_pct: f64,
    fixed_om_eur_per_mw_y: f64,
    power_capacity_mw: f64,
) -> f64 {
    let om_per_tick = fixed_om_eur_per_mw_y * power_capacity_mw / TICKS_PER_YEAR as f64;
    let base = 1.0 + interest_rate_pct / 100.0;
    let mut npv = -capital_cost_eur;
    for (i, e) in ledger.iter().enumerate() {
        let t = i as u32 + 1;
        let exponent = (t - 1) / TICKS_PER_YEAR + 1;
        npv += (e.revenue_eur - e.purchase_eur - om_per_tick) / base.powi(exponent as i32);
    }
    npv
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub scenario_id: u64,
    pub rep: u32,
    pub seed: u64,
    /// Mean running NPV over the run's storage projects; `None` without storage.
    pub run_npv_eur: Option<f64>,
    /// Mean clearing price over ticks that traded.
    pub run_price_eur_per_mwh: Option<f64>,
    pub run_blackout_hours: u32,
    pub run_emission_tco2: f64,
    pub no_trade_ticks: u32,
}

impl RunMetrics {
    pub fn from_record(record: &RunRecord, scenario_id: u64, rep: u32) -> Self {
        let run_npv_eur = (!record.ess.is_empty()).then(|| {
            record.ess.iter().map(|l| l.running_npv_eur).sum::<f64>() / record.ess.len() as f64
        });
        let prices: Vec<f64> = record.ticks.iter().filter_map(|t| t.price).collect();
        let run_price_eur_per_mwh =
            (!prices.is_empty()).then(|| prices.iter().sum::<f64>() / prices.len() as f64);
        Self {
            scenario_id,
            rep,
            seed: record.seed,
            run_npv_eur,
            run_price_eur_per_mwh,
            run_blackout_hours: record.blackout_counter,
            run_emission_tco2: record.cumulative_emission_tco2,
            no_trade_ticks: (record.ticks.len() - prices.len()) as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioMetrics {
    pub scenario_id: u64,
    pub scenario: Scenario,
    pub runs: usize,
    pub npv_mean_eur: Option<f64>,
    pub price_mean_eur_per_mwh: Option<f64>,
    pub blackout_mean_hours: f64,
    pub emission_mean_tco2: f64,
    pub no_trade_mean_ticks: f64,
    /// Every replication has a positive NPV. Always false without storage.
    pub absolute_profitability: bool,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Means of the four criteria over one scenario's replications.
pub fn scenario_aggregate(scenario_id: u64, scenario: Scenario, runs: &[RunMetrics]) -> Result<ScenarioMetrics> {
    if runs.is_empty() {
        return Err(Error::Domain(format!("scenario {scenario_id} has no runs")));
    }
    if let Some(r) = runs.iter().find(|r| r.scenario_id != scenario_id) {
        return Err(Error::Domain(format!(
            "run of scenario {} mixed into scenario {scenario_id}",
            r.scenario_id
        )));
    }
    let npvs: Vec<Option<f64>> = runs.iter().map(|r| r.run_npv_eur).collect();
    let npv_mean_eur = if npvs.iter().all(Option::is_some) {
        mean_of(npvs.iter().flatten().copied())
    } else {
        None
    };
    Ok(ScenarioMetrics {
        scenario_id,
        scenario,
        runs: runs.len(),
        npv_mean_eur,
        price_mean_eur_per_mwh: mean_of(runs.iter().filter_map(|r| r.run_price_eur_per_mwh)),
        blackout_mean_hours: mean_of(runs.iter().map(|r| r.run_blackout_hours as f64)).unwrap_or(0.0),
        emission_mean_tco2: mean_of(runs.iter().map(|r| r.run_emission_tco2)).unwrap_or(0.0),
        no_trade_mean_ticks: mean_of(runs.iter().map(|r| r.no_trade_ticks as f64)).unwrap_or(0.0),
        absolute_profitability: npvs.iter().all(|v| matches!(v, Some(x) if *x > 0.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoalScores {
    /// `None` for scenarios without storage.
    pub profitability: Option<f64>,
    pub affordability: Option<f64>,
    pub availability: Option<f64>,
    pub acceptability: Option<f64>,
    pub government_goal: Option<f64>,
}

/// Weights of affordability, availability and acceptability in the
/// government goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalWeights {
    pub affordability: f64,
    pub availability: f64,
    pub acceptability: f64,
}

impl Default for GoalWeights {
    fn default() -> Self {
        Self {
            affordability: 1.0 / 3.0,
            availability: 1.0 / 3.0,
            acceptability: 1.0 / 3.0,
        }
    }
}

impl GoalWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.affordability, self.availability, self.acceptability];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("weights", "must be non-negative with a positive sum"));
        }
        Ok(())
    }

    pub fn combine(&self, affordability: f64, availability: f64, acceptability: f64) -> f64 {
        (self.affordability * affordability + self.availability * availability + self.acceptability * acceptability)
            / (self.affordability + self.availability + self.acceptability)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Degenerate {
    pub profitability: bool,
    pub affordability: bool,
    pub availability: bool,
    pub acceptability: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub scores: Vec<GoalScores>,
    pub degenerate: Degenerate,
    pub profitability_threshold: Option<Threshold>,
}

#[derive(Clone, Copy)]
enum Orientation {
    Ascending,
    Descending,
}

/// Min-max scores in [0, 100]; `None` values are outside the pool. A
/// criterion with a single observed value scores 50 everywhere.
fn normalize(values: &[Option<f64>], orientation: Orientation) -> (Vec<Option<f64>>, bool) {
    let present = values.iter().flatten();
    let min = present.clone().copied().fold(f64::INFINITY, f64::min);
    let max = present.copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min < max) {
        return (values.iter().map(|v| v.map(|_| 50.0)).collect(), true);
    }
    let range = max - min;
    let scores = values
        .iter()
        .map(|v| {
            v.map(|x| match orientation {
                Orientation::Ascending => (x - min) / range * 100.0,
                Orientation::Descending => (max - x) / range * 100.0,
            })
        })
        .collect();
    (scores, false)
}

/// Score every scenario. Profitability rises with NPV; affordability,
/// availability and acceptability fall with price, blackout hours and
/// emission respectively.
pub fn normalize_scores(scenarios: &[ScenarioMetrics], weights: &GoalWeights) -> ScoreTable {
    let npv: Vec<Option<f64>> = scenarios.iter().map(|s| s.npv_mean_eur).collect();
    let price: Vec<Option<f64>> = scenarios.iter().map(|s| s.price_mean_eur_per_mwh).collect();
    let blackout: Vec<Option<f64>> = scenarios.iter().map(|s| Some(s.blackout_mean_hours)).collect();
    let emission: Vec<Option<f64>> = scenarios.iter().map(|s| Some(s.emission_mean_tco2)).collect();
    let (prof, d_prof) = normalize(&npv, Orientation::Ascending);
    let (aff, d_aff) = normalize(&price, Orientation::Descending);
    let (avail, d_avail) = normalize(&blackout, Orientation::Descending);
    let (acc, d_acc) = normalize(&emission, Orientation::Descending);
    let scores = (0..scenarios.len())
        .map(|i| GoalScores {
            profitability: prof[i],
            affordability: aff[i],
            availability: avail[i],
            acceptability: acc[i],
            government_goal: match (aff[i], avail[i], acc[i]) {
                (Some(a), Some(b), Some(c)) => Some(weights.combine(a, b, c)),
                _ => None,
            },
        })
        .collect();
    ScoreTable {
        scores,
        degenerate: Degenerate {
            profitability: d_prof,
            affordability: d_aff,
            availability: d_avail,
            acceptability: d_acc,
        },
        profitability_threshold: profitability_threshold(&npv),
    }
}

/// Profitability score at which NPV is zero; clamped into [0, 100] and
/// flagged when zero lies outside the observed range. `None` when fewer than
/// two distinct NPVs exist.
pub fn profitability_threshold(npvs: &[Option<f64>]) -> Option<Threshold> {
    let present = npvs.iter().flatten();
    let min = present.clone().copied().fold(f64::INFINITY, f64::min);
    let max = present.copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min < max) {
        return None;
    }
    let raw = (0.0 - min) / (max - min) * 100.0;
    let value = raw.clamp(0.0, 100.0);
    Some(Threshold {
        value,
        clamped: value != raw,
    })
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub const RUN_COLUMNS: [&str; 8] = [
    "scenario_id",
    "rep",
    "seed",
    "run_npv_eur",
    "run_price_eur_per_mwh",
    "run_blackout_hours",
    "run_emission_tco2",
    "no_trade_ticks",
];

pub const SCORE_COLUMNS: [&str; 5] = [
    "profitability",
    "affordability",
    "availability",
    "acceptability",
    "government_goal",
];

pub const CRITERIA_COLUMNS: [&str; 5] = [
    "npv_mean_eur",
    "price_mean_eur_per_mwh",
    "blackout_mean_hours",
    "emission_mean_tco2",
    "absolute_profitability",
];

fn csv_err(e: csv::Error) -> Error {
    Error::csv("output", e)
}

pub fn write_runs_csv(runs: &[RunMetrics], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS).map_err(csv_err)?;
    for r in runs {
        w.write_record([
            r.scenario_id.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            fmt(r.run_npv_eur),
            fmt(r.run_price_eur_per_mwh),
            r.run_blackout_hours.to_string(),
            r.run_emission_tco2.to_string(),
            r.no_trade_ticks.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("output", e))
}

fn score_fields(s: &GoalScores) -> [String; 5] {
    [
        fmt(s.profitability),
        fmt(s.affordability),
        fmt(s.availability),
        fmt(s.acceptability),
        fmt(s.government_goal),
    ]
}

pub fn write_scenarios_csv(scenarios: &[ScenarioMetrics], table: &ScoreTable, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = std::iter::once("scenario_id")
        .chain(PARAMETER_COLUMNS)
        .chain(CRITERIA_COLUMNS)
        .chain(SCORE_COLUMNS)
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for (s, g) in scenarios.iter().zip(&table.scores) {
        let mut row = vec![s.scenario_id.to_string()];
        row.extend(s.scenario.csv_values());
        row.extend([
            fmt(s.npv_mean_eur),
            fmt(s.price_mean_eur_per_mwh),
            s.blackout_mean_hours.to_string(),
            s.emission_mean_tco2.to_string(),
            s.absolute_profitability.to_string(),
        ]);
        row.extend(score_fields(g));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("output", e))
}

pub fn write_scores_csv(scenarios: &[ScenarioMetrics], table: &ScoreTable, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = std::iter::once("scenario_id").chain(SCORE_COLUMNS).collect();
    w.write_record(&header).map_err(csv_err)?;
    for (s, g) in scenarios.iter().zip(&table.scores) {
        let mut row = vec![s.scenario_id.to_string()];
        row.extend(score_fields(g));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("output", e))
}
