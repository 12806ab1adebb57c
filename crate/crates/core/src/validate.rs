//! Comparison of simulated prices with a monthly reference series.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clock::{month_index, DAYS_PER_YEAR, TICKS_PER_YEAR};
use crate::error::{Error, Result};
use crate::sim::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearStats {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl YearStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    /// 1-based model year.
    pub year: u32,
    pub simulated: YearStats,
    pub reference: YearStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    /// Pearson correlation of the yearly means; `None` with fewer than two
    /// years or a constant side.
    pub correlation: Option<f64>,
}

#[derive(Deserialize)]
struct RefRow {
    month_index: u32,
    value: f64,
}

/// Read a `month_index,value` CSV (0-based month counted from the run start).
pub fn load_reference(path: &Path) -> Result<Vec<(u32, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<RefRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        out.push((row.month_index, row.value));
    }
    Ok(out)
}

/// Clearing prices of the ticks that traded, keyed by tick.
pub fn simulated_prices(record: &RunRecord) -> Vec<(u32, f64)> {
    record.ticks.iter().filter_map(|t| t.price.map(|p| (t.tick, p))).collect()
}

/// Mean simulated price of each month that traded, as `(month_index, mean)`.
pub fn monthly_means(prices: &[(u32, f64)]) -> Vec<(u32, f64)> {
    let mut out: Vec<(u32, f64, usize)> = Vec::new();
    for &(tick, p) in prices {
        let m = month_index(tick);
        match out.last_mut() {
            Some((last, sum, n)) if *last == m => {
                *sum += p;
                *n += 1;
            }
            _ => out.push((m, p, 1)),
        }
    }
    out.into_iter().map(|(m, s, n)| (m, s / n as f64)).collect()
}

fn by_year(values: impl Iterator<Item = (u32, f64)>) -> Vec<Vec<f64>> {
    let mut years: Vec<Vec<f64>> = Vec::new();
    for (y, v) in values {
        let y = y as usize;
        if years.len() <= y {
            years.resize(y + 1, Vec::new());
        }
        years[y].push(v);
    }
    years
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Per-year statistics of simulated tick prices and reference monthly values.
/// Both sides must cover exactly the same years.
pub fn compare(simulated: &[(u32, f64)], reference: &[(u32, f64)]) -> Result<ValidationReport> {
    let sim = by_year(simulated.iter().map(|&(t, p)| (t / TICKS_PER_YEAR, p)));
    let refs = by_year(reference.iter().map(|&(m, v)| (m / DAYS_PER_YEAR, v)));
    let covered = |v: &[Vec<f64>]| -> Vec<u32> {
        v.iter()
            .enumerate()
            .filter(|(_, y)| !y.is_empty())
            .map(|(i, _)| i as u32 + 1)
            .collect()
    };
    let (sim_years, ref_years) = (covered(&sim), covered(&refs));
    if ref_years.is_empty() {
        return Err(Error::config("reference", "covers no model year"));
    }
    if sim_years != ref_years {
        return Err(Error::config(
            "reference",
            format!("covers years {ref_years:?} but the simulation covers {sim_years:?}"),
        ));
    }
    let rows: Vec<ValidationRow> = ref_years
        .iter()
        .map(|&y| {
            let i = (y - 1) as usize;
            ValidationRow {
                year: y,
                simulated: YearStats::of(&sim[i]).expect("covered year"),
                reference: YearStats::of(&refs[i]).expect("covered year"),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.simulated.mean).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.reference.mean).collect();
    Ok(ValidationReport {
        correlation: pearson(&xs, &ys),
        rows,
    })
}

pub fn write_report(report: &ValidationReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e| Error::csv("validation", e);
    let stats = ["mean", "min", "q1", "median", "q3", "max"];
    let mut header = vec!["year".to_string()];
    for side in ["sim", "ref"] {
        header.extend(stats.iter().map(|s| format!("{side}_{s}")));
    }
    header.push("correlation".into());
    w.write_record(&header).map_err(err)?;
    let corr = report.correlation.map_or_else(|| "NA".to_string(), |c| c.to_string());
    for r in &report.rows {
        let mut row = vec![r.year.to_string()];
        for s in [&r.simulated, &r.reference] {
            row.extend([s.mean, s.min, s.q1, s.median, s.q3, s.max].iter().map(f64::to_string));
        }
        row.push(corr.clone());
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("validation", e))
}
