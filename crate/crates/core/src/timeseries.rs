//! Baseline input series: wind and sun availability, the load profile and
//! fuel prices.
//!
//! Each series comes from a `tick_index,value` CSV when configured, and from a
//! seeded seasonal generator otherwise. Lookups past the end of a series wrap
//! around.
//!
//! CSV units: wind and sun in percent of capacity, the load profile in percent
//! of annual consumption per model hour, fuel prices in EUR per fuel unit.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::clock::{self, HOURS_PER_DAY, TICKS_PER_YEAR};
use crate::config::{EnvironmentConfig, Fuel, FuelConfig};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, Stream};

pub const WIND_RANGE: (f64, f64) = (0.47, 1.0);
pub const SUN_RANGE: (f64, f64) = (0.0, 1.0);
/// E1a profile bounds, fraction of annual consumption per real hour.
pub const LOAD_PROFILE_RANGE: (f64, f64) = (0.0053e-2, 0.0229e-2);

#[derive(Debug, Clone, PartialEq)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "series must not be empty");
        Series(values)
    }

    pub fn at(&self, tick: u32) -> f64 {
        self.0[tick as usize % self.0.len()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct TimeSeries {
    /// Wind availability, fraction of capacity.
    pub wind: Series,
    /// Sun availability, fraction of capacity.
    pub sun: Series,
    /// Share of a load's yearly consumption needed in each model hour. Every
    /// 288-tick year sums to `1 / hour_scale_factor`.
    pub load_profile: Series,
    /// Fuel prices indexed by `Fuel::index`, EUR per fuel unit.
    pub fuel_prices: [Series; 3],
}

impl TimeSeries {
    /// Load configured CSVs and generate the rest from `seed`.
    pub fn build(env: &EnvironmentConfig, horizon_ticks: u32, seed: u64) -> Result<Self> {
        let src = &env.time_series;
        let n = horizon_ticks.max(TICKS_PER_YEAR) as usize;

        let wind = match &src.wind {
            Some(p) => Series::new(load_csv(p)?.into_iter().map(|v| v / 100.0).collect()),
            None => synthetic_wind(n, derive_seed(seed, Stream::Wind)),
        };
        let sun = match &src.sun {
            Some(p) => Series::new(load_csv(p)?.into_iter().map(|v| v / 100.0).collect()),
            None => synthetic_sun(n, derive_seed(seed, Stream::Sun)),
        };
        let raw_profile = match &src.load_profile {
            Some(p) => load_csv(p)?.into_iter().map(|v| v / 100.0).collect(),
            None => synthetic_load_profile(derive_seed(seed, Stream::LoadProfile)),
        };
        let load_profile = Series::new(normalize_profile(raw_profile, env.hour_scale_factor));

        let fuel_series = |fuel: Fuel| -> Result<Series> {
            let cfg = env
                .fuel(fuel)
                .ok_or_else(|| Error::config("env.fuels", format!("missing {fuel:?}")))?;
            let base = match src.fuel_price(fuel) {
                Some(p) => load_csv(p)?,
                None => synthetic_fuel(cfg, n, derive_seed(seed, Stream::Fuel(fuel))),
            };
            Ok(apply_growth(base, cfg.price_growth_pct_per_y, n))
        };
        let fuel_prices = [
            fuel_series(Fuel::Uranium)?,
            fuel_series(Fuel::Coal)?,
            fuel_series(Fuel::NaturalGas)?,
        ];
        Ok(Self {
            wind,
            sun,
            load_profile,
            fuel_prices,
        })
    }

    pub fn fuel_price(&self, fuel: Fuel, tick: u32) -> f64 {
        self.fuel_prices[fuel.index()].at(tick)
    }
}

#[derive(Deserialize)]
struct Row {
    tick_index: u64,
    value: f64,
}

/// Read a `tick_index,value` CSV. Indices must cover `0..n` exactly once, in
/// any order.
pub fn load_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut rows: Vec<Row> = Vec::new();
    for row in reader.deserialize() {
        rows.push(row.map_err(|e| Error::csv(path, e))?);
    }
    if rows.is_empty() {
        return Err(Error::config(path.display().to_string(), "series is empty"));
    }
    rows.sort_by_key(|r| r.tick_index);
    for (i, r) in rows.iter().enumerate() {
        if r.tick_index != i as u64 {
            return Err(Error::config(
                path.display().to_string(),
                format!("tick_index must run 0..{} without gaps or repeats", rows.len()),
            ));
        }
        if !r.value.is_finite() {
            return Err(Error::config(
                path.display().to_string(),
                format!("non-finite value at tick {i}"),
            ));
        }
    }
    Ok(rows.into_iter().map(|r| r.value).collect())
}

/// Rescale each 288-tick block so it sums to `1 / hour_scale_factor`. A
/// trailing partial block uses the scale of the block before it.
fn normalize_profile(mut values: Vec<f64>, hour_scale_factor: f64) -> Vec<f64> {
    let target = 1.0 / hour_scale_factor;
    let year = TICKS_PER_YEAR as usize;
    let mut last_scale = 1.0;
    for block in values.chunks_mut(year) {
        let sum: f64 = block.iter().sum();
        if block.len() == year && sum > 0.0 {
            last_scale = target / sum;
        }
        for v in block.iter_mut() {
            *v *= last_scale;
        }
    }
    values
}

fn apply_growth(values: Vec<f64>, growth_pct: f64, n: usize) -> Series {
    if growth_pct == 0.0 {
        return Series::new(values);
    }
    let len = values.len();
    let grown = (0..n.max(len))
        .map(|t| {
            let years = clock::year(t as u32) - 1;
            values[t % len] * (1.0 + growth_pct / 100.0).powi(years as i32)
        })
        .collect();
    Series::new(grown)
}

fn seasonal(month: u32) -> f64 {
    // +1 in January, -1 in July.
    (2.0 * PI * month as f64 / 12.0).cos()
}

fn synthetic_wind(n: usize, seed: u64) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shock = Normal::new(0.0, 0.05).unwrap();
    let mut anomaly = 0.0;
    let values = (0..n)
        .map(|t| {
            anomaly = 0.9 * anomaly + shock.sample(&mut rng);
            let base = 0.735 + 0.1 * seasonal(clock::month(t as u32));
            (base + anomaly).clamp(WIND_RANGE.0, WIND_RANGE.1)
        })
        .collect();
    Series::new(values)
}

fn synthetic_sun(n: usize, seed: u64) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cloud = 0.0;
    let values = (0..n)
        .map(|t| {
            let t = t as u32;
            if clock::hour_of_day(t) == 0 {
                cloud = rng.random_range(0.0..0.5);
            }
            let h = clock::hour_of_day(t) as f64;
            let daylight = (PI * (h - 5.0) / 14.0).sin().max(0.0);
            let amplitude = 0.55 - 0.45 * seasonal(clock::month(t));
            let hourly = 1.0 - cloud - rng.random_range(0.0..0.15);
            (daylight * amplitude * hourly).clamp(SUN_RANGE.0, SUN_RANGE.1)
        })
        .collect();
    Series::new(values)
}

/// One model year of a residential-style profile: low at night, evening peak,
/// higher in winter.
fn synthetic_load_profile(seed: u64) -> Vec<f64> {
    const DAILY: [f64; HOURS_PER_DAY as usize] = [
        0.70, 0.65, 0.62, 0.60, 0.62, 0.68, 0.80, 0.95, 1.00, 0.98, 0.96, 0.97, 1.00, 0.97, 0.95,
        0.98, 1.08, 1.30, 1.45, 1.42, 1.30, 1.15, 0.95, 0.80,
    ];
    let mean_hourly = 1.0 / 8760.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..TICKS_PER_YEAR)
        .map(|t| {
            let shape = DAILY[clock::hour_of_day(t) as usize];
            let season = 1.0 + 0.18 * seasonal(clock::month(t));
            let noise = 1.0 + rng.random_range(-0.03..0.03);
            (mean_hourly * shape * season * noise)
                .clamp(LOAD_PROFILE_RANGE.0, LOAD_PROFILE_RANGE.1)
        })
        .collect()
}

/// Monthly fuel price path inside the configured range.
fn synthetic_fuel(cfg: &FuelConfig, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid = 0.5 * (cfg.price_min + cfg.price_max);
    let amp = 0.5 * (cfg.price_max - cfg.price_min);
    let shock = Normal::new(0.0, 0.15).unwrap();
    let phase = rng.random_range(0.0..2.0 * PI);
    let mut walk = 0.0;
    let months = n.div_ceil(HOURS_PER_DAY as usize);
    let monthly: Vec<f64> = (0..months)
        .map(|m| {
            walk = 0.9 * walk + shock.sample(&mut rng);
            let cycle = 0.3 * (2.0 * PI * m as f64 / 12.0 + phase).sin();
            (mid + amp * (cycle + walk)).clamp(cfg.price_min, cfg.price_max)
        })
        .collect();
    (0..n).map(|t| monthly[t / HOURS_PER_DAY as usize]).collect()
}
