//! Environment configuration: agent counts, the generation mix, fuels,
//! demand, market rules and time-series sources.
//!
//! Defaults reproduce the Dutch 2016 calibration (31.1 GW installed,
//! 100 TWh/y of load, 5 producers, 8 retailers, 16 large consumers).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clock::{PeakHours, HOUR_SCALE_FACTOR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technology {
    Nuclear,
    Coal,
    #[serde(rename = "OCGT")]
    Ocgt,
    #[serde(rename = "CCGT")]
    Ccgt,
    WindOffshore,
    WindOnshore,
    #[serde(rename = "SolarPV")]
    SolarPv,
}

impl Technology {
    pub const ALL: [Technology; 7] = [
        Technology::Nuclear,
        Technology::Coal,
        Technology::Ocgt,
        Technology::Ccgt,
        Technology::WindOffshore,
        Technology::WindOnshore,
        Technology::SolarPv,
    ];

    pub fn is_res(self) -> bool {
        matches!(
            self,
            Technology::WindOffshore | Technology::WindOnshore | Technology::SolarPv
        )
    }

    pub fn is_wind(self) -> bool {
        matches!(self, Technology::WindOffshore | Technology::WindOnshore)
    }

    pub fn fuel(self) -> Option<Fuel> {
        match self {
            Technology::Nuclear => Some(Fuel::Uranium),
            Technology::Coal => Some(Fuel::Coal),
            Technology::Ocgt | Technology::Ccgt => Some(Fuel::NaturalGas),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fuel {
    Uranium,
    Coal,
    NaturalGas,
}

impl Fuel {
    pub const ALL: [Fuel; 3] = [Fuel::Uranium, Fuel::Coal, Fuel::NaturalGas];

    pub fn index(self) -> usize {
        self as usize
    }

    fn key(self) -> &'static str {
        match self {
            Fuel::Uranium => "uranium",
            Fuel::Coal => "coal",
            Fuel::NaturalGas => "natural_gas",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyConfig {
    pub technology: Technology,
    /// Share of total installed capacity at the start of the run.
    pub share_pct: f64,
    /// Thermal efficiency as a fraction. Ignored for renewables.
    pub efficiency: f64,
    pub reliability: f64,
    pub variable_om_eur_per_mwh: f64,
    pub unit_size_mw: f64,
    /// Whether the plant may post balancing bids.
    pub flexible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuelConfig {
    pub fuel: Fuel,
    /// MWh of fuel energy per price unit (ton of coal, kg of uranium, MWh of gas).
    pub energy_value: f64,
    /// tCO2 per MWh of fuel energy.
    pub carbon_content: f64,
    /// Range of the baseline price series, in EUR per price unit.
    pub price_min: f64,
    pub price_max: f64,
    pub price_growth_pct_per_y: f64,
}

/// Optional CSV inputs (`tick_index,value`). Missing series are generated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSeriesSources {
    pub wind: Option<PathBuf>,
    pub sun: Option<PathBuf>,
    pub load_profile: Option<PathBuf>,
    pub coal_price: Option<PathBuf>,
    pub natural_gas_price: Option<PathBuf>,
    pub uranium_price: Option<PathBuf>,
}

impl TimeSeriesSources {
    pub fn fuel_price(&self, fuel: Fuel) -> Option<&Path> {
        match fuel {
            Fuel::Uranium => self.uranium_price.as_deref(),
            Fuel::Coal => self.coal_price.as_deref(),
            Fuel::NaturalGas => self.natural_gas_price.as_deref(),
        }
    }

    /// Resolve relative paths against the directory of the config file.
    pub fn rebase(&mut self, dir: &Path) {
        for p in [
            &mut self.wind,
            &mut self.sun,
            &mut self.load_profile,
            &mut self.coal_price,
            &mut self.natural_gas_price,
            &mut self.uranium_price,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentConfig {
    pub n_producers: usize,
    pub n_retailers: usize,
    pub n_large_consumers: usize,
    pub total_generation_capacity_gw: f64,
    pub total_annual_load_gwh: f64,
    /// Share of total annual load consumed by large (transmission-level) loads.
    pub large_load_share_pct: f64,
    pub flexible_load_pct: f64,
    pub interest_rate_pct_per_y: f64,
    pub carbon_pricing: bool,
    pub co2_price_initial: f64,
    pub large_consumer_wtp_min: f64,
    pub large_consumer_wtp_max: f64,
    pub small_consumer_wtp: f64,
    pub technologies: Vec<TechnologyConfig>,
    pub fuels: Vec<FuelConfig>,
    pub ess_fixed_om_eur_per_mw_y: f64,
    pub peak_hours: PeakHours,
    /// ESS willingness to pay before any price has been observed.
    pub bootstrap_price: f64,
    /// Number of past clearing prices averaged by the ESS off-peak bid.
    pub price_memory_ticks: usize,
    /// Chance that a scheduled thermal unit trips between clearing and delivery.
    pub forced_outage_prob: f64,
    pub hour_scale_factor: f64,
    pub time_series: TimeSeriesSources,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        use Technology::*;
        let tech = |technology, share_pct, efficiency, reliability, vom, unit, flexible| {
            TechnologyConfig {
                technology,
                share_pct,
                efficiency,
                reliability,
                variable_om_eur_per_mwh: vom,
                unit_size_mw: unit,
                flexible,
            }
        };
        Self {
            n_producers: 5,
            n_retailers: 8,
            n_large_consumers: 16,
            total_generation_capacity_gw: 31.1,
            total_annual_load_gwh: 100_000.0,
            large_load_share_pct: 50.0,
            flexible_load_pct: 0.0,
            interest_rate_pct_per_y: 5.0,
            carbon_pricing: true,
            co2_price_initial: 16.0,
            large_consumer_wtp_min: 0.0,
            large_consumer_wtp_max: 150.0,
            small_consumer_wtp: 200.0,
            technologies: vec![
                tech(Nuclear, 1.6, 0.33, 0.85, 2.0, 500.0, false),
                tech(Coal, 18.2, 0.40, 0.86, 4.0, 500.0, true),
                tech(Ocgt, 32.0, 0.385, 0.80, 3.0, 500.0, true),
                tech(Ccgt, 32.0, 0.56, 0.84, 2.0, 500.0, true),
                tech(WindOffshore, 1.1, 1.0, 0.95, 0.0, 100.0, false),
                tech(WindOnshore, 10.5, 1.0, 0.95, 0.0, 100.0, false),
                tech(SolarPv, 4.6, 1.0, 0.99, 0.0, 50.0, false),
            ],
            fuels: vec![
                FuelConfig {
                    fuel: Fuel::Uranium,
                    energy_value: 100.0,
                    carbon_content: 0.0,
                    price_min: 43.55,
                    price_max: 95.56,
                    price_growth_pct_per_y: 0.0,
                },
                FuelConfig {
                    fuel: Fuel::Coal,
                    energy_value: 8.14,
                    carbon_content: 0.34,
                    price_min: 53.97,
                    price_max: 132.37,
                    price_growth_pct_per_y: 0.0,
                },
                FuelConfig {
                    fuel: Fuel::NaturalGas,
                    energy_value: 1.0,
                    carbon_content: 0.20,
                    price_min: 13.68,
                    price_max: 23.63,
                    price_growth_pct_per_y: 0.0,
                },
            ],
            ess_fixed_om_eur_per_mw_y: 0.0,
            peak_hours: PeakHours::default(),
            bootstrap_price: 40.0,
            price_memory_ticks: 24,
            forced_outage_prob: 0.0,
            hour_scale_factor: HOUR_SCALE_FACTOR,
            time_series: TimeSeriesSources::default(),
        }
    }
}

impl EnvironmentConfig {
    pub fn technology(&self, tech: Technology) -> Option<&TechnologyConfig> {
        self.technologies.iter().find(|t| t.technology == tech)
    }

    pub fn fuel(&self, fuel: Fuel) -> Option<&FuelConfig> {
        self.fuels.iter().find(|f| f.fuel == fuel)
    }

    pub fn validate(&self) -> Result<()> {
        let positive_count = |name: &str, n: usize| {
            if n == 0 {
                Err(Error::config(format!("env.{name}"), "must be at least 1"))
            } else {
                Ok(())
            }
        };
        positive_count("n_producers", self.n_producers)?;
        positive_count("n_retailers", self.n_retailers)?;
        positive_count("n_large_consumers", self.n_large_consumers)?;

        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("env.{name}"), format!("{v} must be finite and >= 0")))
            }
        };
        non_negative("total_generation_capacity_gw", self.total_generation_capacity_gw)?;
        non_negative("total_annual_load_gwh", self.total_annual_load_gwh)?;
        non_negative("co2_price_initial", self.co2_price_initial)?;
        non_negative("ess_fixed_om_eur_per_mw_y", self.ess_fixed_om_eur_per_mw_y)?;
        non_negative("bootstrap_price", self.bootstrap_price)?;
        percent("env.large_load_share_pct", self.large_load_share_pct)?;
        percent("env.flexible_load_pct", self.flexible_load_pct)?;
        if !(self.interest_rate_pct_per_y.is_finite() && self.interest_rate_pct_per_y > -100.0) {
            return Err(Error::config("env.interest_rate_pct_per_y", "must be above -100"));
        }
        if !(self.large_consumer_wtp_min <= self.large_consumer_wtp_max) {
            return Err(Error::config(
                "env.large_consumer_wtp_max",
                "must not be below large_consumer_wtp_min",
            ));
        }
        if !(0.0..=1.0).contains(&self.forced_outage_prob) {
            return Err(Error::config("env.forced_outage_prob", "not in [0, 1]"));
        }
        if !(self.hour_scale_factor.is_finite() && self.hour_scale_factor > 0.0) {
            return Err(Error::config("env.hour_scale_factor", "must be > 0"));
        }
        if self.price_memory_ticks == 0 {
            return Err(Error::config("env.price_memory_ticks", "must be at least 1"));
        }
        if self.peak_hours.first > self.peak_hours.last || self.peak_hours.last > 23 {
            return Err(Error::config("env.peak_hours", "need first <= last <= 23"));
        }

        let mut share_total = 0.0;
        for (i, t) in self.technologies.iter().enumerate() {
            let field = |name: &str| format!("env.technologies[{i}].{name}");
            if self.technologies[..i].iter().any(|o| o.technology == t.technology) {
                return Err(Error::config(field("technology"), "listed twice"));
            }
            percent(&field("share_pct"), t.share_pct)?;
            share_total += t.share_pct;
            if !(t.reliability > 0.0 && t.reliability <= 1.0) {
                return Err(Error::config(field("reliability"), "not in (0, 1]"));
            }
            if !(t.efficiency > 0.0 && t.efficiency <= 1.0) {
                return Err(Error::config(field("efficiency"), "not in (0, 1]"));
            }
            if !(t.unit_size_mw.is_finite() && t.unit_size_mw > 0.0) {
                return Err(Error::config(field("unit_size_mw"), "must be > 0"));
            }
            non_negative(
                &format!("technologies[{i}].variable_om_eur_per_mwh"),
                t.variable_om_eur_per_mwh,
            )?;
            if let Some(fuel) = t.technology.fuel() {
                if self.fuel(fuel).is_none() {
                    return Err(Error::config(
                        field("technology"),
                        format!("no fuel entry for {}", fuel.key()),
                    ));
                }
            }
        }
        if (share_total - 100.0).abs() > 1e-6 {
            return Err(Error::config(
                "env.technologies",
                format!("shares sum to {share_total}%, expected 100% (unallocated or over-allocated capacity)"),
            ));
        }

        for (i, f) in self.fuels.iter().enumerate() {
            let field = |name: &str| format!("env.fuels[{i}].{name}");
            if self.fuels[..i].iter().any(|o| o.fuel == f.fuel) {
                return Err(Error::config(field("fuel"), "listed twice"));
            }
            if !(f.energy_value.is_finite() && f.energy_value > 0.0) {
                return Err(Error::config(field("energy_value"), "must be > 0"));
            }
            if !(f.carbon_content.is_finite() && f.carbon_content >= 0.0) {
                return Err(Error::config(field("carbon_content"), "must be >= 0"));
            }
            if !(f.price_min.is_finite() && f.price_min >= 0.0 && f.price_min <= f.price_max) {
                return Err(Error::config(field("price_min"), "need 0 <= price_min <= price_max"));
            }
            if !(f.price_growth_pct_per_y > -100.0) {
                return Err(Error::config(field("price_growth_pct_per_y"), "must be above -100"));
            }
        }
        Ok(())
    }
}

fn percent(field: &str, v: f64) -> Result<()> {
    if (0.0..=100.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} not in [0, 100]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        EnvironmentConfig::default().validate().unwrap();
    }

    #[test]
    fn default_shares_match_calibration() {
        let env = EnvironmentConfig::default();
        let total: f64 = env.technologies.iter().map(|t| t.share_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
        assert_eq!(env.technology(Technology::Ccgt).unwrap().efficiency, 0.56);
        assert_eq!(env.technology(Technology::SolarPv).unwrap().reliability, 0.99);
    }

    #[test]
    fn unallocated_share_is_an_error() {
        let mut env = EnvironmentConfig::default();
        env.technologies[0].share_pct = 0.5;
        let err = env.validate().unwrap_err().to_string();
        assert!(err.contains("env.technologies"), "{err}");
    }

    #[test]
    fn bad_reliability_names_field() {
        let mut env = EnvironmentConfig::default();
        env.technologies[2].reliability = 1.5;
        let err = env.validate().unwrap_err().to_string();
        assert!(err.contains("env.technologies[2].reliability"), "{err}");
    }

    #[test]
    fn partial_json_fills_defaults() {
        let env: EnvironmentConfig =
            serde_json::from_str(r#"{"interest_rate_pct_per_y": 7.5}"#).unwrap();
        assert_eq!(env.interest_rate_pct_per_y, 7.5);
        assert_eq!(env.n_producers, 5);
        assert!(serde_json::from_str::<EnvironmentConfig>(r#"{"nope": 1}"#).is_err());
    }
}
