//! One point of the experiment grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BusinessModel {
    WholesaleArbitrage,
    ReserveCapacity,
}

impl fmt::Display for BusinessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BusinessModel::WholesaleArbitrage => "WholesaleArbitrage",
            BusinessModel::ReserveCapacity => "ReserveCapacity",
        })
    }
}

/// The eleven scenario parameters. Field order is the grid axis order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub business_model: BusinessModel,
    pub ess_desirability_pct: f64,
    pub grid_ess_capacity_mw: f64,
    pub max_ess_energy_rating_mwh: f64,
    pub ess_power_capex_keur_per_mw: f64,
    pub ess_energy_capex_keur_per_mwh: f64,
    pub ess_roundtrip_eff_pct: f64,
    pub res_growth_pct_per_y: f64,
    pub nonres_growth_pct_per_y: f64,
    pub co2_price_growth_pct_per_y: f64,
    pub demand_growth_pct_per_y: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            business_model: BusinessModel::WholesaleArbitrage,
            ess_desirability_pct: 100.0,
            grid_ess_capacity_mw: 1000.0,
            max_ess_energy_rating_mwh: 1000.0,
            ess_power_capex_keur_per_mw: 1.0,
            ess_energy_capex_keur_per_mwh: 1.0,
            ess_roundtrip_eff_pct: 85.0,
            res_growth_pct_per_y: 0.0,
            nonres_growth_pct_per_y: 0.0,
            co2_price_growth_pct_per_y: 0.0,
            demand_growth_pct_per_y: 0.0,
        }
    }
}

/// Column names of the scenario parameters, in grid axis order.
pub const PARAMETER_COLUMNS: [&str; 11] = [
    "business_model",
    "ess_desirability_pct",
    "grid_ess_capacity_mw",
    "max_ess_energy_rating_mwh",
    "ess_power_capex_keur_per_mw",
    "ess_energy_capex_keur_per_mwh",
    "ess_roundtrip_eff_pct",
    "res_growth_pct_per_y",
    "nonres_growth_pct_per_y",
    "co2_price_growth_pct_per_y",
    "demand_growth_pct_per_y",
];

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, ok: bool, what: &str| -> Result<()> {
            if v.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::config(format!("scenario.{name}"), format!("{v} {what}")))
            }
        };
        let d = self.ess_desirability_pct;
        check("ess_desirability_pct", d, (0.0..=100.0).contains(&d), "not in [0, 100]")?;
        let g = self.grid_ess_capacity_mw;
        check("grid_ess_capacity_mw", g, g >= 0.0, "is negative")?;
        let e = self.max_ess_energy_rating_mwh;
        check("max_ess_energy_rating_mwh", e, e >= 0.0, "is negative")?;
        let c = self.ess_power_capex_keur_per_mw;
        check("ess_power_capex_keur_per_mw", c, c >= 0.0, "is negative")?;
        let c = self.ess_energy_capex_keur_per_mwh;
        check("ess_energy_capex_keur_per_mwh", c, c >= 0.0, "is negative")?;
        let eta = self.ess_roundtrip_eff_pct;
        check("ess_roundtrip_eff_pct", eta, eta > 0.0 && eta <= 100.0, "not in (0, 100]")?;
        for (name, v) in [
            ("res_growth_pct_per_y", self.res_growth_pct_per_y),
            ("nonres_growth_pct_per_y", self.nonres_growth_pct_per_y),
            ("co2_price_growth_pct_per_y", self.co2_price_growth_pct_per_y),
            ("demand_growth_pct_per_y", self.demand_growth_pct_per_y),
        ] {
            check(name, v, v > -100.0, "must be above -100")?;
        }
        Ok(())
    }

    pub fn roundtrip_eff(&self) -> f64 {
        self.ess_roundtrip_eff_pct / 100.0
    }

    /// Values formatted for CSV output, in `PARAMETER_COLUMNS` order.
    pub fn csv_values(&self) -> [String; 11] {
        [
            self.business_model.to_string(),
            self.ess_desirability_pct.to_string(),
            self.grid_ess_capacity_mw.to_string(),
            self.max_ess_energy_rating_mwh.to_string(),
            self.ess_power_capex_keur_per_mw.to_string(),
            self.ess_energy_capex_keur_per_mwh.to_string(),
            self.ess_roundtrip_eff_pct.to_string(),
            self.res_growth_pct_per_y.to_string(),
            self.nonres_growth_pct_per_y.to_string(),
            self.co2_price_growth_pct_per_y.to_string(),
            self.demand_growth_pct_per_y.to_string(),
        ]
    }
}
