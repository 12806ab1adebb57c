//! Per-tick orchestration of one simulation run.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::bidding::{
    consumer_balancing_bids, consumer_bids, plant_marginal_cost, producer_balancing_bids,
    producer_wholesale_bids, Direction, FuelQuote, RenewableFractions,
};
use crate::clock::{is_year_start, year, TICKS_PER_YEAR};
use crate::config::{EnvironmentConfig, Fuel};
use crate::error::{Error, Result};
use crate::market::{build_eprograms, clear_balancing, clear_double_auction, settle, SettlementInput};
use crate::scenario::Scenario;
use crate::world::{AgentId, EntityId, EssUnit, LoadKind, World};

/// Magnitudes below this are treated as zero energy.
pub const ENERGY_EPS: f64 = 1e-9;

/// Allocate storage projects to the first `k` producers, where `k` is the
/// desired share of producers rounded half away from zero. The grid storage
/// capacity is split evenly; each project gets the maximum energy rating.
pub fn ess_invest(producers: &[AgentId], scenario: &Scenario, _env: &EnvironmentConfig) -> Vec<EssUnit> {
    let n = producers.len();
    let k = ((scenario.ess_desirability_pct / 100.0 * n as f64).round() as usize).min(n);
    if k == 0 {
        return Vec::new();
    }
    let power = scenario.grid_ess_capacity_mw / k as f64;
    let energy = scenario.max_ess_energy_rating_mwh;
    let capital = power * scenario.ess_power_capex_keur_per_mw * 1000.0
        + energy * scenario.ess_energy_capex_keur_per_mwh * 1000.0;
    producers[..k]
        .iter()
        .enumerate()
        .map(|(i, &owner)| EssUnit {
            id: i as u32,
            owner,
            business_model: scenario.business_model,
            power_capacity_mw: power,
            energy_capacity_mwh: energy,
            content_mwh: 0.0,
            roundtrip_eff: scenario.roundtrip_eff(),
            marginal_cost_eur_per_mwh: 0.0,
            purchase_cost_eur: 0.0,
            revenue_eur: 0.0,
            npv_eur: -capital,
            capital_cost_eur: capital,
        })
        .collect()
}

/// Hour-scaled cash flows of one storage project in one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub revenue_eur: f64,
    pub purchase_eur: f64,
}

/// Physical storage activity of one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EssTickFlows {
    pub charged_mwh: f64,
    pub charge_price: f64,
    pub discharged_mwh: f64,
    pub discharge_price: f64,
}

/// Apply a tick's charge/discharge to a storage unit and advance its running
/// NPV. Charging stores `efficiency x charged`; the marginal cost becomes the
/// volume-weighted purchase price of the content. Fixed O&M for the whole year
/// is booked at the first tick of each year.
pub fn update_ess_status(
    ess: &mut EssUnit,
    tick: u32,
    flows: EssTickFlows,
    interest_rate_pct: f64,
    fixed_om_eur_per_mw_y: f64,
    hour_scale: f64,
) -> LedgerEntry {
    let discount = (1.0 + interest_rate_pct / 100.0).powi(year(tick) as i32);
    if is_year_start(tick) && fixed_om_eur_per_mw_y != 0.0 {
        ess.npv_eur -= fixed_om_eur_per_mw_y * ess.power_capacity_mw / discount;
    }
    let mut purchase = 0.0;
    let mut revenue = 0.0;
    if flows.charged_mwh > 0.0 {
        let content = ess.content_mwh + ess.roundtrip_eff * flows.charged_mwh;
        ess.marginal_cost_eur_per_mwh = (ess.content_mwh * ess.marginal_cost_eur_per_mwh
            + flows.charged_mwh * flows.charge_price)
            / content;
        ess.content_mwh = content.min(ess.energy_capacity_mwh);
        purchase = flows.charged_mwh * flows.charge_price;
    }
    if flows.discharged_mwh > 0.0 {
        ess.content_mwh -= flows.discharged_mwh;
        if ess.content_mwh < ENERGY_EPS {
            ess.content_mwh = 0.0;
            ess.marginal_cost_eur_per_mwh = 0.0;
        }
        revenue = flows.discharged_mwh * flows.discharge_price;
    }
    ess.purchase_cost_eur = hour_scale * purchase;
    ess.revenue_eur = hour_scale * revenue;
    ess.npv_eur += (ess.revenue_eur - ess.purchase_cost_eur) / discount;
    LedgerEntry {
        revenue_eur: ess.revenue_eur,
        purchase_eur: ess.purchase_cost_eur,
    }
}

/// Output of a renewable plant whose schedule was based on `forecast` when
/// the resource turns out to be `realized`.
pub fn realized_res_output(scheduled_mwh: f64, forecast: f64, realized: f64) -> f64 {
    if forecast > 0.0 {
        scheduled_mwh * realized / forecast
    } else {
        0.0
    }
}

/// Per-plant renewable deviations (realized minus scheduled output) summed
/// per owning agent. Non-renewable plants contribute nothing here.
pub fn compute_imbalance_source(
    forecast: RenewableFractions,
    realized: RenewableFractions,
    plants: &[crate::world::PowerPlant],
    scheduled_mwh: &[f64],
) -> Vec<(AgentId, f64)> {
    let mut out: Vec<(AgentId, f64)> = Vec::new();
    for (p, &s) in plants.iter().zip(scheduled_mwh) {
        if !p.is_res() || s <= 0.0 {
            continue;
        }
        let dev = realized_res_output(s, forecast.for_plant(p), realized.for_plant(p)) - s;
        match out.iter_mut().find(|(a, _)| *a == p.owner) {
            Some((_, v)) => *v += dev,
            None => out.push((p.owner, dev)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickRecord {
    pub tick: u32,
    pub price: Option<f64>,
    pub volume_mwh: f64,
    pub imbalance_mwh: f64,
    pub bal_direction: Option<Direction>,
    pub bal_price: Option<f64>,
    pub bal_volume_mwh: f64,
    pub blackout: bool,
    pub unserved_mwh: f64,
    pub curtailed_mwh: f64,
    /// Hour-scaled emission of the tick.
    pub co2_tco2: f64,
    /// Sum of all accounts' cash deltas; zero up to rounding.
    pub cash_sum_eur: f64,
    /// Sum of absolute cash deltas, the scale for `cash_sum_eur`.
    pub cash_gross_eur: f64,
    /// Injections minus withdrawals after curtailment and shedding.
    pub energy_residual_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssLedger {
    pub id: u32,
    pub power_capacity_mw: f64,
    pub capital_cost_eur: f64,
    pub flows: Vec<LedgerEntry>,
    pub running_npv_eur: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub ticks: Vec<TickRecord>,
    pub ess: Vec<EssLedger>,
    pub blackout_counter: u32,
    /// Hour-scaled.
    pub cumulative_emission_tco2: f64,
    pub interest_rate_pct_per_y: f64,
    pub fixed_om_eur_per_mw_y: f64,
}

pub struct TickOutcome {
    pub record: TickRecord,
    pub ess_flows: Vec<LedgerEntry>,
}

/// Execute one tick: availability, bidding, clearing, programs, dispatch,
/// imbalance, balancing, residual handling, settlement, storage update and
/// history update, in that order.
pub fn run_tick(world: &mut World, tick: u32) -> Result<TickOutcome> {
    let env = world.env.clone();
    let hour = env.peak_hours.hour_type(tick);
    let scale = env.hour_scale_factor;

    // Availability and load needs.
    for p in &mut world.plants {
        p.available = world.availability_rng.random_bool(p.reliability.clamp(0.0, 1.0));
        p.generation_mwh = 0.0;
        p.emission_tco2 = 0.0;
    }
    let profile = world.series.load_profile.at(tick);
    for l in &mut world.loads {
        l.hourly_need_mwh = l.yearly_consumption_mwh * profile;
        l.consumption_mwh = 0.0;
    }

    // Forecast by persistence.
    let realized = RenewableFractions {
        wind: world.series.wind.at(tick),
        sun: world.series.sun.at(tick),
    };
    let forecast = RenewableFractions {
        wind: world.last_wind.unwrap_or(realized.wind),
        sun: world.last_sun.unwrap_or(realized.sun),
    };

    // Wholesale bids and clearing.
    let co2 = env.carbon_pricing.then_some(world.co2_price);
    let mut quotes: [Option<FuelQuote>; 3] = [None; 3];
    for f in Fuel::ALL {
        if let Some(cfg) = env.fuel(f) {
            quotes[f.index()] = Some(FuelQuote {
                price: world.series.fuel_price(f, tick),
                energy_value: cfg.energy_value,
                carbon_content: cfg.carbon_content,
            });
        }
    }
    let mcs = world
        .plants
        .iter()
        .map(|p| plant_marginal_cost(p, p.fuel.and_then(|f| quotes[f.index()]), co2))
        .collect::<Result<Vec<f64>>>()?;
    let mut offers = producer_wholesale_bids(&world.plants, &mcs, forecast, &world.ess, hour, &world.price_memory);
    offers.extend(consumer_bids(&world.loads));
    let clearing = clear_double_auction(&offers);
    let price = clearing.price_eur_per_mwh;

    let program = {
        let (plants, ess, loads) = (&world.plants, &world.ess, &world.loads);
        build_eprograms(&clearing, &offers, |e| match e {
            EntityId::Plant(i) => plants.get(i).map(|p| p.owner),
            EntityId::Ess(i) => ess.get(i).map(|u| u.owner),
            EntityId::Load(i) => loads.get(i).map(|l| l.owner),
        })?
    };

    let mut plant_sched = vec![0.0; world.plants.len()];
    let mut ess_charge = vec![0.0; world.ess.len()];
    let mut ess_discharge = vec![0.0; world.ess.len()];
    let mut load_sched = vec![0.0; world.loads.len()];
    for e in &program.entries {
        match e.entity {
            EntityId::Plant(i) => plant_sched[i] += e.scheduled_mwh,
            EntityId::Ess(i) if e.scheduled_mwh < 0.0 => ess_charge[i] -= e.scheduled_mwh,
            EntityId::Ess(i) => ess_discharge[i] += e.scheduled_mwh,
            EntityId::Load(i) => load_sched[i] -= e.scheduled_mwh,
        }
    }

    // Physical dispatch and deviations.
    let mut agent_dev = vec![0.0; world.accounts.len()];
    for (p, &s) in world.plants.iter_mut().zip(&plant_sched) {
        if p.is_res() {
            p.generation_mwh = realized_res_output(s, forecast.for_plant(p), realized.for_plant(p));
        } else if s > 0.0
            && env.forced_outage_prob > 0.0
            && world.outage_rng.random_bool(env.forced_outage_prob.clamp(0.0, 1.0))
        {
            p.available = false;
            p.generation_mwh = 0.0;
        } else {
            p.generation_mwh = s;
        }
        agent_dev[p.owner] += p.generation_mwh - s;
    }
    for (l, &s) in world.loads.iter_mut().zip(&load_sched) {
        // Retail demand is inelastic in real time; large consumers take what
        // they bought.
        l.consumption_mwh = match l.kind {
            LoadKind::Small => l.hourly_need_mwh,
            LoadKind::Large => s,
        };
        agent_dev[l.owner] -= l.consumption_mwh - s;
    }
    let mut imbalance: f64 = agent_dev.iter().sum();
    if imbalance.abs() < ENERGY_EPS {
        imbalance = 0.0;
    }

    // Balancing.
    let mut ladder = producer_balancing_bids(&world.plants, &mcs, &plant_sched, &world.ess, hour);
    ladder.extend(consumer_balancing_bids(&world.loads, env.flexible_load_pct / 100.0));
    let balancing = clear_balancing(imbalance, &ladder);
    let mut ess_bal = vec![0.0; world.ess.len()];
    let mut activations: Vec<(AgentId, f64)> = Vec::new();
    for (bid, &a) in ladder.iter().zip(&balancing.activated_mwh) {
        if a <= 0.0 {
            continue;
        }
        let sign = match bid.direction {
            Direction::Upward => 1.0,
            Direction::Downward => -1.0,
        };
        let owner = match bid.origin {
            EntityId::Plant(i) => {
                let p = &mut world.plants[i];
                p.generation_mwh = (p.generation_mwh + sign * a).max(0.0);
                p.owner
            }
            EntityId::Ess(i) => {
                ess_bal[i] += a;
                world.ess[i].owner
            }
            EntityId::Load(i) => {
                let l = &mut world.loads[i];
                l.consumption_mwh = (l.consumption_mwh - a).max(0.0);
                l.owner
            }
        };
        activations.push((owner, a));
    }

    // Residual: curtail excess, shed deficit.
    let inflow = |w: &World, dis: &[f64]| -> f64 {
        w.plants.iter().map(|p| p.generation_mwh).sum::<f64>()
            + dis.iter().sum::<f64>()
    };
    let outflow = |w: &World| -> f64 {
        w.loads.iter().map(|l| l.consumption_mwh).sum::<f64>() + ess_charge.iter().sum::<f64>()
    };
    let discharged: Vec<f64> = ess_discharge.iter().zip(&ess_bal).map(|(a, b)| a + b).collect();
    let mut curtailed = 0.0;
    let mut unserved = 0.0;
    if balancing.residual_mwh > ENERGY_EPS {
        if imbalance > 0.0 {
            curtailed = curtail(world, balancing.residual_mwh);
        } else {
            unserved = balancing.residual_mwh;
        }
    }
    let blackout = unserved > 0.0;
    let energy_residual = inflow(world, &discharged) - outflow(world) + unserved;

    // Emissions and settlement.
    let mut emissions: Vec<(AgentId, f64)> = Vec::new();
    let mut tick_emission = 0.0;
    for p in &mut world.plants {
        if let Some(f) = p.fuel {
            let content = quotes[f.index()].map_or(0.0, |q| q.carbon_content);
            p.emission_tco2 = p.generation_mwh * content / p.efficiency;
            if p.emission_tco2 > 0.0 {
                tick_emission += p.emission_tco2;
                emissions.push((p.owner, p.emission_tco2));
            }
        }
    }
    let deviations: Vec<(AgentId, f64)> = agent_dev
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() >= ENERGY_EPS)
        .map(|(a, &d)| (a, d))
        .collect();
    settle(
        &SettlementInput {
            wholesale_price: price,
            program: &program,
            balancing_price: balancing.price_eur_per_mwh,
            activations: &activations,
            deviations: &deviations,
            emissions: &emissions,
            co2_price: co2,
            hour_scale: scale,
        },
        &mut world.accounts,
        world.operator,
    );
    let cash_sum = world.accounts.iter().map(|a| a.last_delta.total()).sum();
    let cash_gross = world
        .accounts
        .iter()
        .map(|a| {
            let d = a.last_delta;
            d.wholesale.abs() + d.balancing.abs() + d.fines.abs() + d.co2.abs()
        })
        .sum();

    // Storage status.
    let interest = env.interest_rate_pct_per_y;
    let om = env.ess_fixed_om_eur_per_mw_y;
    let mut ess_flows = Vec::with_capacity(world.ess.len());
    for (i, unit) in world.ess.iter_mut().enumerate() {
        let mut flows = EssTickFlows::default();
        if ess_charge[i] > 0.0 {
            flows.charged_mwh = ess_charge[i];
            flows.charge_price = price.ok_or_else(|| Error::Consistency("charge without a price".into()))?;
        }
        if ess_discharge[i] > 0.0 {
            flows.discharged_mwh = ess_discharge[i];
            flows.discharge_price = price.ok_or_else(|| Error::Consistency("discharge without a price".into()))?;
        } else if ess_bal[i] > 0.0 {
            flows.discharged_mwh = ess_bal[i];
            flows.discharge_price = balancing
                .price_eur_per_mwh
                .ok_or_else(|| Error::Consistency("activation without a price".into()))?;
        }
        ess_flows.push(update_ess_status(unit, tick, flows, interest, om, scale));
    }

    // Grid and history.
    world.grid.inflow_mwh = inflow(world, &discharged);
    world.grid.outflow_mwh = outflow(world);
    world.grid.imbalance_mwh = imbalance;
    world.grid.imbalance_details = deviations;
    if let Some(p) = price {
        world.price_memory.push(p);
    }
    world.co2_price_history.push(world.co2_price);
    world.last_wind = Some(realized.wind);
    world.last_sun = Some(realized.sun);

    Ok(TickOutcome {
        record: TickRecord {
            tick,
            price,
            volume_mwh: clearing.volume_mwh,
            imbalance_mwh: imbalance,
            bal_direction: balancing.direction,
            bal_price: balancing.price_eur_per_mwh,
            bal_volume_mwh: balancing.volume_mwh,
            blackout,
            unserved_mwh: unserved,
            curtailed_mwh: curtailed,
            co2_tco2: tick_emission * scale,
            cash_sum_eur: cash_sum,
            cash_gross_eur: cash_gross,
            energy_residual_mwh: energy_residual,
        },
        ess_flows,
    })
}

/// Remove `excess` MWh of generation, pro rata over renewable output first
/// and then over thermal output. Returns the amount curtailed.
fn curtail(world: &mut World, excess: f64) -> f64 {
    let mut left = excess;
    for res in [true, false] {
        if left <= 0.0 {
            break;
        }
        let total: f64 = world
            .plants
            .iter()
            .filter(|p| p.is_res() == res)
            .map(|p| p.generation_mwh)
            .sum();
        if total <= 0.0 {
            continue;
        }
        let cut = left.min(total);
        for p in world.plants.iter_mut().filter(|p| p.is_res() == res) {
            p.generation_mwh -= p.generation_mwh * cut / total;
        }
        left -= cut;
    }
    excess - left
}

/// Run the world to its horizon. Fleets, demand and the CO2 price grow at
/// every year boundary after the first.
pub fn run(world: &mut World) -> Result<RunRecord> {
    let horizon = world.clock.horizon_ticks;
    let mut record = RunRecord {
        seed: world.seed,
        ticks: Vec::with_capacity(horizon as usize),
        ess: world
            .ess
            .iter()
            .map(|u| EssLedger {
                id: u.id,
                power_capacity_mw: u.power_capacity_mw,
                capital_cost_eur: u.capital_cost_eur,
                flows: Vec::with_capacity(horizon as usize),
                running_npv_eur: u.npv_eur,
            })
            .collect(),
        blackout_counter: 0,
        cumulative_emission_tco2: 0.0,
        interest_rate_pct_per_y: world.env.interest_rate_pct_per_y,
        fixed_om_eur_per_mw_y: world.env.ess_fixed_om_eur_per_mw_y,
    };
    for tick in world.clock.ticks() {
        if tick > 0 && tick % TICKS_PER_YEAR == 0 {
            world.yearly_update();
        }
        let out = run_tick(world, tick)?;
        if out.record.blackout {
            record.blackout_counter += 1;
        }
        record.cumulative_emission_tco2 += out.record.co2_tco2;
        for (ledger, flow) in record.ess.iter_mut().zip(out.ess_flows) {
            ledger.flows.push(flow);
        }
        record.ticks.push(out.record);
    }
    for (ledger, unit) in record.ess.iter_mut().zip(&world.ess) {
        ledger.running_npv_eur = unit.npv_eur;
    }
    Ok(record)
}

pub const TRACE_COLUMNS: [&str; 9] = [
    "tick", "price", "volume", "bal_dir", "bal_price", "bal_vol", "blackout", "curtailed", "co2",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn write_trace(record: &RunRecord, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e| Error::csv("trace", e);
    w.write_record(TRACE_COLUMNS).map_err(err)?;
    for t in &record.ticks {
        let dir = match t.bal_direction {
            Some(Direction::Upward) => "up",
            Some(Direction::Downward) => "down",
            None => "none",
        };
        w.write_record([
            t.tick.to_string(),
            opt(t.price),
            t.volume_mwh.to_string(),
            dir.to_string(),
            opt(t.bal_price),
            t.bal_volume_mwh.to_string(),
            u8::from(t.blackout).to_string(),
            t.curtailed_mwh.to_string(),
            t.co2_tco2.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("trace", e))?;
    Ok(())
}

pub fn write_trace_file(record: &RunRecord, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(record, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Clock;
    use crate::config::Technology;
    use crate::scenario::BusinessModel;
    use std::sync::Arc;

    fn world(scenario: Scenario, env: EnvironmentConfig, years: u32, seed: u64) -> World {
        World::build(scenario, Arc::new(env), Clock::with_years(years), seed).unwrap()
    }

    #[test]
    fn ess_invest_examples() {
        let producers = [0, 1, 2, 3, 4];
        let env = EnvironmentConfig::default();
        let none = ess_invest(&producers, &Scenario { ess_desirability_pct: 0.0, ..Scenario::default() }, &env);
        assert!(none.is_empty());

        let full = ess_invest(&producers, &Scenario::default(), &env);
        assert_eq!(full.len(), 5);
        for u in &full {
            assert_eq!(u.power_capacity_mw, 200.0);
            assert_eq!(u.energy_capacity_mwh, 1000.0);
        }

        let costly = ess_invest(
            &producers,
            &Scenario {
                ess_power_capex_keur_per_mw: 100.0,
                ess_energy_capex_keur_per_mwh: 100.0,
                ..Scenario::default()
            },
            &env,
        );
        assert_eq!(costly[0].capital_cost_eur, 120_000_000.0);
        assert_eq!(costly[0].npv_eur, -120_000_000.0);

        // 50% of 5 producers rounds half away from zero.
        let half = ess_invest(&producers, &Scenario { ess_desirability_pct: 50.0, ..Scenario::default() }, &env);
        assert_eq!(half.len(), 3);
        assert_eq!(half.iter().map(|u| u.owner).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    fn unit(content: f64, mc: f64) -> EssUnit {
        EssUnit {
            id: 0,
            owner: 0,
            business_model: BusinessModel::WholesaleArbitrage,
            power_capacity_mw: 100.0,
            energy_capacity_mwh: 100.0,
            content_mwh: content,
            roundtrip_eff: 1.0,
            marginal_cost_eur_per_mwh: mc,
            purchase_cost_eur: 0.0,
            revenue_eur: 0.0,
            npv_eur: 0.0,
            capital_cost_eur: 0.0,
        }
    }

    #[test]
    fn charging_is_discounted_purchase() {
        let mut u = unit(0.0, 0.0);
        // Tick 1 is inside year 1; tick 0 would also be a year start.
        let entry = update_ess_status(
            &mut u,
            1,
            EssTickFlows { charged_mwh: 10.0, charge_price: 40.0, ..Default::default() },
            5.0,
            0.0,
            30.0,
        );
        assert_eq!(entry.purchase_eur, 12_000.0);
        assert!((u.npv_eur + 30.0 * 400.0 / 1.05).abs() < 1e-9);
        assert!((u.npv_eur + 11_428.571).abs() < 1e-3);
    }

    #[test]
    fn marginal_cost_is_volume_weighted() {
        let mut u = unit(10.0, 20.0);
        update_ess_status(
            &mut u,
            5,
            EssTickFlows { charged_mwh: 10.0, charge_price: 40.0, ..Default::default() },
            5.0,
            0.0,
            30.0,
        );
        assert_eq!(u.content_mwh, 20.0);
        assert_eq!(u.marginal_cost_eur_per_mwh, 30.0);
    }

    #[test]
    fn efficiency_applies_on_charge() {
        let mut u = unit(0.0, 0.0);
        u.roundtrip_eff = 0.7;
        update_ess_status(
            &mut u,
            5,
            EssTickFlows { charged_mwh: 10.0, charge_price: 35.0, ..Default::default() },
            5.0,
            0.0,
            30.0,
        );
        assert!((u.content_mwh - 7.0).abs() < 1e-12);
        assert!((u.marginal_cost_eur_per_mwh - 50.0).abs() < 1e-12);
    }

    #[test]
    fn om_booked_at_year_start() {
        let mut u = unit(0.0, 0.0);
        update_ess_status(&mut u, 288, EssTickFlows::default(), 5.0, 1000.0, 30.0);
        assert!((u.npv_eur + 100.0 * 1000.0 / 1.05f64.powi(2)).abs() < 1e-9);
        update_ess_status(&mut u, 289, EssTickFlows::default(), 5.0, 1000.0, 30.0);
        assert!((u.npv_eur + 100.0 * 1000.0 / 1.05f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn emptying_resets_marginal_cost() {
        let mut u = unit(10.0, 30.0);
        update_ess_status(
            &mut u,
            10,
            EssTickFlows { discharged_mwh: 10.0, discharge_price: 50.0, ..Default::default() },
            5.0,
            0.0,
            30.0,
        );
        assert_eq!(u.content_mwh, 0.0);
        assert_eq!(u.marginal_cost_eur_per_mwh, 0.0);
        assert_eq!(u.revenue_eur, 15_000.0);
    }

    #[test]
    fn imbalance_source_examples() {
        let env = EnvironmentConfig::default();
        let cfg = env.technology(Technology::WindOnshore).unwrap();
        let wind = crate::world::PowerPlant {
            id: 0,
            technology: Technology::WindOnshore,
            capacity_mw: 100.0,
            fuel: None,
            efficiency: cfg.efficiency,
            reliability: 1.0,
            variable_om_eur_per_mwh: 0.0,
            flexible: false,
            owner: 2,
            available: true,
            generation_mwh: 0.0,
            emission_tco2: 0.0,
        };
        let f = RenewableFractions { wind: 0.7, sun: 0.0 };
        let r = RenewableFractions { wind: 0.6, sun: 0.0 };
        let dev = compute_imbalance_source(f, r, std::slice::from_ref(&wind), &[70.0]);
        assert_eq!(dev.len(), 1);
        assert_eq!(dev[0].0, 2);
        assert!((dev[0].1 + 10.0).abs() < 1e-9);

        let up = compute_imbalance_source(r, f, std::slice::from_ref(&wind), &[60.0]);
        assert!(up[0].1 > 0.0);
        assert!(compute_imbalance_source(f, r, &[], &[]).is_empty());
    }

    #[test]
    fn default_run_has_horizon_ticks() {
        let mut w = world(Scenario::default(), EnvironmentConfig::default(), 20, 3);
        let rec = run(&mut w).unwrap();
        assert_eq!(rec.ticks.len(), 5760);
        assert_eq!(rec.ess.len(), 5);
        assert!(rec.ess.iter().all(|l| l.flows.len() == 5760));
    }

    #[test]
    fn no_supply_means_blackout() {
        let mut env = EnvironmentConfig::default();
        for t in &mut env.technologies {
            t.reliability = 1e-12;
        }
        let mut w = world(Scenario { ess_desirability_pct: 0.0, ..Scenario::default() }, env, 1, 1);
        let out = run_tick(&mut w, 0).unwrap();
        assert_eq!(out.record.volume_mwh, 0.0);
        assert_eq!(out.record.price, None);
        assert!(out.record.blackout);
        assert!(out.record.unserved_mwh > 0.0);
    }

    #[test]
    fn perfect_foresight_is_balanced() {
        // A constant wind series makes persistence exact.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wind.csv");
        let mut body = String::from("tick_index,value\n");
        for t in 0..288 {
            body.push_str(&format!("{t},80\n"));
        }
        std::fs::write(&path, body).unwrap();
        let mut env = EnvironmentConfig::default();
        env.time_series.wind = Some(path.clone());
        for t in &mut env.technologies {
            t.reliability = 1.0;
            if t.technology == Technology::SolarPv {
                t.share_pct = 0.0;
            }
            if t.technology == Technology::Ccgt {
                t.share_pct = 36.6;
            }
        }
        let mut w = world(Scenario { ess_desirability_pct: 0.0, ..Scenario::default() }, env, 1, 9);
        let rec = run(&mut w).unwrap();
        for t in &rec.ticks {
            assert_eq!(t.imbalance_mwh, 0.0, "tick {}", t.tick);
            assert_eq!(t.bal_direction, None);
        }
    }

    #[test]
    fn per_tick_conservation() {
        for seed in 0..3 {
            let mut w = world(
                Scenario {
                    business_model: if seed % 2 == 0 {
                        BusinessModel::WholesaleArbitrage
                    } else {
                        BusinessModel::ReserveCapacity
                    },
                    res_growth_pct_per_y: 25.0,
                    nonres_growth_pct_per_y: -10.0,
                    demand_growth_pct_per_y: 4.0,
                    ..Scenario::default()
                },
                EnvironmentConfig::default(),
                3,
                seed,
            );
            let rec = run(&mut w).unwrap();
            for t in &rec.ticks {
                assert!(t.cash_sum_eur.abs() <= 1e-6 * t.cash_gross_eur.max(1.0), "{t:?}");
                assert!(t.energy_residual_mwh.abs() <= 1e-9 * 1e3_f64.max(1.0) || t.energy_residual_mwh.abs() < 1e-6, "{t:?}");
                assert!(!(t.blackout && t.curtailed_mwh > 0.0));
            }
            for u in &w.ess {
                assert!(u.content_mwh >= 0.0 && u.content_mwh <= u.energy_capacity_mwh + 1e-9);
            }
        }
    }

    #[test]
    fn run_is_deterministic() {
        let go = || {
            let mut w = world(Scenario::default(), EnvironmentConfig::default(), 1, 77);
            run(&mut w).unwrap()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn trace_has_header_and_rows() {
        let mut w = world(Scenario::default(), EnvironmentConfig::default(), 1, 5);
        let rec = run(&mut w).unwrap();
        let mut buf = Vec::new();
        write_trace(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
        assert_eq!(lines.count(), 288);
    }
}
