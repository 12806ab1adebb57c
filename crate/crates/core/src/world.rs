//! Agents, physical entities and the environment state of one run.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clock::{Clock, TICKS_PER_YEAR};
use crate::config::{EnvironmentConfig, Fuel, Technology};
use crate::error::Result;
use crate::scenario::{BusinessModel, Scenario};
use crate::seed::{derive_seed, Stream};
use crate::sim::ess_invest;
use crate::timeseries::TimeSeries;

pub type AgentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    Producer,
    Retailer,
    LargeConsumer,
    MarketOperator,
}

/// Per-tick cash movements of one agent, in EUR (already hour-scaled).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CashDelta {
    pub wholesale: f64,
    pub balancing: f64,
    pub fines: f64,
    pub co2: f64,
}

impl CashDelta {
    pub fn total(&self) -> f64 {
        self.wholesale + self.balancing + self.fines + self.co2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentAccount {
    pub id: AgentId,
    pub role: Role,
    pub bank_balance_eur: f64,
    pub last_delta: CashDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerPlant {
    /// Unique within a run; never reused.
    pub id: u32,
    pub technology: Technology,
    pub capacity_mw: f64,
    pub fuel: Option<Fuel>,
    pub efficiency: f64,
    pub reliability: f64,
    pub variable_om_eur_per_mwh: f64,
    pub flexible: bool,
    pub owner: AgentId,
    pub available: bool,
    pub generation_mwh: f64,
    pub emission_tco2: f64,
}

impl PowerPlant {
    pub fn is_res(&self) -> bool {
        self.technology.is_res()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssUnit {
    pub id: u32,
    pub owner: AgentId,
    pub business_model: BusinessModel,
    pub power_capacity_mw: f64,
    pub energy_capacity_mwh: f64,
    pub content_mwh: f64,
    pub roundtrip_eff: f64,
    /// Volume-weighted purchase price of the stored energy.
    pub marginal_cost_eur_per_mwh: f64,
    /// Hour-scaled purchase cost and revenue of the last tick.
    pub purchase_cost_eur: f64,
    pub revenue_eur: f64,
    /// Running NPV, starting at minus the capital cost.
    pub npv_eur: f64,
    pub capital_cost_eur: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LoadKind {
    Large,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Load {
    pub id: u32,
    pub kind: LoadKind,
    pub owner: AgentId,
    pub yearly_consumption_mwh: f64,
    pub hourly_need_mwh: f64,
    pub willingness_to_pay_eur_per_mwh: f64,
    pub flexible: bool,
    pub consumption_mwh: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GridState {
    pub inflow_mwh: f64,
    pub outflow_mwh: f64,
    /// Positive means excess supply.
    pub imbalance_mwh: f64,
    pub imbalance_details: Vec<(AgentId, f64)>,
}

/// Exact (unrounded) capacity a technology would have under compound growth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetTarget {
    pub technology: Technology,
    pub target_mw: f64,
    pub unit_size_mw: f64,
}

/// Entity handles used by offers, bids and programs. Indices point into the
/// world's `plants`, `ess` and `loads` vectors and are stable within a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EntityId {
    Plant(usize),
    Ess(usize),
    Load(usize),
}

/// Mean of the last few clearing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMemory {
    window: usize,
    bootstrap: f64,
    prices: VecDeque<f64>,
}

impl PriceMemory {
    pub fn new(window: usize, bootstrap: f64) -> Self {
        Self {
            window,
            bootstrap,
            prices: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, price: f64) {
        if self.prices.len() == self.window {
            self.prices.pop_front();
        }
        self.prices.push_back(price);
    }

    /// Mean of the stored prices, or the bootstrap price when empty.
    pub fn mean(&self) -> f64 {
        if self.prices.is_empty() {
            self.bootstrap
        } else {
            self.prices.iter().sum::<f64>() / self.prices.len() as f64
        }
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Complete mutable state of one simulation run.
#[derive(Debug, Clone)]
pub struct World {
    pub scenario: Scenario,
    pub env: Arc<EnvironmentConfig>,
    pub clock: Clock,
    pub seed: u64,
    pub series: TimeSeries,
    pub accounts: Vec<AgentAccount>,
    pub operator: AgentId,
    pub plants: Vec<PowerPlant>,
    pub fleet: Vec<FleetTarget>,
    pub ess: Vec<EssUnit>,
    pub loads: Vec<Load>,
    pub grid: GridState,
    pub co2_price: f64,
    pub co2_price_history: Vec<f64>,
    pub price_memory: PriceMemory,
    pub last_wind: Option<f64>,
    pub last_sun: Option<f64>,
    pub(crate) availability_rng: ChaCha8Rng,
    pub(crate) outage_rng: ChaCha8Rng,
    next_plant_id: u32,
}

impl World {
    /// Create agents, entities and links. A pure function of its arguments.
    pub fn build(
        scenario: Scenario,
        env: Arc<EnvironmentConfig>,
        clock: Clock,
        seed: u64,
    ) -> Result<Self> {
        scenario.validate()?;
        env.validate()?;
        let series = TimeSeries::build(&env, clock.horizon_ticks, seed)?;

        let mut accounts = Vec::new();
        let mut add = |role| {
            let id = accounts.len();
            accounts.push(AgentAccount {
                id,
                role,
                bank_balance_eur: 0.0,
                last_delta: CashDelta::default(),
            });
            id
        };
        let producers: Vec<AgentId> = (0..env.n_producers).map(|_| add(Role::Producer)).collect();
        let retailers: Vec<AgentId> = (0..env.n_retailers).map(|_| add(Role::Retailer)).collect();
        let consumers: Vec<AgentId> = (0..env.n_large_consumers)
            .map(|_| add(Role::LargeConsumer))
            .collect();
        let operator = add(Role::MarketOperator);

        let total_mw = env.total_generation_capacity_gw * 1000.0;
        let fleet = env
            .technologies
            .iter()
            .map(|t| FleetTarget {
                technology: t.technology,
                target_mw: total_mw * t.share_pct / 100.0,
                unit_size_mw: t.unit_size_mw,
            })
            .collect();

        let loads = build_loads(&env, &retailers, &consumers);
        let ess = ess_invest(&producers, &scenario, &env);

        let mut world = Self {
            scenario,
            co2_price: env.co2_price_initial,
            co2_price_history: Vec::new(),
            price_memory: PriceMemory::new(env.price_memory_ticks, env.bootstrap_price),
            env,
            clock,
            seed,
            series,
            accounts,
            operator,
            plants: Vec::new(),
            fleet,
            ess,
            loads,
            grid: GridState::default(),
            last_wind: None,
            last_sun: None,
            availability_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, Stream::Availability)),
            outage_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, Stream::Outage)),
            next_plant_id: 0,
        };
        world.sync_fleet();
        Ok(world)
    }

    pub fn producers(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.accounts
            .iter()
            .filter(|a| a.role == Role::Producer)
            .map(|a| a.id)
    }

    /// Compound-grow fleets, demand and the CO2 price by one year.
    pub fn yearly_update(&mut self) {
        let s = self.scenario;
        for target in &mut self.fleet {
            let g = if target.technology.is_res() {
                s.res_growth_pct_per_y
            } else {
                s.nonres_growth_pct_per_y
            };
            target.target_mw = (target.target_mw * (1.0 + g / 100.0)).max(0.0);
        }
        self.sync_fleet();
        let demand = 1.0 + s.demand_growth_pct_per_y / 100.0;
        for load in &mut self.loads {
            load.yearly_consumption_mwh = (load.yearly_consumption_mwh * demand).max(0.0);
        }
        self.co2_price = (self.co2_price * (1.0 + s.co2_price_growth_pct_per_y / 100.0)).max(0.0);
    }

    pub fn group_capacity_mw(&self, res: bool) -> f64 {
        self.plants
            .iter()
            .filter(|p| p.is_res() == res)
            .map(|p| p.capacity_mw)
            .sum()
    }

    pub fn group_target_mw(&self, res: bool) -> f64 {
        self.fleet
            .iter()
            .filter(|f| f.technology.is_res() == res)
            .map(|f| f.target_mw)
            .sum()
    }

    /// Bring unit counts in line with the fleet targets: new units are
    /// appended, surplus units are retired newest first.
    fn sync_fleet(&mut self) {
        let counts = allocate_units(&self.fleet);
        let n_producers = self.env.n_producers;
        let mut plants = Vec::with_capacity(counts.iter().sum());
        for (target, &want) in self.fleet.iter().zip(&counts) {
            let mut existing: Vec<PowerPlant> = self
                .plants
                .iter()
                .filter(|p| p.technology == target.technology)
                .cloned()
                .collect();
            existing.truncate(want);
            let cfg = self
                .env
                .technology(target.technology)
                .expect("fleet targets come from the technology list");
            while existing.len() < want {
                let ordinal = existing.len();
                existing.push(PowerPlant {
                    id: self.next_plant_id,
                    technology: target.technology,
                    capacity_mw: target.unit_size_mw,
                    fuel: target.technology.fuel(),
                    efficiency: cfg.efficiency,
                    reliability: cfg.reliability,
                    variable_om_eur_per_mwh: cfg.variable_om_eur_per_mwh,
                    flexible: cfg.flexible,
                    owner: ordinal % n_producers,
                    available: true,
                    generation_mwh: 0.0,
                    emission_tco2: 0.0,
                });
                self.next_plant_id += 1;
            }
            plants.extend(existing);
        }
        self.plants = plants;
    }

    pub fn ticks_per_year() -> u32 {
        TICKS_PER_YEAR
    }
}

/// Whole-unit counts per fleet entry. Within each group (RES / non-RES) the
/// floors are topped up by largest fractional remainder while a unit still
/// fits under the group target, so the deployed group capacity is at most the
/// target and short of it by less than the group's largest unit.
pub fn allocate_units(fleet: &[FleetTarget]) -> Vec<usize> {
    const EPS: f64 = 1e-9;
    let mut counts: Vec<usize> = fleet
        .iter()
        .map(|f| (f.target_mw / f.unit_size_mw + EPS).floor().max(0.0) as usize)
        .collect();
    for res in [false, true] {
        let members: Vec<usize> = (0..fleet.len())
            .filter(|&i| fleet[i].technology.is_res() == res)
            .collect();
        let mut remaining: f64 = members
            .iter()
            .map(|&i| fleet[i].target_mw - counts[i] as f64 * fleet[i].unit_size_mw)
            .sum();
        let mut order = members.clone();
        let frac = |i: usize| fleet[i].target_mw / fleet[i].unit_size_mw - counts[i] as f64;
        let fracs: Vec<f64> = (0..fleet.len()).map(frac).collect();
        let frac = |i: usize| fracs[i];
        order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
        for i in order {
            if frac(i) > EPS && fleet[i].unit_size_mw <= remaining + EPS {
                counts[i] += 1;
                remaining -= fleet[i].unit_size_mw;
            }
        }
    }
    counts
}

fn build_loads(env: &EnvironmentConfig, retailers: &[AgentId], consumers: &[AgentId]) -> Vec<Load> {
    let total_mwh = env.total_annual_load_gwh * 1000.0;
    let large_total = total_mwh * env.large_load_share_pct / 100.0;
    let small_total = total_mwh - large_total;
    let n_large = consumers.len();
    let n_flexible = ((env.flexible_load_pct / 100.0) * n_large as f64).round() as usize;
    let mut loads = Vec::with_capacity(retailers.len() + n_large);
    for (i, &owner) in consumers.iter().enumerate() {
        let wtp = if n_large == 1 {
            env.large_consumer_wtp_min
        } else {
            env.large_consumer_wtp_min
                + (env.large_consumer_wtp_max - env.large_consumer_wtp_min) * i as f64
                    / (n_large - 1) as f64
        };
        loads.push(Load {
            id: loads.len() as u32,
            kind: LoadKind::Large,
            owner,
            yearly_consumption_mwh: large_total / n_large as f64,
            hourly_need_mwh: 0.0,
            willingness_to_pay_eur_per_mwh: wtp,
            flexible: i < n_flexible,
            consumption_mwh: 0.0,
        });
    }
    // Each retailer's small loads are represented by one aggregate load.
    for &owner in retailers {
        loads.push(Load {
            id: loads.len() as u32,
            kind: LoadKind::Small,
            owner,
            yearly_consumption_mwh: small_total / retailers.len() as f64,
            hourly_need_mwh: 0.0,
            willingness_to_pay_eur_per_mwh: env.small_consumer_wtp,
            flexible: false,
            consumption_mwh: 0.0,
        });
    }
    loads
}
