//! Wholesale offers and balancing bids.
//!
//! Every participant bids truthfully: plants at marginal cost, loads at their
//! maximum willingness to pay, storage at its average purchase price (when
//! selling) or at the recent average clearing price (when buying).

use serde::Serialize;

use crate::clock::HourType;
use crate::error::{Error, Result};
use crate::scenario::BusinessModel;
use crate::world::{EntityId, EssUnit, Load, PowerPlant, PriceMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Supply,
    Demand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Offer {
    pub quantity_mwh: f64,
    pub price_eur_per_mwh: f64,
    pub side: Side,
    pub origin: EntityId,
}

impl Offer {
    pub fn supply(quantity_mwh: f64, price: f64, origin: EntityId) -> Self {
        Self {
            quantity_mwh,
            price_eur_per_mwh: price,
            side: Side::Supply,
            origin,
        }
    }

    pub fn demand(quantity_mwh: f64, price: f64, origin: EntityId) -> Self {
        Self {
            quantity_mwh,
            price_eur_per_mwh: price,
            side: Side::Demand,
            origin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Upward,
    Downward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancingBid {
    pub quantity_mwh: f64,
    /// Downward bids carry the negated marginal cost of the unit backing off.
    pub price_eur_per_mwh: f64,
    pub direction: Direction,
    pub origin: EntityId,
}

/// Fuel price and properties seen by one plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelQuote {
    /// EUR per fuel unit.
    pub price: f64,
    /// MWh of fuel energy per fuel unit.
    pub energy_value: f64,
    /// tCO2 per MWh of fuel energy.
    pub carbon_content: f64,
}

/// Marginal cost of one MWh from `plant`, EUR/MWh.
///
/// `fuel_price / (efficiency * energy_value) + variable O&M`, plus
/// `carbon_content / efficiency * co2_price` when `co2_price` is given (carbon
/// pricing on). Renewables cost 0.
pub fn plant_marginal_cost(
    plant: &PowerPlant,
    fuel: Option<FuelQuote>,
    co2_price: Option<f64>,
) -> Result<f64> {
    if plant.is_res() {
        return Ok(0.0);
    }
    if !(plant.efficiency > 0.0) {
        return Err(Error::Domain(format!(
            "plant {} has non-positive efficiency {}",
            plant.id, plant.efficiency
        )));
    }
    let Some(fuel) = fuel else {
        return Err(Error::Domain(format!("plant {} has no fuel quote", plant.id)));
    };
    if !(fuel.energy_value > 0.0) {
        return Err(Error::Domain(format!(
            "fuel energy value {} must be positive",
            fuel.energy_value
        )));
    }
    let mut mc = fuel.price / (plant.efficiency * fuel.energy_value) + plant.variable_om_eur_per_mwh;
    if let Some(co2) = co2_price {
        mc += fuel.carbon_content / plant.efficiency * co2;
    }
    Ok(mc)
}

/// Wind and sun availability fractions used for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewableFractions {
    pub wind: f64,
    pub sun: f64,
}

impl RenewableFractions {
    pub fn for_plant(&self, plant: &PowerPlant) -> f64 {
        if plant.technology.is_wind() {
            self.wind
        } else if plant.is_res() {
            self.sun
        } else {
            1.0
        }
    }
}

/// Quantity a plant offers: full capacity for thermal units, capacity times
/// the forecast availability for renewables, nothing when unavailable.
pub fn plant_offer_quantity(plant: &PowerPlant, forecast: RenewableFractions) -> f64 {
    if !plant.available {
        0.0
    } else if plant.is_res() {
        plant.capacity_mw * forecast.for_plant(plant)
    } else {
        plant.capacity_mw
    }
}

/// Wholesale offers of a producer fleet. `marginal_costs` is aligned with
/// `plants`; offer origins are indices into these slices. Zero quantities are
/// dropped.
pub fn producer_wholesale_bids(
    plants: &[PowerPlant],
    marginal_costs: &[f64],
    forecast: RenewableFractions,
    ess: &[EssUnit],
    hour: HourType,
    memory: &PriceMemory,
) -> Vec<Offer> {
    let mut offers = Vec::with_capacity(plants.len() + ess.len());
    for (i, (plant, &mc)) in plants.iter().zip(marginal_costs).enumerate() {
        let q = plant_offer_quantity(plant, forecast);
        if q > 0.0 {
            offers.push(Offer::supply(q, mc, EntityId::Plant(i)));
        }
    }
    for (i, unit) in ess.iter().enumerate() {
        match hour {
            HourType::OffPeak => offers.extend(ess_offpeak_bid(unit, i, memory)),
            HourType::Peak => {
                if let Some(EssPeakOffer::Wholesale(o)) = ess_peak_offer(unit, i) {
                    offers.push(o);
                }
            }
        }
    }
    offers
}

/// Off-peak charging bid: `min(power, energy capacity - content)` at the mean
/// of the remembered clearing prices. Both business models charge this way.
pub fn ess_offpeak_bid(ess: &EssUnit, index: usize, memory: &PriceMemory) -> Option<Offer> {
    let q = ess
        .power_capacity_mw
        .min(ess.energy_capacity_mwh - ess.content_mwh)
        .max(0.0);
    (q > 0.0).then(|| Offer::demand(q, memory.mean(), EntityId::Ess(index)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EssPeakOffer {
    Wholesale(Offer),
    Balancing(BalancingBid),
}

/// Peak discharge offer: `min(power, content)` at the unit's marginal cost.
/// Arbitrage units sell in the wholesale market, reserve units only post an
/// upward balancing bid. An empty store offers nothing.
pub fn ess_peak_offer(ess: &EssUnit, index: usize) -> Option<EssPeakOffer> {
    let q = ess.power_capacity_mw.min(ess.content_mwh).max(0.0);
    if q <= 0.0 {
        return None;
    }
    let origin = EntityId::Ess(index);
    let price = ess.marginal_cost_eur_per_mwh;
    Some(match ess.business_model {
        BusinessModel::WholesaleArbitrage => EssPeakOffer::Wholesale(Offer::supply(q, price, origin)),
        BusinessModel::ReserveCapacity => EssPeakOffer::Balancing(BalancingBid {
            quantity_mwh: q,
            price_eur_per_mwh: price,
            direction: Direction::Upward,
            origin,
        }),
    })
}

/// One demand bid per load at its maximum willingness to pay. A retailer's
/// small loads are a single aggregate load, so this is one bid per retailer.
pub fn consumer_bids(loads: &[Load]) -> Vec<Offer> {
    loads
        .iter()
        .enumerate()
        .filter(|(_, l)| l.hourly_need_mwh > 0.0)
        .map(|(i, l)| Offer::demand(l.hourly_need_mwh, l.willingness_to_pay_eur_per_mwh, EntityId::Load(i)))
        .collect()
}

/// Balancing bids of the flexible, available plants given their wholesale
/// schedule (`scheduled_mwh`, aligned with `plants`), plus reserve-capacity
/// storage in peak hours.
///
/// A plant scheduled at full capacity offers to back off (downward, at minus
/// its marginal cost); any other plant offers its unscheduled headroom upward
/// at its marginal cost.
pub fn producer_balancing_bids(
    plants: &[PowerPlant],
    marginal_costs: &[f64],
    scheduled_mwh: &[f64],
    ess: &[EssUnit],
    hour: HourType,
) -> Vec<BalancingBid> {
    const FULL: f64 = 1e-9;
    let mut bids = Vec::new();
    for (i, plant) in plants.iter().enumerate() {
        if !plant.flexible || !plant.available {
            continue;
        }
        let mc = marginal_costs[i];
        let contracted = scheduled_mwh[i];
        let origin = EntityId::Plant(i);
        if contracted > 0.0 && plant.capacity_mw - contracted <= FULL {
            bids.push(BalancingBid {
                quantity_mwh: plant.capacity_mw,
                price_eur_per_mwh: -mc,
                direction: Direction::Downward,
                origin,
            });
        } else {
            bids.push(BalancingBid {
                quantity_mwh: plant.capacity_mw - contracted,
                price_eur_per_mwh: mc,
                direction: Direction::Upward,
                origin,
            });
        }
    }
    if hour == HourType::Peak {
        for (i, unit) in ess.iter().enumerate() {
            if let Some(EssPeakOffer::Balancing(b)) = ess_peak_offer(unit, i) {
                bids.push(b);
            }
        }
    }
    bids
}

/// Demand-response bids of flexible large loads: they offer to drop
/// `flexible_share` of their scheduled consumption at their willingness to pay.
pub fn consumer_balancing_bids(loads: &[Load], flexible_share: f64) -> Vec<BalancingBid> {
    loads
        .iter()
        .enumerate()
        .filter(|(_, l)| l.flexible && l.consumption_mwh > 0.0 && flexible_share > 0.0)
        .map(|(i, l)| BalancingBid {
            quantity_mwh: l.consumption_mwh * flexible_share,
            price_eur_per_mwh: l.willingness_to_pay_eur_per_mwh,
            direction: Direction::Upward,
            origin: EntityId::Load(i),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Fuel, Technology};
    use crate::world::LoadKind;
    use proptest::prelude::*;

    pub(crate) fn plant(technology: Technology, capacity_mw: f64, efficiency: f64, vom: f64) -> PowerPlant {
        PowerPlant {
            id: 0,
            technology,
            capacity_mw,
            fuel: technology.fuel(),
            efficiency,
            reliability: 1.0,
            variable_om_eur_per_mwh: vom,
            flexible: !technology.is_res() && technology != Technology::Nuclear,
            owner: 0,
            available: true,
            generation_mwh: 0.0,
            emission_tco2: 0.0,
        }
    }

    fn ess(model: BusinessModel, power: f64, cap: f64, content: f64, mc: f64) -> EssUnit {
        EssUnit {
            id: 0,
            owner: 0,
            business_model: model,
            power_capacity_mw: power,
            energy_capacity_mwh: cap,
            content_mwh: content,
            roundtrip_eff: 1.0,
            marginal_cost_eur_per_mwh: mc,
            purchase_cost_eur: 0.0,
            revenue_eur: 0.0,
            npv_eur: 0.0,
            capital_cost_eur: 0.0,
        }
    }

    fn gas(price: f64) -> FuelQuote {
        FuelQuote {
            price,
            energy_value: 1.0,
            carbon_content: 0.20,
        }
    }

    const NO_WIND: RenewableFractions = RenewableFractions { wind: 0.0, sun: 0.0 };

    #[test]
    fn ccgt_marginal_cost_without_carbon() {
        let p = plant(Technology::Ccgt, 500.0, 0.56, 2.0);
        let mc = plant_marginal_cost(&p, Some(gas(20.0)), None).unwrap();
        assert!((mc - (20.0 / 0.56 + 2.0)).abs() < 1e-12);
        assert!((mc - 37.714).abs() < 1e-3);
    }

    #[test]
    fn coal_marginal_cost_with_carbon() {
        let p = plant(Technology::Coal, 500.0, 0.40, 0.0);
        let coal = FuelQuote {
            price: 65.12,
            energy_value: 8.14,
            carbon_content: 0.34,
        };
        let mc = plant_marginal_cost(&p, Some(coal), Some(25.0)).unwrap();
        assert!((mc - 41.25).abs() < 1e-9, "{mc}");
    }

    #[test]
    fn wind_is_free() {
        let p = plant(Technology::WindOnshore, 100.0, 1.0, 5.0);
        assert_eq!(plant_marginal_cost(&p, Some(gas(99.0)), Some(100.0)).unwrap(), 0.0);
    }

    #[test]
    fn zero_efficiency_is_domain_error() {
        let p = plant(Technology::Ccgt, 500.0, 0.0, 0.0);
        assert!(matches!(
            plant_marginal_cost(&p, Some(gas(20.0)), None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn solar_at_night_offers_nothing() {
        let p = plant(Technology::SolarPv, 100.0, 1.0, 0.0);
        let offers = producer_wholesale_bids(
            &[p],
            &[0.0],
            NO_WIND,
            &[],
            HourType::Peak,
            &PriceMemory::new(24, 40.0),
        );
        assert!(offers.is_empty());
    }

    #[test]
    fn thermal_offers_full_capacity_at_mc() {
        let p = plant(Technology::Coal, 500.0, 0.4, 0.0);
        let offers = producer_wholesale_bids(
            &[p],
            &[33.0],
            NO_WIND,
            &[],
            HourType::OffPeak,
            &PriceMemory::new(24, 40.0),
        );
        assert_eq!(offers, vec![Offer::supply(500.0, 33.0, EntityId::Plant(0))]);
    }

    #[test]
    fn wind_offers_forecast_share() {
        let p = plant(Technology::WindOnshore, 100.0, 1.0, 0.0);
        let forecast = RenewableFractions { wind: 0.7, sun: 0.0 };
        let offers =
            producer_wholesale_bids(&[p], &[0.0], forecast, &[], HourType::Peak, &PriceMemory::new(24, 40.0));
        assert_eq!(offers.len(), 1);
        assert!((offers[0].quantity_mwh - 70.0).abs() < 1e-12);
        assert_eq!(offers[0].price_eur_per_mwh, 0.0);
    }

    #[test]
    fn unavailable_plant_offers_nothing() {
        let mut p = plant(Technology::Coal, 500.0, 0.4, 0.0);
        p.available = false;
        assert_eq!(plant_offer_quantity(&p, NO_WIND), 0.0);
    }

    #[test]
    fn offpeak_bid_is_headroom_limited() {
        let unit = ess(BusinessModel::WholesaleArbitrage, 10.0, 100.0, 95.0, 0.0);
        let mut memory = PriceMemory::new(24, 40.0);
        for _ in 0..24 {
            memory.push(40.0);
        }
        let bid = ess_offpeak_bid(&unit, 0, &memory).unwrap();
        assert_eq!(bid.quantity_mwh, 5.0);
        assert_eq!(bid.price_eur_per_mwh, 40.0);
        assert_eq!(bid.side, Side::Demand);
    }

    #[test]
    fn offpeak_bid_with_short_history() {
        let unit = ess(BusinessModel::ReserveCapacity, 10.0, 100.0, 0.0, 0.0);
        let mut memory = PriceMemory::new(24, 40.0);
        memory.push(30.0);
        memory.push(50.0);
        assert_eq!(ess_offpeak_bid(&unit, 0, &memory).unwrap().price_eur_per_mwh, 40.0);
        let empty = PriceMemory::new(24, 33.0);
        assert_eq!(ess_offpeak_bid(&unit, 0, &empty).unwrap().price_eur_per_mwh, 33.0);
    }

    #[test]
    fn full_store_does_not_bid() {
        let unit = ess(BusinessModel::WholesaleArbitrage, 10.0, 100.0, 100.0, 0.0);
        assert!(ess_offpeak_bid(&unit, 0, &PriceMemory::new(24, 40.0)).is_none());
    }

    #[test]
    fn peak_offer_rules() {
        let empty = ess(BusinessModel::WholesaleArbitrage, 10.0, 100.0, 0.0, 0.0);
        assert!(ess_peak_offer(&empty, 0).is_none());

        let wa = ess(BusinessModel::WholesaleArbitrage, 10.0, 100.0, 25.0, 30.0);
        match ess_peak_offer(&wa, 0) {
            Some(EssPeakOffer::Wholesale(o)) => {
                assert_eq!(o.quantity_mwh, 10.0);
                assert_eq!(o.price_eur_per_mwh, 30.0);
                assert_eq!(o.side, Side::Supply);
            }
            other => panic!("{other:?}"),
        }

        let rc = ess(BusinessModel::ReserveCapacity, 10.0, 100.0, 4.0, 30.0);
        match ess_peak_offer(&rc, 0) {
            Some(EssPeakOffer::Balancing(b)) => {
                assert_eq!(b.quantity_mwh, 4.0);
                assert_eq!(b.direction, Direction::Upward);
            }
            other => panic!("{other:?}"),
        }
        // Reserve units never appear in the wholesale peak book.
        let offers = producer_wholesale_bids(
            &[],
            &[],
            NO_WIND,
            &[rc],
            HourType::Peak,
            &PriceMemory::new(24, 40.0),
        );
        assert!(offers.is_empty());
    }

    fn load(kind: LoadKind, need: f64, wtp: f64) -> Load {
        Load {
            id: 0,
            kind,
            owner: 0,
            yearly_consumption_mwh: 0.0,
            hourly_need_mwh: need,
            willingness_to_pay_eur_per_mwh: wtp,
            flexible: false,
            consumption_mwh: 0.0,
        }
    }

    #[test]
    fn consumer_bid_shapes() {
        let bids = consumer_bids(&[
            load(LoadKind::Small, 1200.0, 200.0),
            load(LoadKind::Large, 300.0, 0.0),
            load(LoadKind::Large, 0.0, 90.0),
        ]);
        assert_eq!(
            bids,
            vec![
                Offer::demand(1200.0, 200.0, EntityId::Load(0)),
                Offer::demand(300.0, 0.0, EntityId::Load(1)),
            ]
        );
    }

    #[test]
    fn balancing_bids_follow_schedule() {
        let ccgt = plant(Technology::Ccgt, 500.0, 0.56, 2.0);
        let wind = plant(Technology::WindOnshore, 100.0, 1.0, 0.0);
        let plants = vec![ccgt.clone(), ccgt.clone(), ccgt, wind];
        let mcs = [40.0, 40.0, 40.0, 0.0];
        let bids = producer_balancing_bids(&plants, &mcs, &[500.0, 300.0, 0.0, 70.0], &[], HourType::Peak);
        assert_eq!(bids.len(), 3);
        assert_eq!(
            bids[0],
            BalancingBid {
                quantity_mwh: 500.0,
                price_eur_per_mwh: -40.0,
                direction: Direction::Downward,
                origin: EntityId::Plant(0)
            }
        );
        assert_eq!(bids[1].quantity_mwh, 200.0);
        assert_eq!(bids[1].direction, Direction::Upward);
        assert_eq!(bids[1].price_eur_per_mwh, 40.0);
        assert_eq!(bids[2].quantity_mwh, 500.0);
        assert_eq!(bids[2].direction, Direction::Upward);
    }

    #[test]
    fn reserve_storage_posts_upward_bid_in_peak_only() {
        let rc = ess(BusinessModel::ReserveCapacity, 10.0, 100.0, 50.0, 25.0);
        let peak = producer_balancing_bids(&[], &[], &[], std::slice::from_ref(&rc), HourType::Peak);
        assert_eq!(peak.len(), 1);
        assert_eq!(peak[0].quantity_mwh, 10.0);
        assert_eq!(peak[0].price_eur_per_mwh, 25.0);
        let off = producer_balancing_bids(&[], &[], &[], &[rc], HourType::OffPeak);
        assert!(off.is_empty());
    }

    proptest! {
        #[test]
        fn marginal_cost_monotone(
            fuel_a in 0.0f64..200.0, fuel_b in 0.0f64..200.0,
            co2_a in 0.0f64..150.0, co2_b in 0.0f64..150.0,
            eff in 0.2f64..0.7,
        ) {
            let p = plant(Technology::Ccgt, 500.0, eff, 2.0);
            let (lo_f, hi_f) = (fuel_a.min(fuel_b), fuel_a.max(fuel_b));
            let (lo_c, hi_c) = (co2_a.min(co2_b), co2_a.max(co2_b));
            let mc = |f: f64, c: Option<f64>| plant_marginal_cost(&p, Some(gas(f)), c).unwrap();
            prop_assert!(mc(lo_f, Some(lo_c)) <= mc(hi_f, Some(lo_c)));
            prop_assert!(mc(lo_f, Some(lo_c)) <= mc(lo_f, Some(hi_c)));
            // Carbon on vs off differs by exactly content / eff * price.
            let diff = mc(lo_f, Some(hi_c)) - mc(lo_f, None);
            prop_assert!((diff - 0.20 / eff * hi_c).abs() < 1e-9);
        }

        #[test]
        fn storage_offers_respect_content(
            power in 0.0f64..500.0, cap in 0.0f64..1000.0, fill in 0.0f64..=1.0, mean in 0.0f64..100.0,
        ) {
            let content = cap * fill;
            let mut memory = PriceMemory::new(24, mean);
            memory.push(mean);
            let unit = ess(BusinessModel::WholesaleArbitrage, power, cap, content, 10.0);
            if let Some(b) = ess_offpeak_bid(&unit, 0, &memory) {
                prop_assert!(b.quantity_mwh + content <= cap + 1e-9);
                prop_assert!(b.quantity_mwh <= power);
            }
            if let Some(EssPeakOffer::Wholesale(o)) = ess_peak_offer(&unit, 0) {
                prop_assert!(o.quantity_mwh <= content);
                prop_assert!(o.quantity_mwh <= power);
            }
        }

        #[test]
        fn flexible_volume_bounded_by_capacity(
            sched in prop::collection::vec(0.0f64..=1.0, 1..20),
        ) {
            let plants: Vec<PowerPlant> =
                sched.iter().map(|_| plant(Technology::Ocgt, 500.0, 0.385, 3.0)).collect();
            // Round some schedules to exactly full.
            let scheduled: Vec<f64> = sched
                .iter()
                .map(|&s| if s > 0.9 { 500.0 } else { 500.0 * s })
                .collect();
            let mcs = vec![50.0; plants.len()];
            let bids = producer_balancing_bids(&plants, &mcs, &scheduled, &[], HourType::Peak);
            let up: f64 = bids.iter().filter(|b| b.direction == Direction::Upward).map(|b| b.quantity_mwh).sum();
            let dispatched: f64 = scheduled.iter().sum();
            prop_assert!(up + dispatched <= 500.0 * plants.len() as f64 + 1e-6);
        }
    }

    #[test]
    fn fuel_enum_indexes_are_dense() {
        for (i, f) in Fuel::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
        }
    }
}
