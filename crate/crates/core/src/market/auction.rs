//! Uniform-price double auction.

use serde::Serialize;

use crate::bidding::{Offer, Side};

/// One step of a cumulative curve: at `price`, `cumulative_mwh` is on offer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub price_eur_per_mwh: f64,
    pub cumulative_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearingResult {
    /// `None` when nothing traded.
    pub price_eur_per_mwh: Option<f64>,
    pub volume_mwh: f64,
    /// Accepted quantity per input offer, same order as the input.
    pub accepted_mwh: Vec<f64>,
    /// Supply steps ascending by price.
    pub supply_curve: Vec<CurvePoint>,
    /// Demand steps descending by price.
    pub demand_curve: Vec<CurvePoint>,
}

impl ClearingResult {
    pub fn traded(&self) -> bool {
        self.price_eur_per_mwh.is_some()
    }
}

/// Offers grouped by identical price.
struct Level {
    price: f64,
    total: f64,
    members: Vec<usize>,
}

fn levels(offers: &[Offer], side: Side) -> Vec<Level> {
    let mut idx: Vec<usize> = (0..offers.len())
        .filter(|&i| offers[i].side == side && offers[i].quantity_mwh > 0.0)
        .collect();
    let price = |i: usize| offers[i].price_eur_per_mwh;
    match side {
        Side::Supply => idx.sort_by(|&a, &b| price(a).total_cmp(&price(b)).then(a.cmp(&b))),
        Side::Demand => idx.sort_by(|&a, &b| price(b).total_cmp(&price(a)).then(a.cmp(&b))),
    }
    let mut out: Vec<Level> = Vec::new();
    for i in idx {
        let p = price(i);
        match out.last_mut() {
            Some(l) if l.price == p => {
                l.total += offers[i].quantity_mwh;
                l.members.push(i);
            }
            _ => out.push(Level {
                price: p,
                total: offers[i].quantity_mwh,
                members: vec![i],
            }),
        }
    }
    out
}

fn curve(levels: &[Level]) -> Vec<CurvePoint> {
    let mut cum = 0.0;
    levels
        .iter()
        .map(|l| {
            cum += l.total;
            CurvePoint {
                price_eur_per_mwh: l.price,
                cumulative_mwh: cum,
            }
        })
        .collect()
}

/// Split `filled` over a level in proportion to member quantities.
fn fill_level(level: &Level, filled: f64, offers: &[Offer], accepted: &mut [f64]) {
    if filled <= 0.0 {
        return;
    }
    if filled >= level.total {
        for &i in &level.members {
            accepted[i] = offers[i].quantity_mwh;
        }
    } else {
        for &i in &level.members {
            accepted[i] = offers[i].quantity_mwh * filled / level.total;
        }
    }
}

/// Clear a uniform-price double auction.
///
/// Supply is walked in ascending and demand in descending price order while
/// the next supply price does not exceed the next demand price. Tied offers on
/// the marginal level share the filled volume pro rata. The price is the
/// lowest price that supports the traded volume: the highest accepted supply
/// price, raised to the highest willingness to pay of any demand left
/// (partly) unserved.
pub fn clear_double_auction(offers: &[Offer]) -> ClearingResult {
    let supply = levels(offers, Side::Supply);
    let demand = levels(offers, Side::Demand);
    let mut accepted = vec![0.0; offers.len()];

    let mut s_fill = vec![0.0; supply.len()];
    let mut d_fill = vec![0.0; demand.len()];
    let (mut i, mut j) = (0, 0);
    let mut volume = 0.0;
    while i < supply.len() && j < demand.len() && supply[i].price <= demand[j].price {
        let q = (supply[i].total - s_fill[i]).min(demand[j].total - d_fill[j]);
        s_fill[i] += q;
        d_fill[j] += q;
        volume += q;
        if s_fill[i] >= supply[i].total {
            i += 1;
        }
        if d_fill[j] >= demand[j].total {
            j += 1;
        }
    }

    let price = if volume > 0.0 {
        let marginal_supply = supply
            .iter()
            .zip(&s_fill)
            .filter(|(_, &f)| f > 0.0)
            .map(|(l, _)| l.price)
            .next_back()
            .expect("positive volume has an accepted supply level");
        let unserved_wtp = demand
            .iter()
            .zip(&d_fill)
            .find(|(l, &f)| f < l.total)
            .map(|(l, _)| l.price);
        Some(match unserved_wtp {
            Some(w) => marginal_supply.max(w),
            None => marginal_supply,
        })
    } else {
        None
    };

    for (l, &f) in supply.iter().zip(&s_fill) {
        fill_level(l, f, offers, &mut accepted);
    }
    for (l, &f) in demand.iter().zip(&d_fill) {
        fill_level(l, f, offers, &mut accepted);
    }

    ClearingResult {
        price_eur_per_mwh: price,
        volume_mwh: volume,
        accepted_mwh: accepted,
        supply_curve: curve(&supply),
        demand_curve: curve(&demand),
    }
}
