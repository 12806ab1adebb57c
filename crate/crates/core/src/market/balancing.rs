//! Balancing market: marginal-price activation of the bid ladder.

use serde::Serialize;

use crate::bidding::{BalancingBid, Direction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingResult {
    /// `None` when the grid is balanced.
    pub direction: Option<Direction>,
    /// Price of the marginal activated bid; `None` when nothing was activated.
    pub price_eur_per_mwh: Option<f64>,
    pub volume_mwh: f64,
    /// Activated quantity per input bid, same order as the input.
    pub activated_mwh: Vec<f64>,
    /// Imbalance left after activation, always non-negative.
    pub residual_mwh: f64,
}

/// Resolve a signed imbalance (positive = excess supply) against the ladder.
///
/// A deficit activates upward bids cheapest first; an excess activates
/// downward bids from the least negative price (cheapest back-off). Bids tied
/// on the marginal price share the remaining need pro rata.
pub fn clear_balancing(imbalance_mwh: f64, ladder: &[BalancingBid]) -> BalancingResult {
    let mut activated = vec![0.0; ladder.len()];
    let direction = if imbalance_mwh < 0.0 {
        Direction::Upward
    } else if imbalance_mwh > 0.0 {
        Direction::Downward
    } else {
        return BalancingResult {
            direction: None,
            price_eur_per_mwh: None,
            volume_mwh: 0.0,
            activated_mwh: activated,
            residual_mwh: 0.0,
        };
    };
    let need = imbalance_mwh.abs();

    let mut idx: Vec<usize> = (0..ladder.len())
        .filter(|&i| ladder[i].direction == direction && ladder[i].quantity_mwh > 0.0)
        .collect();
    let price = |i: usize| ladder[i].price_eur_per_mwh;
    match direction {
        Direction::Upward => idx.sort_by(|&a, &b| price(a).total_cmp(&price(b)).then(a.cmp(&b))),
        Direction::Downward => idx.sort_by(|&a, &b| price(b).total_cmp(&price(a)).then(a.cmp(&b))),
    }

    let mut volume = 0.0;
    let mut marginal = None;
    let mut start = 0;
    while start < idx.len() && volume < need {
        let p = price(idx[start]);
        let end = start + idx[start..].iter().take_while(|&&i| price(i) == p).count();
        let level = &idx[start..end];
        let total: f64 = level.iter().map(|&i| ladder[i].quantity_mwh).sum();
        let take = total.min(need - volume);
        for &i in level {
            activated[i] = if take >= total {
                ladder[i].quantity_mwh
            } else {
                ladder[i].quantity_mwh * take / total
            };
        }
        volume += take;
        marginal = Some(p);
        start = end;
    }

    BalancingResult {
        direction: Some(direction),
        price_eur_per_mwh: marginal,
        volume_mwh: volume,
        activated_mwh: activated,
        residual_mwh: (need - volume).max(0.0),
    }
}
