//! Electricity programs: accepted allocations mapped to owners and entities.

use serde::Serialize;

use crate::bidding::{Offer, Side};
use crate::error::{Error, Result};
use crate::market::ClearingResult;
use crate::world::{AgentId, EntityId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProgramEntry {
    pub agent: AgentId,
    pub entity: EntityId,
    /// Positive for scheduled injection, negative for withdrawal.
    pub scheduled_mwh: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EProgram {
    pub entries: Vec<ProgramEntry>,
}

impl EProgram {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Net schedule of one entity.
    pub fn scheduled(&self, entity: EntityId) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.entity == entity)
            .map(|e| e.scheduled_mwh)
            .sum()
    }

    pub fn for_agent(&self, agent: AgentId) -> impl Iterator<Item = &ProgramEntry> {
        self.entries.iter().filter(move |e| e.agent == agent)
    }
}

/// Build the programs of one clearing. `owner_of` resolves an entity to its
/// owning agent; an allocation for an entity it does not know is an internal
/// consistency error.
pub fn build_eprograms(
    result: &ClearingResult,
    offers: &[Offer],
    owner_of: impl Fn(EntityId) -> Option<AgentId>,
) -> Result<EProgram> {
    if result.accepted_mwh.len() != offers.len() {
        return Err(Error::Consistency(format!(
            "clearing result has {} allocations for {} offers",
            result.accepted_mwh.len(),
            offers.len()
        )));
    }
    let mut entries = Vec::new();
    for (offer, &q) in offers.iter().zip(&result.accepted_mwh) {
        if q <= 0.0 {
            continue;
        }
        let agent = owner_of(offer.origin).ok_or_else(|| {
            Error::Consistency(format!("allocation for unknown entity {:?}", offer.origin))
        })?;
        let scheduled_mwh = match offer.side {
            Side::Supply => q,
            Side::Demand => -q,
        };
        entries.push(ProgramEntry {
            agent,
            entity: offer.origin,
            scheduled_mwh,
        });
    }
    Ok(EProgram { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::clear_double_auction;

    fn owners(e: EntityId) -> Option<AgentId> {
        match e {
            EntityId::Plant(i) if i < 3 => Some(0),
            EntityId::Ess(0) => Some(1),
            EntityId::Load(i) if i < 2 => Some(7 + i),
            _ => None,
        }
    }

    #[test]
    fn no_trade_gives_empty_program() {
        let offers = [Offer::supply(10.0, 50.0, EntityId::Plant(0)), Offer::demand(10.0, 10.0, EntityId::Load(0))];
        let r = clear_double_auction(&offers);
        assert!(build_eprograms(&r, &offers, owners).unwrap().is_empty());
    }

    #[test]
    fn producer_lists_each_plant() {
        let offers = [
            Offer::supply(50.0, 10.0, EntityId::Plant(0)),
            Offer::supply(50.0, 20.0, EntityId::Plant(1)),
            Offer::demand(80.0, 30.0, EntityId::Load(0)),
        ];
        let r = clear_double_auction(&offers);
        let p = build_eprograms(&r, &offers, owners).unwrap();
        let mine: Vec<_> = p.for_agent(0).map(|e| (e.entity, e.scheduled_mwh)).collect();
        assert_eq!(mine, vec![(EntityId::Plant(0), 50.0), (EntityId::Plant(1), 30.0)]);
        assert_eq!(p.scheduled(EntityId::Load(0)), -80.0);
    }

    #[test]
    fn storage_charge_is_withdrawal() {
        let offers = [Offer::supply(50.0, 10.0, EntityId::Plant(0)), Offer::demand(5.0, 30.0, EntityId::Ess(0))];
        let r = clear_double_auction(&offers);
        let p = build_eprograms(&r, &offers, owners).unwrap();
        assert_eq!(p.scheduled(EntityId::Ess(0)), -5.0);
        assert_eq!(p.for_agent(1).count(), 1);
    }

    #[test]
    fn unknown_entity_is_consistency_error() {
        let offers = [Offer::supply(50.0, 10.0, EntityId::Plant(9)), Offer::demand(5.0, 30.0, EntityId::Load(0))];
        let r = clear_double_auction(&offers);
        assert!(matches!(build_eprograms(&r, &offers, owners), Err(Error::Consistency(_))));
    }
}
