//! Cash settlement of one tick. The market operator is the counterparty of
//! every payment, so the per-tick deltas of all accounts sum to zero.

use crate::market::EProgram;
use crate::world::{AgentAccount, AgentId, CashDelta};

#[derive(Debug, Clone, Copy)]
pub struct SettlementInput<'a> {
    pub wholesale_price: Option<f64>,
    pub program: &'a EProgram,
    pub balancing_price: Option<f64>,
    /// Activated balancing energy per provider, MWh.
    pub activations: &'a [(AgentId, f64)],
    /// Signed real-time deviations per agent, MWh.
    pub deviations: &'a [(AgentId, f64)],
    /// Emissions per agent, tCO2 for this tick.
    pub emissions: &'a [(AgentId, f64)],
    /// `None` when carbon pricing is off.
    pub co2_price: Option<f64>,
    pub hour_scale: f64,
}

#[derive(Clone, Copy)]
enum Item {
    Wholesale,
    Balancing,
    Fines,
    Co2,
}

fn book(delta: &mut CashDelta, item: Item, amount: f64) {
    match item {
        Item::Wholesale => delta.wholesale += amount,
        Item::Balancing => delta.balancing += amount,
        Item::Fines => delta.fines += amount,
        Item::Co2 => delta.co2 += amount,
    }
}

/// Move `amount` from the operator to `agent` (negative amounts flow back).
fn transfer(accounts: &mut [AgentAccount], operator: AgentId, agent: AgentId, item: Item, amount: f64) {
    if amount == 0.0 || agent == operator {
        return;
    }
    book(&mut accounts[agent].last_delta, item, amount);
    book(&mut accounts[operator].last_delta, item, -amount);
}

/// Book this tick's cash flows into `accounts` and return nothing; each
/// account's `last_delta` is replaced and added to its bank balance.
///
/// Sellers receive and buyers pay the clearing price on their program;
/// balancing providers receive the balancing price on activated energy;
/// deviators pay `|deviation| x |balancing price|`; emitters pay the CO2
/// price. Every amount is multiplied by `hour_scale`.
pub fn settle(input: &SettlementInput, accounts: &mut [AgentAccount], operator: AgentId) {
    for a in accounts.iter_mut() {
        a.last_delta = CashDelta::default();
    }
    let k = input.hour_scale;
    if let Some(p) = input.wholesale_price {
        for e in &input.program.entries {
            transfer(accounts, operator, e.agent, Item::Wholesale, e.scheduled_mwh * p * k);
        }
    }
    if let Some(p) = input.balancing_price {
        for &(agent, q) in input.activations {
            transfer(accounts, operator, agent, Item::Balancing, q * p * k);
        }
        for &(agent, dev) in input.deviations {
            transfer(accounts, operator, agent, Item::Fines, -(dev.abs() * p.abs() * k));
        }
    }
    if let Some(c) = input.co2_price {
        for &(agent, t) in input.emissions {
            transfer(accounts, operator, agent, Item::Co2, -(t * c * k));
        }
    }
    for a in accounts.iter_mut() {
        a.bank_balance_eur += a.last_delta.total();
    }
}
