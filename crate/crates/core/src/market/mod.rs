//! Wholesale clearing, balancing, programs and settlement.

mod auction;
mod balancing;
mod eprogram;
mod settlement;

pub use auction::{clear_double_auction, ClearingResult, CurvePoint};
pub use balancing::{clear_balancing, BalancingResult};
pub use eprogram::{build_eprograms, EProgram, ProgramEntry};
pub use settlement::{settle, SettlementInput};
