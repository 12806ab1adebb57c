//! Agent-based simulator of a single-node electricity market with day-ahead
//! and balancing trading, storage owned by producers, and a scenario sweep
//! engine for exploratory analysis of storage profitability.

// `!(x >= lo)` style range checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bidding;
pub mod clock;
pub mod config;
pub mod error;
pub mod market;
pub mod metrics;
pub mod scenario;
pub mod seed;
pub mod sim;
pub mod sweep;
pub mod timeseries;
pub mod validate;
pub mod world;

pub use clock::Clock;
pub use config::EnvironmentConfig;
pub use error::{Error, Result};
pub use metrics::{RunMetrics, ScenarioMetrics};
pub use scenario::{BusinessModel, Scenario};
pub use sweep::{run_sweep, SweepSpec};
pub use world::World;
