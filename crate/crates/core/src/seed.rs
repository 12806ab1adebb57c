//! Seed derivation.
//!
//! All mixing goes through SplitMix64's finalizer, which is plain wrapping
//! 64-bit integer arithmetic and therefore bit-exact on every platform.

use crate::config::Fuel;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `x + GOLDEN_GAMMA`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` of scenario `scenario_id`:
/// `splitmix64(splitmix64(splitmix64(base_seed) ^ scenario_id) ^ rep)`.
pub fn run_seed(base_seed: u64, scenario_id: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ scenario_id) ^ rep)
}

/// Independent random streams used inside one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Availability,
    Outage,
    Wind,
    Sun,
    LoadProfile,
    Fuel(Fuel),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Availability => 1,
            Stream::Outage => 2,
            Stream::Wind => 3,
            Stream::Sun => 4,
            Stream::LoadProfile => 5,
            Stream::Fuel(f) => 16 + f.index() as u64,
        }
    }
}

pub fn derive_seed(seed: u64, stream: Stream) -> u64 {
    splitmix64(seed ^ splitmix64(stream.tag()))
}
