//! The model time wheel.
//!
//! One tick is one model hour. Every 24 ticks form a model day that stands in
//! for a calendar month, and twelve model days make a model year, so a year
//! is 288 ticks.

use serde::{Deserialize, Serialize};

pub const HOURS_PER_DAY: u32 = 24;
pub const DAYS_PER_YEAR: u32 = 12;
pub const TICKS_PER_YEAR: u32 = HOURS_PER_DAY * DAYS_PER_YEAR;
/// Real hours represented by one model hour (a model day is a month).
pub const HOUR_SCALE_FACTOR: f64 = 30.0;
pub const DEFAULT_HORIZON_YEARS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clock {
    pub horizon_ticks: u32,
}

impl Default for Clock {
    fn default() -> Self {
        Self::with_years(DEFAULT_HORIZON_YEARS)
    }
}

impl Clock {
    pub fn with_years(years: u32) -> Self {
        Self {
            horizon_ticks: years * TICKS_PER_YEAR,
        }
    }

    pub fn horizon_years(&self) -> u32 {
        self.horizon_ticks.div_ceil(TICKS_PER_YEAR)
    }

    pub fn ticks(&self) -> std::ops::Range<u32> {
        0..self.horizon_ticks
    }
}

/// 1-based year index used for discounting.
pub fn year(tick: u32) -> u32 {
    tick / TICKS_PER_YEAR + 1
}

pub fn hour_of_day(tick: u32) -> u32 {
    tick % HOURS_PER_DAY
}

/// 0-based month (model day) within the year.
pub fn month(tick: u32) -> u32 {
    (tick / HOURS_PER_DAY) % DAYS_PER_YEAR
}

/// 0-based month counted from the start of the run.
pub fn month_index(tick: u32) -> u32 {
    tick / HOURS_PER_DAY
}

pub fn is_year_start(tick: u32) -> bool {
    tick.is_multiple_of(TICKS_PER_YEAR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HourType {
    Peak,
    OffPeak,
}

/// Peak window, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakHours {
    pub first: u32,
    pub last: u32,
}

impl Default for PeakHours {
    fn default() -> Self {
        Self { first: 9, last: 20 }
    }
}

impl PeakHours {
    pub fn hour_type(&self, tick: u32) -> HourType {
        let h = hour_of_day(tick);
        if (self.first..=self.last).contains(&h) {
            HourType::Peak
        } else {
            HourType::OffPeak
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_horizon_is_twenty_years() {
        let clock = Clock::default();
        assert_eq!(clock.horizon_ticks, 5760);
        assert_eq!(clock.horizon_ticks, 20 * 288);
        assert_eq!(year(5759), 20);
        assert_eq!(year(0), 1);
        assert_eq!(year(287), 1);
        assert_eq!(year(288), 2);
    }

    #[test]
    fn month_wraps_every_year() {
        assert_eq!(month(0), 0);
        assert_eq!(month(23), 0);
        assert_eq!(month(24), 1);
        assert_eq!(month(287), 11);
        assert_eq!(month(288), 0);
        assert_eq!(month_index(288), 12);
    }

    #[test]
    fn peak_window() {
        let peak = PeakHours::default();
        assert_eq!(peak.hour_type(8), HourType::OffPeak);
        assert_eq!(peak.hour_type(9), HourType::Peak);
        assert_eq!(peak.hour_type(20), HourType::Peak);
        assert_eq!(peak.hour_type(21), HourType::OffPeak);
        assert_eq!(peak.hour_type(24 + 12), HourType::Peak);
    }

    proptest! {
        #[test]
        fn clock_algebra(t in 0u32..1_000_000) {
            prop_assert!(hour_of_day(t) < 24);
            prop_assert!(month(t) < 12);
            prop_assert!(year(t + 1) >= year(t));
            prop_assert_eq!(year(t), t / 288 + 1);
            prop_assert_eq!(month(t), (t / 24) % 12);
        }
    }
}
