//! Integer-microsecond time base.
//!
//! All event ordering and latency arithmetic runs on whole microseconds so
//! that runs are bit-reproducible across platforms. Additions saturate
//! rather than wrap; a saturated timestamp is far beyond any run horizon.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

/// A span of simulated time in whole microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Duration(u64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_micros(us: u64) -> Self {
        Duration(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        Duration(ms.saturating_mul(1_000))
    }

    pub const fn from_secs(s: u64) -> Self {
        Duration(s.saturating_mul(1_000_000))
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn saturating_add(self, rhs: Duration) -> Duration {
        Duration(self.0.saturating_add(rhs.0))
    }

    pub fn saturating_sub(self, rhs: Duration) -> Duration {
        Duration(self.0.saturating_sub(rhs.0))
    }

    pub fn saturating_mul(self, k: u64) -> Duration {
        Duration(self.0.saturating_mul(k))
    }

    /// Multiplies by 3/2, rounding half-up to a whole microsecond.
    pub fn times_one_point_five(self) -> Duration {
        Duration(self.0.saturating_mul(3).saturating_add(1) / 2)
    }

    /// Scales by a non-negative factor, rounding half-up.
    pub fn scale(self, factor: f64) -> Duration {
        debug_assert!(factor.is_finite() && factor >= 0.0);
        Duration((self.0 as f64 * factor + 0.5).floor() as u64)
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        self.saturating_add(rhs)
    }
}

impl AddAssign for Duration {
    fn add_assign(&mut self, rhs: Duration) {
        *self = *self + rhs;
    }
}

impl Sub for Duration {
    type Output = Duration;
    fn sub(self, rhs: Duration) -> Duration {
        self.saturating_sub(rhs)
    }
}

impl Mul<u64> for Duration {
    type Output = Duration;
    fn mul(self, k: u64) -> Duration {
        self.saturating_mul(k)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// An absolute simulation timestamp in microseconds since run start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1_000_000.0
    }

    /// Time elapsed since `earlier`; zero if `earlier` is in the future.
    pub fn since(self, earlier: SimTime) -> Duration {
        Duration(self.0.saturating_sub(earlier.0))
    }
}

impl Add<Duration> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: Duration) -> SimTime {
        SimTime(self.0.saturating_add(rhs.as_micros()))
    }
}

impl AddAssign<Duration> for SimTime {
    fn add_assign(&mut self, rhs: Duration) {
        *self = *self + rhs;
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duration_arithmetic_saturates() {
        let big = Duration::from_micros(u64::MAX - 1);
        assert_eq!((big + Duration::from_micros(10)).as_micros(), u64::MAX);
        assert_eq!(
            (Duration::from_micros(3) - Duration::from_micros(5)),
            Duration::ZERO
        );
    }

    #[test]
    fn times_one_point_five_rounds_half_up() {
        assert_eq!(Duration::from_micros(1).times_one_point_five().as_micros(), 2);
        assert_eq!(Duration::from_micros(2).times_one_point_five().as_micros(), 3);
        assert_eq!(Duration::from_micros(0).times_one_point_five().as_micros(), 0);
        assert_eq!(
            Duration::from_millis(176).times_one_point_five(),
            Duration::from_millis(264)
        );
    }

    #[test]
    fn simtime_since() {
        let a = SimTime::from_micros(100);
        let b = SimTime::from_micros(250);
        assert_eq!(b.since(a), Duration::from_micros(150));
        assert_eq!(a.since(b), Duration::ZERO);
    }
}
