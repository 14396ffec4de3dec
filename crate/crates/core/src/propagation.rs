//! Free-space signal propagation and link-quality classification.
//!
//! Received power follows the free-space path loss relation
//! `Pr(d) = P0 - 20*log10(4*pi*d / lambda)` with `lambda = c / f`, so a
//! tenfold distance increase always costs exactly 20 dB. Link quality is
//! classified against two thresholds: the handoff threshold (`rssi_min`,
//! the floor below which connectivity is failing) and the preventive
//! threshold (`rssi_prev`, the midpoint between `rssi_min` and the best
//! attainable level `rssi_max`). The thresholds split a cell into safe,
//! gray and handover zones.

use std::fmt;

use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("signal value must be finite, got {0}")]
    NonFiniteSignal(f64),
    #[error("distance must be positive and finite, got {0}")]
    InvalidDistance(f64),
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("transmit power must be finite, got {0}")]
    InvalidPower(f64),
    #[error("threshold interval is degenerate: rssi_min {0} >= rssi_max {1}")]
    DegenerateInterval(Dbm, Dbm),
}

/// Signal strength in dBm. Higher values mean a stronger link.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dbm(f64);

impl Dbm {
    /// Wraps a finite dBm value.
    pub fn new(value: f64) -> Result<Self, PropagationError> {
        if !value.is_finite() {
            return Err(PropagationError::NonFiniteSignal(value));
        }
        Ok(Dbm(value))
    }

    /// Shorthand for values known to be finite (panics otherwise).
    pub fn from_f64(value: f64) -> Self {
        Self::new(value).expect("dBm value must be finite")
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Total order over finite values, for deterministic sorting.
    pub fn total_cmp(&self, other: &Dbm) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dBm", self.0)
    }
}

/// A point in the arena, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Link-quality zone relative to the current access point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    /// No handoff threat; normal operation.
    Safe,
    /// Handoff likely soon; preventive machinery arms here.
    Gray,
    /// Connectivity failing; handoff must run now.
    Handover,
}

/// The two configured signal thresholds plus the derived preventive one.
///
/// `rssi_prev` always sits exactly midway between `rssi_min` and
/// `rssi_max`; construction enforces `rssi_min < rssi_prev < rssi_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    rssi_min: Dbm,
    rssi_max: Dbm,
    rssi_prev: Dbm,
}

impl Thresholds {
    pub fn new(rssi_min: Dbm, rssi_max: Dbm) -> Result<Self, PropagationError> {
        let rssi_prev = prevent_threshold(rssi_min, rssi_max)?;
        Ok(Thresholds {
            rssi_min,
            rssi_max,
            rssi_prev,
        })
    }

    /// Handoff threshold: at or below, connectivity is considered failing.
    pub fn rssi_min(&self) -> Dbm {
        self.rssi_min
    }

    /// Best attainable link quality.
    pub fn rssi_max(&self) -> Dbm {
        self.rssi_max
    }

    /// Preventive threshold (midpoint), arming the pre-handoff path.
    pub fn rssi_prev(&self) -> Dbm {
        self.rssi_prev
    }
}

/// Received power at distance `d` meters for transmit power `p0` and
/// carrier frequency `f` hertz.
pub fn received_power(p0: Dbm, d: f64, f: f64) -> Result<Dbm, PropagationError> {
    if !p0.value().is_finite() {
        return Err(PropagationError::InvalidPower(p0.value()));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(PropagationError::InvalidDistance(d));
    }
    if !(f.is_finite() && f > 0.0) {
        return Err(PropagationError::InvalidFrequency(f));
    }
    let lambda = SPEED_OF_LIGHT / f;
    let loss_db = 20.0 * (4.0 * std::f64::consts::PI * d / lambda).log10();
    Dbm::new(p0.value() - loss_db)
}

/// Solves for the transmit power that yields `target` received power at
/// distance `d`. Used to calibrate scenarios from geometry.
pub fn transmit_power_for(target: Dbm, d: f64, f: f64) -> Result<Dbm, PropagationError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(PropagationError::InvalidDistance(d));
    }
    if !(f.is_finite() && f > 0.0) {
        return Err(PropagationError::InvalidFrequency(f));
    }
    let lambda = SPEED_OF_LIGHT / f;
    let loss_db = 20.0 * (4.0 * std::f64::consts::PI * d / lambda).log10();
    Dbm::new(target.value() + loss_db)
}

/// Preventive threshold: the midpoint of the usable signal interval.
pub fn prevent_threshold(rssi_min: Dbm, rssi_max: Dbm) -> Result<Dbm, PropagationError> {
    if rssi_min.value() >= rssi_max.value() {
        return Err(PropagationError::DegenerateInterval(rssi_min, rssi_max));
    }
    Dbm::new(rssi_min.value() + (rssi_max.value() - rssi_min.value()) / 2.0)
}

/// Assigns an RSSI reading to its zone. The partition is exhaustive and
/// closed on the upper side: a reading exactly at `rssi_prev` is Safe and
/// one exactly at `rssi_min` is Handover.
pub fn classify_zone(rssi: Dbm, t: &Thresholds) -> Zone {
    if rssi.value() >= t.rssi_prev.value() {
        Zone::Safe
    } else if rssi.value() > t.rssi_min.value() {
        Zone::Gray
    } else {
        Zone::Handover
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dbm(v: f64) -> Dbm {
        Dbm::from_f64(v)
    }

    #[test]
    fn received_power_zero_loss_at_lambda_over_4pi() {
        let f = 2.4e9;
        let lambda = SPEED_OF_LIGHT / f;
        let d = lambda / (4.0 * std::f64::consts::PI);
        let p = received_power(dbm(0.0), d, f).unwrap();
        assert!(p.value().abs() < 1e-12, "got {}", p.value());
    }

    #[test]
    fn received_power_one_decade_is_20_db() {
        let f = 2.4e9;
        let lambda = SPEED_OF_LIGHT / f;
        let d = 10.0 * lambda / (4.0 * std::f64::consts::PI);
        let p = received_power(dbm(0.0), d, f).unwrap();
        assert!((p.value() + 20.0).abs() < 1e-12, "got {}", p.value());
    }

    #[test]
    fn received_power_matches_independent_evaluation() {
        // Independent route: loss = 20*log10(4*pi*d*f/c), computed without
        // going through the wavelength. Frozen reference value computed
        // separately with 30-digit arithmetic.
        let p = received_power(dbm(20.0), 50.0, 2.4e9).unwrap();
        let oracle =
            20.0 - 20.0 * (4.0 * std::f64::consts::PI * 50.0 * 2.4e9 / SPEED_OF_LIGHT).log10();
        assert!((p.value() - oracle).abs() < 1e-9);
        assert!((p.value() - (-54.031_408_142_835_87)).abs() < 1e-9);
    }

    #[test]
    fn received_power_rejects_bad_inputs() {
        assert!(received_power(dbm(0.0), 0.0, 2.4e9).is_err());
        assert!(received_power(dbm(0.0), -1.0, 2.4e9).is_err());
        assert!(received_power(dbm(0.0), f64::NAN, 2.4e9).is_err());
        assert!(received_power(dbm(0.0), 10.0, 0.0).is_err());
        assert!(received_power(dbm(0.0), 10.0, f64::INFINITY).is_err());
    }

    #[test]
    fn transmit_power_inverts_received_power() {
        let p0 = transmit_power_for(dbm(-45.0), 25.0, 2.412e9).unwrap();
        let back = received_power(p0, 25.0, 2.412e9).unwrap();
        assert!((back.value() + 45.0).abs() < 1e-9);
    }

    #[test]
    fn prevent_threshold_is_midpoint() {
        assert_eq!(
            prevent_threshold(dbm(-90.0), dbm(-30.0)).unwrap(),
            dbm(-60.0)
        );
        // Table-consistent pair: handoff threshold -51 with max -39 yields
        // the -45 pre-scan threshold.
        assert_eq!(
            prevent_threshold(dbm(-51.0), dbm(-39.0)).unwrap(),
            dbm(-45.0)
        );
    }

    #[test]
    fn prevent_threshold_rejects_degenerate_interval() {
        assert!(prevent_threshold(dbm(0.0), dbm(0.0)).is_err());
        assert!(prevent_threshold(dbm(-30.0), dbm(-90.0)).is_err());
    }

    #[test]
    fn classify_zone_boundaries() {
        let t = Thresholds::new(dbm(-51.0), dbm(-39.0)).unwrap();
        assert_eq!(t.rssi_prev(), dbm(-45.0));
        assert_eq!(classify_zone(dbm(-45.0), &t), Zone::Safe);
        assert_eq!(classify_zone(dbm(-48.0), &t), Zone::Gray);
        assert_eq!(classify_zone(dbm(-51.0), &t), Zone::Handover);
        assert_eq!(classify_zone(dbm(-60.0), &t), Zone::Handover);
        assert_eq!(classify_zone(dbm(-20.0), &t), Zone::Safe);
    }
}
