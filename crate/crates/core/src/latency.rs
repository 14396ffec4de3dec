//! Handoff timing arithmetic.
//!
//! Pure integer-microsecond formulas shared by the scheme simulations and
//! the standalone self-check: probe-time bounds, the minimum channel
//! dwell, total handover latency, the per-channel monitoring delay of
//! beacon-synchronized scanning, and the pre-scan total and its period.

use thiserror::Error;

use crate::time::Duration;

#[derive(Debug, Error, PartialEq)]
pub enum TimingError {
    #[error("channel count must be at least 1")]
    NoChannels,
    #[error("min_channel_time {0} exceeds max_channel_time {1}")]
    MinAboveMax(Duration, Duration),
    #[error("min_channel_time {min} below DIFS + CW*SlotTime = {bound}")]
    MinChannelTimeTooSmall { min: Duration, bound: Duration },
}

/// Medium and procedure timing for one scenario.
///
/// Construction enforces the dwell-time floor `min_channel_time >= DIFS +
/// CW*SlotTime`, so every parameter set in a run already satisfies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingParams {
    pub n_channels: u32,
    pub min_channel_time: Duration,
    pub max_channel_time: Duration,
    pub t_switch: Duration,
    pub difs: Duration,
    pub slot_time: Duration,
    pub cw: u32,
    pub t_auth: Duration,
    pub t_assoc: Duration,
    pub beacon_interval: Duration,
}

impl TimingParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_channels: u32,
        min_channel_time: Duration,
        max_channel_time: Duration,
        t_switch: Duration,
        difs: Duration,
        slot_time: Duration,
        cw: u32,
        t_auth: Duration,
        t_assoc: Duration,
        beacon_interval: Duration,
    ) -> Result<Self, TimingError> {
        if n_channels == 0 {
            return Err(TimingError::NoChannels);
        }
        if min_channel_time > max_channel_time {
            return Err(TimingError::MinAboveMax(min_channel_time, max_channel_time));
        }
        let bound = min_channel_time_bound(difs, cw, slot_time);
        if min_channel_time < bound {
            return Err(TimingError::MinChannelTimeTooSmall {
                min: min_channel_time,
                bound,
            });
        }
        Ok(TimingParams {
            n_channels,
            min_channel_time,
            max_channel_time,
            t_switch,
            difs,
            slot_time,
            cw,
            t_auth,
            t_assoc,
            beacon_interval,
        })
    }

    /// 802.11b-style defaults: 11 channels, 7/11 ms dwell, 5 ms switch,
    /// 50 us DIFS, CW 31 x 20 us slots, 2 ms + 2 ms auth/assoc, 100 ms
    /// beacons.
    pub fn default_80211b() -> Self {
        TimingParams::new(
            11,
            Duration::from_millis(7),
            Duration::from_millis(11),
            Duration::from_millis(5),
            Duration::from_micros(50),
            Duration::from_micros(20),
            31,
            Duration::from_millis(2),
            Duration::from_millis(2),
            Duration::from_millis(100),
        )
        .expect("defaults satisfy the dwell bound")
    }
}

/// Lower and upper bounds on the whole probe phase: every channel is
/// dwelt for at least `min_channel_time` and at most `max_channel_time`.
pub fn probe_time_bounds(p: &TimingParams) -> (Duration, Duration) {
    (
        p.min_channel_time * u64::from(p.n_channels),
        p.max_channel_time * u64::from(p.n_channels),
    )
}

/// Smallest admissible per-channel dwell: `DIFS + CW*SlotTime`.
pub fn min_channel_time_bound(difs: Duration, cw: u32, slot: Duration) -> Duration {
    difs + slot * u64::from(cw)
}

/// Total handover latency for a uniform per-channel probe time:
/// `N*(T_switch + T_probe) + T_auth + T_assoc`.
pub fn handover_latency(p: &TimingParams, t_probe_per_channel: Duration) -> Duration {
    (p.t_switch + t_probe_per_channel) * u64::from(p.n_channels) + p.t_auth + p.t_assoc
}

/// Per-channel delay of beacon-synchronized monitoring: switch out, wait
/// for the beacon, switch back (`2*T_switch + T_wait`).
pub fn syncscan_delay(t_switch: Duration, t_wait: Duration) -> Duration {
    t_switch * 2 + t_wait
}

/// Total channel-visiting time of one pre-scan cycle:
/// `N*(T_switch + T_wait)`.
pub fn prescan_time(p: &TimingParams, t_wait: Duration) -> Duration {
    (p.t_switch + t_wait) * u64::from(p.n_channels)
}

/// Pre-scan period: `1.5 * N * (T_switch + MaxChannelTime)`, rounded
/// half-up to a whole microsecond. Always at least `prescan_time` for any
/// wait up to `max_channel_time`, so a cycle finishes before the next one
/// is due.
pub fn prescan_period_alpha(p: &TimingParams) -> Duration {
    ((p.t_switch + p.max_channel_time) * u64::from(p.n_channels)).times_one_point_five()
}
