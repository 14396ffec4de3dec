//! Traffic generation, delivery deadlines, buffering, and contention.
//!
//! Voice sources emit one packet per fixed inter-arrival boundary and
//! every real-time packet must reach its station within a hard deadline
//! of its emission. While a station is absent from its channel the access
//! point parks its downlink packets in a FIFO power-save buffer; a flush
//! delivers them in order, one medium access per packet.
//!
//! Contention is a deliberately simple stand-in: the per-frame medium
//! access delay grows linearly with cell load plus bounded jitter. It is
//! isolated behind [`ContentionModel`] so an alternative can be swapped
//! in without touching the schemes.

use std::collections::VecDeque;

use rand::Rng;

use crate::time::{Duration, SimTime};

/// Highest number of stations that can be active in one cell; cell load
/// is expressed as a fraction of this.
pub const MAX_ACTIVE_PER_CELL: u32 = 32;

/// Traffic class of a station's stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficClass {
    /// Voice: subject to the delivery deadline.
    RealTime,
    /// Background data: buffered and delivered, but never deadline-dropped.
    Background,
}

/// Named real-time / background mixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficPreset {
    VoipOnly,
    Mix7525,
    Mix5050,
}

impl TrafficPreset {
    /// Deterministic class assignment by station id.
    pub fn class_of(self, ms_id: u32) -> TrafficClass {
        match self {
            TrafficPreset::VoipOnly => TrafficClass::RealTime,
            TrafficPreset::Mix7525 => {
                if ms_id % 4 == 3 {
                    TrafficClass::Background
                } else {
                    TrafficClass::RealTime
                }
            }
            TrafficPreset::Mix5050 => {
                if ms_id % 2 == 1 {
                    TrafficClass::Background
                } else {
                    TrafficClass::RealTime
                }
            }
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "voip_only" => Some(TrafficPreset::VoipOnly),
            "mix_75_25" => Some(TrafficPreset::Mix7525),
            "mix_50_50" => Some(TrafficPreset::Mix5050),
            _ => None,
        }
    }
}

/// A periodic downlink packet source for one station.
///
/// Emission times form the arithmetic sequence `start + k * inter_arrival`
/// for `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoipSource {
    pub inter_arrival: Duration,
    pub deadline: Duration,
    next_emit: SimTime,
    emitted: u64,
}

/// One emitted packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub seq: u64,
    pub emitted_at: SimTime,
}

impl VoipSource {
    pub fn new(start: SimTime, inter_arrival: Duration, deadline: Duration) -> Self {
        assert!(inter_arrival > Duration::ZERO, "inter-arrival must be positive");
        assert!(deadline > inter_arrival, "deadline must exceed inter-arrival");
        VoipSource {
            inter_arrival,
            deadline,
            next_emit: start + inter_arrival,
            emitted: 0,
        }
    }

    /// Emission time of the next packet.
    pub fn next_emit_at(&self) -> SimTime {
        self.next_emit
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Emits the packet due at or before `now`, if any, and advances the
    /// schedule by exactly one boundary.
    pub fn next_packet(&mut self, now: SimTime) -> Option<Packet> {
        if now < self.next_emit {
            return None;
        }
        let p = Packet {
            seq: self.emitted,
            emitted_at: self.next_emit,
        };
        self.emitted += 1;
        self.next_emit += self.inter_arrival;
        Some(p)
    }
}

/// FIFO buffer an access point keeps for a station in power-save mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PsmBuffer {
    queue: VecDeque<Packet>,
    capacity: usize,
    overflow_drops: u64,
}

impl PsmBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        PsmBuffer {
            queue: VecDeque::new(),
            capacity,
            overflow_drops: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn overflow_drops(&self) -> u64 {
        self.overflow_drops
    }

    /// Enqueues a packet; a full buffer evicts the oldest entry and
    /// counts one overflow drop.
    pub fn enqueue(&mut self, p: Packet) -> Option<Packet> {
        let dropped = if self.queue.len() == self.capacity {
            self.overflow_drops += 1;
            self.queue.pop_front()
        } else {
            None
        };
        self.queue.push_back(p);
        dropped
    }

    /// Drains the buffer in FIFO order.
    pub fn flush(&mut self) -> Vec<Packet> {
        self.queue.drain(..).collect()
    }
}

/// Cell load as a count of active stations out of [`MAX_ACTIVE_PER_CELL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadModel {
    active_ms_per_cell: u32,
}

impl LoadModel {
    pub fn new(active_ms_per_cell: u32) -> Self {
        assert!(active_ms_per_cell <= MAX_ACTIVE_PER_CELL);
        LoadModel { active_ms_per_cell }
    }

    /// Nearest station count for a load fraction in `[0, 1]`.
    pub fn from_fraction(f: f64) -> Self {
        assert!((0.0..=1.0).contains(&f), "load fraction out of range: {f}");
        LoadModel {
            active_ms_per_cell: (f * MAX_ACTIVE_PER_CELL as f64).round() as u32,
        }
    }

    pub fn active(&self) -> u32 {
        self.active_ms_per_cell
    }

    pub fn fraction(&self) -> f64 {
        f64::from(self.active_ms_per_cell) / f64::from(MAX_ACTIVE_PER_CELL)
    }
}

/// Linear-in-load medium access delay with bounded multiplicative jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionModel {
    pub base_delay: Duration,
    pub factor: f64,
    /// Half-width of the uniform jitter as a fraction of the deterministic
    /// delay; zero disables jitter.
    pub jitter_frac: f64,
}

impl Default for ContentionModel {
    fn default() -> Self {
        ContentionModel {
            base_delay: Duration::from_millis(1),
            factor: 4.0,
            jitter_frac: 0.2,
        }
    }
}

impl ContentionModel {
    /// One medium access: `base * (1 + factor * load_fraction)`, scaled by
    /// a uniform factor in `[1 - jitter, 1 + jitter]`. Expectation is
    /// monotone non-decreasing in load.
    pub fn medium_access_delay<R: Rng>(&self, load: &LoadModel, rng: &mut R) -> Duration {
        let det = self.base_delay.scale(1.0 + self.factor * load.fraction());
        if self.jitter_frac == 0.0 {
            return det;
        }
        let u: f64 = rng.random();
        det.scale(1.0 + (2.0 * u - 1.0) * self.jitter_frac)
    }
}
