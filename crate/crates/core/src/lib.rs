//! Deterministic discrete-event simulation of IEEE 802.11 inter-cell
//! handoff.
//!
//! The crate models an infrastructure WLAN at desk scale: access points on
//! a hex or grid layout, mobile stations moving under random-waypoint or
//! random-direction mobility, free-space RSSI propagation, VoIP traffic
//! with a hard delivery deadline, and four handoff schemes — the standard
//! active and passive scans, a zone-based preemptive baseline, and a
//! preventive pre-scan procedure with a dynamic candidate list and three
//! handoff forms. A context-aware next-AP selection heuristic (weighted
//! sum or lexicographic over RSSI, neighbor extent, handoff history and
//! load) can be attached to the standard and preventive schemes.
//!
//! Runs are bit-reproducible: time is integer microseconds, every random
//! draw comes from a seeded ChaCha8 stream, and event ordering is total.

pub mod engine;
pub mod latency;
pub mod mobility;
pub mod propagation;
pub mod scheme;
pub mod selection;
pub mod selfcheck;
pub mod time;
pub mod traffic;

use std::fmt;

/// Identifier of an access point within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApId(pub u32);

impl fmt::Display for ApId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ap{}", self.0)
    }
}

/// Identifier of a mobile station within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsId(pub u32);

impl fmt::Display for MsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ms{}", self.0)
    }
}
