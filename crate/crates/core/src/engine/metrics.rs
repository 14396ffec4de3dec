//! Run metrics: handoff records, packet accounting, inter-frame gaps.

use crate::scheme::{HandoffForm, HandoffRecord};
use crate::time::{Duration, SimTime};

/// Packet fate counters for one run.
///
/// Conservation: `emitted = delivered + deadline_dropped + buffer_dropped
/// + handoff_lost + in_flight_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PacketCounters {
    pub emitted: u64,
    pub delivered: u64,
    /// Real-time packets delivered later than their deadline.
    pub deadline_dropped: u64,
    /// Evicted from a full power-save buffer.
    pub buffer_dropped: u64,
    /// Addressed to a station that was mid-handoff or disconnected.
    pub handoff_lost: u64,
    /// Still buffered or in transit when the run ended.
    pub in_flight_end: u64,
    pub realtime_emitted: u64,
    pub realtime_delivered: u64,
}

impl PacketCounters {
    pub fn conservation_holds(&self) -> bool {
        self.emitted
            == self.delivered
                + self.deadline_dropped
                + self.buffer_dropped
                + self.handoff_lost
                + self.in_flight_end
    }
}

/// Everything a run reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsLedger {
    pub records: Vec<HandoffRecord>,
    pub packets: PacketCounters,
    /// Gaps between consecutive delivered real-time packets, per station.
    pub interframe_gaps: Vec<Vec<Duration>>,
    /// State-machine events that arrived in a state that ignores them.
    pub ignored_events: u64,
    pub prescan_cycles: u64,
    pub prescan_interrupted: u64,
    /// Preventive association attempts that failed and were abandoned.
    pub assoc_failures: u64,
    /// Handoff procedures still in progress at the end of the run.
    pub unfinished_handoffs: u64,
    pub end_time: SimTime,
    /// Checksum over the run's semantic event stream.
    pub digest: u64,
}

impl MetricsLedger {
    pub fn handoff_count(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn form_count(&self, form: HandoffForm) -> u64 {
        self.records.iter().filter(|r| r.form == form).count() as u64
    }

    /// Fraction of completed handoffs done under the preventive form.
    pub fn form1_fraction(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        Some(self.form_count(HandoffForm::Form1) as f64 / self.records.len() as f64)
    }

    /// Probability a packet was lost to a deadline violation or a handoff
    /// window.
    pub fn loss_probability(&self) -> f64 {
        if self.packets.emitted == 0 {
            return 0.0;
        }
        (self.packets.deadline_dropped + self.packets.handoff_lost) as f64
            / self.packets.emitted as f64
    }

    fn sorted_latencies(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.records.iter().map(|r| r.latency.as_micros()).collect();
        v.sort_unstable();
        v
    }

    /// Mean handoff latency in whole microseconds, rounded half-up.
    pub fn mean_latency_us(&self) -> u64 {
        let v = self.sorted_latencies();
        if v.is_empty() {
            return 0;
        }
        let sum: u64 = v.iter().sum();
        (sum + v.len() as u64 / 2) / v.len() as u64
    }

    /// Median latency; an even count averages the middle pair, rounding
    /// half-up.
    pub fn median_latency_us(&self) -> u64 {
        let v = self.sorted_latencies();
        if v.is_empty() {
            return 0;
        }
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]).div_ceil(2)
        }
    }

    /// Nearest-rank 95th percentile latency.
    pub fn p95_latency_us(&self) -> u64 {
        let v = self.sorted_latencies();
        if v.is_empty() {
            return 0;
        }
        let rank = ((v.len() as f64) * 0.95).ceil() as usize;
        v[rank.clamp(1, v.len()) - 1]
    }

    /// All per-record consistency checks plus packet conservation.
    pub fn verify(&self) -> Result<(), String> {
        if !self.packets.conservation_holds() {
            return Err(format!("packet conservation violated: {:?}", self.packets));
        }
        for r in &self.records {
            if !r.is_consistent() {
                return Err(format!("inconsistent handoff record: {r:?}"));
            }
        }
        Ok(())
    }
}
