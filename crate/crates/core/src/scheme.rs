//! Per-station handoff state machines and their supporting types.
//!
//! Four schemes are simulated: the standard 802.11 active and passive
//! scans, a zone-based preemptive baseline (safe / gray / handover), and
//! the preventive pre-scan procedure. The preventive scheme keeps a small
//! RSSI-sorted candidate list refreshed by periodic pre-scan cycles and
//! distinguishes three handoff forms:
//!
//! - Form 1: preventive re-association while still above the handoff
//!   threshold, with a candidate offering strictly better signal;
//! - Form 2: urgent re-association straight from the candidate list;
//! - Form 3: urgent fallback to a full scan when the list cannot help.
//!
//! The state machine itself is a pure transition function over
//! (state, event); the engine owns the surrounding bookkeeping (timers,
//! list refreshes, association procedures).

use crate::propagation::{Dbm, Thresholds};
use crate::time::{Duration, SimTime};
use crate::ApId;

/// Which handoff procedure a station runs. Fixed per station per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Standard80211Active,
    Standard80211Passive,
    Apfh,
    Pshp,
}

impl SchemeKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "standard_active" => Some(SchemeKind::Standard80211Active),
            "standard_passive" => Some(SchemeKind::Standard80211Passive),
            "apfh" => Some(SchemeKind::Apfh),
            "pshp" => Some(SchemeKind::Pshp),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Standard80211Active => "standard_active",
            SchemeKind::Standard80211Passive => "standard_passive",
            SchemeKind::Apfh => "apfh",
            SchemeKind::Pshp => "pshp",
        }
    }
}

/// Outcome category of a completed handoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandoffForm {
    Form1,
    Form2,
    Form3,
    Baseline,
}

/// One completed handoff with its latency breakdown.
///
/// `latency` always equals `scan_overhead + auth_cost + assoc_cost`;
/// `scan_overhead` covers channel dwells, interrupted pre-scan remainders
/// and retry backoffs between trigger and the final association exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoffRecord {
    pub ms: crate::MsId,
    pub from: ApId,
    pub to: ApId,
    pub form: HandoffForm,
    pub trigger_time: SimTime,
    pub complete_time: SimTime,
    pub latency: Duration,
    pub scan_overhead: Duration,
    pub auth_cost: Duration,
    pub assoc_cost: Duration,
}

impl HandoffRecord {
    /// Latency must reconstruct exactly from its components.
    pub fn is_consistent(&self) -> bool {
        self.complete_time >= self.trigger_time
            && self.latency == self.complete_time.since(self.trigger_time)
            && self.latency == self.scan_overhead + self.auth_cost + self.assoc_cost
    }
}

/// Most candidates a pre-scan keeps; WLAN deployments are typically
/// hexagonal, so six covers the surrounding cells.
pub const DYNAMIC_LIST_CAP: usize = 6;

/// One scanned access point: signal seen and when.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApSample {
    pub ap: ApId,
    pub rssi: Dbm,
    pub sampled_at: SimTime,
}

/// RSSI-sorted candidate list, at most [`DYNAMIC_LIST_CAP`] entries.
///
/// Order is descending signal strength with ties toward the lower AP id;
/// every mutation re-establishes it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DynamicApList {
    entries: Vec<ApSample>,
}

impl DynamicApList {
    pub fn new() -> Self {
        DynamicApList::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<&ApSample> {
        self.entries.first()
    }

    pub fn entries(&self) -> &[ApSample] {
        &self.entries
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Replaces the whole list with the strongest samples of a completed
    /// scan, excluding the current AP.
    pub fn rebuild(&mut self, samples: impl IntoIterator<Item = ApSample>, exclude: Option<ApId>) {
        self.entries.clear();
        self.entries
            .extend(samples.into_iter().filter(|s| Some(s.ap) != exclude));
        self.normalize();
    }

    /// Upserts samples from a partial scan, keeping existing knowledge of
    /// unvisited channels.
    pub fn merge(&mut self, samples: impl IntoIterator<Item = ApSample>, exclude: Option<ApId>) {
        for s in samples {
            if Some(s.ap) == exclude {
                continue;
            }
            if let Some(e) = self.entries.iter_mut().find(|e| e.ap == s.ap) {
                *e = s;
            } else {
                self.entries.push(s);
            }
        }
        if let Some(ap) = exclude {
            self.entries.retain(|e| e.ap != ap);
        }
        self.normalize();
    }

    /// Drops entries sampled before `now - max_age`.
    pub fn purge_stale(&mut self, now: SimTime, max_age: Duration) {
        self.entries.retain(|e| now.since(e.sampled_at) <= max_age);
    }

    pub fn remove(&mut self, ap: ApId) {
        self.entries.retain(|e| e.ap != ap);
    }

    fn normalize(&mut self) {
        self.entries.sort_unstable_by(|a, b| {
            b.rssi.total_cmp(&a.rssi).then_with(|| a.ap.0.cmp(&b.ap.0))
        });
        self.entries.dedup_by_key(|e| e.ap);
        self.entries.truncate(DYNAMIC_LIST_CAP);
    }

    /// Sortedness and capacity invariant, exposed for tests.
    pub fn invariant_holds(&self) -> bool {
        self.entries.len() <= DYNAMIC_LIST_CAP
            && self.entries.windows(2).all(|w| {
                w[0].rssi.value() > w[1].rssi.value()
                    || (w[0].rssi == w[1].rssi && w[0].ap.0 < w[1].ap.0)
            })
    }
}

/// Association acceptance rule of the preventive scheme: the candidate
/// must beat both the handoff threshold and the current link, strictly.
pub fn pshp_association_gate(head_rssi: Dbm, current_rssi: Dbm, t: &Thresholds) -> bool {
    head_rssi.value() > t.rssi_min().value() && head_rssi.value() > current_rssi.value()
}

/// States of the preventive handoff machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PshpState {
    Standby,
    PreHandoff,
    UrgentHandover,
    HandoffForm1,
    HandoffForm2,
    HandoffForm3,
}

/// Inputs the engine feeds to the machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PshpEvent {
    /// Periodic signal sample of the current AP, together with the best
    /// usable candidate from the (purged) dynamic list. With a selection
    /// policy attached the engine substitutes the policy's choice here.
    RssiSample {
        current: Dbm,
        head: Option<(ApId, Dbm)>,
    },
    /// The pre-scan period elapsed while the station needs monitoring.
    PrescanDue,
    /// A re-association attempt finished.
    AssociationResult { success: bool },
}

/// What the engine must do after a transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PshpAction {
    None,
    /// Run one pre-scan cycle.
    StartPrescan,
    /// Begin re-association with the candidate (preventive form).
    AssociateForm1(ApId),
    /// Begin re-association with the candidate (urgent form).
    AssociateForm2(ApId),
    /// Run a full scan, then re-associate (urgent fallback).
    FullScanForm3,
    /// Handoff finished: book it and arm an immediate pre-scan.
    CompleteHandoff,
    /// Preventive association failed: drop the list, pre-scan afresh.
    PurgeListAndPrescan,
}

/// Result of one transition. `ignored` marks events that arrived in a
/// state that has no use for them; the engine counts those.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PshpTransition {
    pub next: PshpState,
    pub action: PshpAction,
    pub ignored: bool,
}

fn stay_ignored(state: PshpState) -> PshpTransition {
    PshpTransition {
        next: state,
        action: PshpAction::None,
        ignored: true,
    }
}

fn go(next: PshpState, action: PshpAction) -> PshpTransition {
    PshpTransition {
        next,
        action,
        ignored: false,
    }
}

/// The transition function. Total: every (state, event) pair yields
/// exactly one result.
///
/// Urgent entry does not resolve in the same call; the engine re-feeds
/// the sample to the `UrgentHandover` state at the same timestamp so that
/// urgent handoffs decide immediately on the list's instantaneous data.
pub fn pshp_transition(state: PshpState, event: &PshpEvent, t: &Thresholds) -> PshpTransition {
    use PshpAction as A;
    use PshpState as S;
    match (state, event) {
        (S::Standby, PshpEvent::RssiSample { current, .. }) => {
            if current.value() <= t.rssi_min().value() {
                go(S::UrgentHandover, A::None)
            } else if current.value() <= t.rssi_prev().value() {
                go(S::PreHandoff, A::None)
            } else {
                go(S::Standby, A::None)
            }
        }
        (S::PreHandoff, PshpEvent::RssiSample { current, head }) => {
            if current.value() <= t.rssi_min().value() {
                go(S::UrgentHandover, A::None)
            } else {
                match head {
                    Some((ap, rssi)) if pshp_association_gate(*rssi, *current, t) => {
                        go(S::HandoffForm1, A::AssociateForm1(*ap))
                    }
                    _ => go(S::Standby, A::None),
                }
            }
        }
        (S::UrgentHandover, PshpEvent::RssiSample { head, .. }) => match head {
            Some((ap, rssi)) if rssi.value() > t.rssi_min().value() => {
                go(S::HandoffForm2, A::AssociateForm2(*ap))
            }
            _ => go(S::HandoffForm3, A::FullScanForm3),
        },
        (S::Standby, PshpEvent::PrescanDue) => go(S::Standby, A::StartPrescan),
        (S::PreHandoff, PshpEvent::PrescanDue) => go(S::PreHandoff, A::StartPrescan),
        (S::UrgentHandover, PshpEvent::PrescanDue) => stay_ignored(state),
        (S::HandoffForm1 | S::HandoffForm2 | S::HandoffForm3, PshpEvent::RssiSample { .. })
        | (S::HandoffForm1 | S::HandoffForm2 | S::HandoffForm3, PshpEvent::PrescanDue) => {
            stay_ignored(state)
        }
        (S::HandoffForm1, PshpEvent::AssociationResult { success }) => {
            if *success {
                go(S::Standby, A::CompleteHandoff)
            } else {
                go(S::Standby, A::PurgeListAndPrescan)
            }
        }
        (S::HandoffForm2 | S::HandoffForm3, PshpEvent::AssociationResult { success }) => {
            if *success {
                go(S::Standby, A::CompleteHandoff)
            } else {
                // Urgent association failures fall through to the full
                // scan, counted under form 3.
                go(S::HandoffForm3, A::FullScanForm3)
            }
        }
        (S::Standby | S::PreHandoff | S::UrgentHandover, PshpEvent::AssociationResult { .. }) => {
            stay_ignored(state)
        }
    }
}
