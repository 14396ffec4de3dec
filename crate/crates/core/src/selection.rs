//! Context-aware next-AP selection.
//!
//! Beyond raw signal strength, the selection layer scores handoff
//! candidates on three network features read from a shared
//! [`NeighborContext`]: the candidate's current station count, the
//! handoff history count from the current AP to the candidate, and the
//! candidate's neighbor-set size. Candidates must be graph neighbors of
//! the current AP; feasibility further requires signal above the handoff
//! threshold and spare capacity.
//!
//! Two combination rules are provided. The weighted sum normalizes each
//! feature min-max over the feasible set and maximizes
//! `w_rssi*n(rssi) + w_ext*n(ext) + w_cnx*n(cnx) - w_load*n(ms_count)`;
//! the lexicographic rule orders by rssi, then extent, then history, then
//! ascending load. `RssiOnly` reproduces the standard rule for A/B
//! comparisons. All ties break toward the lowest AP id.

use std::collections::BTreeSet;
use std::io::{self, Write};

use thiserror::Error;

use crate::propagation::Dbm;
use crate::ApId;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("ap {0} is out of range for this context")]
    UnknownAp(ApId),
    #[error("{candidate} is not a neighbor of {current}")]
    NotNeighbor { current: ApId, candidate: ApId },
    #[error("weighted-sum weights must not all be zero")]
    ZeroWeights,
    #[error("weights must be finite and non-negative")]
    BadWeight,
}

/// Neighbor graph, handoff-history matrix, and per-AP association counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborContext {
    neighbors: Vec<BTreeSet<u32>>,
    handoff_counts: Vec<Vec<u64>>,
    assoc_counts: Vec<u32>,
    capacity_m: u32,
}

impl NeighborContext {
    pub fn new(n_aps: usize, capacity_m: u32) -> Self {
        NeighborContext {
            neighbors: vec![BTreeSet::new(); n_aps],
            handoff_counts: vec![vec![0; n_aps]; n_aps],
            assoc_counts: vec![0; n_aps],
            capacity_m,
        }
    }

    pub fn n_aps(&self) -> usize {
        self.assoc_counts.len()
    }

    pub fn capacity(&self) -> u32 {
        self.capacity_m
    }

    fn check(&self, ap: ApId) -> Result<usize, SelectionError> {
        let i = ap.0 as usize;
        if i >= self.n_aps() {
            return Err(SelectionError::UnknownAp(ap));
        }
        Ok(i)
    }

    /// Adds a symmetric neighbor edge.
    pub fn add_neighbor_edge(&mut self, a: ApId, b: ApId) -> Result<(), SelectionError> {
        let (i, j) = (self.check(a)?, self.check(b)?);
        if i != j {
            self.neighbors[i].insert(b.0);
            self.neighbors[j].insert(a.0);
        }
        Ok(())
    }

    pub fn are_neighbors(&self, a: ApId, b: ApId) -> bool {
        self.neighbors
            .get(a.0 as usize)
            .is_some_and(|s| s.contains(&b.0))
    }

    pub fn neighbors_of(&self, ap: ApId) -> impl Iterator<Item = ApId> + '_ {
        self.neighbors[ap.0 as usize].iter().map(|&i| ApId(i))
    }

    /// Size of the candidate's neighbor set.
    pub fn extent(&self, ap: ApId) -> u32 {
        self.neighbors[ap.0 as usize].len() as u32
    }

    /// Alternative extent: neighbors of `via` that are two hops from
    /// `current` (excluding `current` and its direct neighbors).
    pub fn extent_two_hop(&self, current: ApId, via: ApId) -> u32 {
        let direct = &self.neighbors[current.0 as usize];
        self.neighbors[via.0 as usize]
            .iter()
            .filter(|&&k| k != current.0 && !direct.contains(&k))
            .count() as u32
    }

    /// Handoff count from `from` to `to` (directional).
    pub fn cnx(&self, from: ApId, to: ApId) -> u64 {
        self.handoff_counts[from.0 as usize][to.0 as usize]
    }

    pub fn assoc_count(&self, ap: ApId) -> u32 {
        self.assoc_counts[ap.0 as usize]
    }

    pub fn total_associated(&self) -> u64 {
        self.assoc_counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Seeds an initial history count, for scenarios that start with
    /// known travel patterns.
    pub fn seed_handoffs(&mut self, from: ApId, to: ApId, count: u64) -> Result<(), SelectionError> {
        let (i, j) = (self.check(from)?, self.check(to)?);
        self.handoff_counts[i][j] = self.handoff_counts[i][j].saturating_add(count);
        Ok(())
    }

    /// Books an initial association (no handoff involved).
    pub fn associate(&mut self, ap: ApId) {
        self.assoc_counts[ap.0 as usize] += 1;
    }

    /// Books a completed handoff: increments the history counter and moves
    /// one association from `from` to `to`.
    pub fn record_handoff(&mut self, from: ApId, to: ApId) {
        let (i, j) = (from.0 as usize, to.0 as usize);
        self.handoff_counts[i][j] += 1;
        self.assoc_counts[i] = self.assoc_counts[i].saturating_sub(1);
        self.assoc_counts[j] += 1;
    }

    /// Row sum of the history matrix: completed handoffs out of `from`.
    pub fn handoffs_from(&self, from: ApId) -> u64 {
        self.handoff_counts[from.0 as usize].iter().sum()
    }

    /// Writes a human-readable dump: neighbor sets, association counts,
    /// and the non-zero history entries.
    pub fn export<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[neighbors]")?;
        for (i, set) in self.neighbors.iter().enumerate() {
            let list: Vec<String> = set.iter().map(|k| k.to_string()).collect();
            writeln!(w, "ap{} = {}", i, list.join(","))?;
        }
        writeln!(w, "[associations]")?;
        for (i, c) in self.assoc_counts.iter().enumerate() {
            writeln!(w, "ap{} = {}", i, c)?;
        }
        writeln!(w, "[handoffs]")?;
        for (i, row) in self.handoff_counts.iter().enumerate() {
            for (k, &n) in row.iter().enumerate() {
                if n > 0 {
                    writeln!(w, "ap{} -> ap{} = {}", i, k, n)?;
                }
            }
        }
        Ok(())
    }
}

/// One candidate's feature snapshot, read at a single instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFeatures {
    pub ap: ApId,
    pub ms_count: u32,
    pub cnx: u64,
    pub ext: u32,
    pub rssi: Dbm,
}

/// Whether `extent` counts the candidate's whole neighbor set or only the
/// two-hop portion new to the current AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtentMode {
    #[default]
    NeighborSetSize,
    TwoHopOnly,
}

/// Reads the candidate's features from the context. The candidate must be
/// a direct neighbor of the current AP.
pub fn candidate_features(
    ctx: &NeighborContext,
    current: ApId,
    candidate: ApId,
    rssi: Dbm,
    ext_mode: ExtentMode,
) -> Result<CandidateFeatures, SelectionError> {
    ctx.check(current)?;
    ctx.check(candidate)?;
    if !ctx.are_neighbors(current, candidate) {
        return Err(SelectionError::NotNeighbor { current, candidate });
    }
    let ext = match ext_mode {
        ExtentMode::NeighborSetSize => ctx.extent(candidate),
        ExtentMode::TwoHopOnly => ctx.extent_two_hop(current, candidate),
    };
    Ok(CandidateFeatures {
        ap: candidate,
        ms_count: ctx.assoc_count(candidate),
        cnx: ctx.cnx(current, candidate),
        ext,
        rssi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    WeightedSum,
    Lexicographic,
    RssiOnly,
}

/// Selection rule plus its feasibility bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy {
    pub mode: SelectionMode,
    pub w_rssi: f64,
    pub w_ext: f64,
    pub w_cnx: f64,
    pub w_load: f64,
    /// Candidates must exceed this signal level (the handoff threshold).
    pub threshold: Dbm,
    /// Candidates must have strictly fewer associated stations than this.
    pub capacity_m: u32,
}

impl SelectionPolicy {
    pub fn new(mode: SelectionMode, threshold: Dbm, capacity_m: u32) -> Self {
        SelectionPolicy {
            mode,
            w_rssi: 1.0,
            w_ext: 1.0,
            w_cnx: 1.0,
            w_load: 1.0,
            threshold,
            capacity_m,
        }
    }

    pub fn with_weights(
        mut self,
        w_rssi: f64,
        w_ext: f64,
        w_cnx: f64,
        w_load: f64,
    ) -> Result<Self, SelectionError> {
        for w in [w_rssi, w_ext, w_cnx, w_load] {
            if !w.is_finite() || w < 0.0 {
                return Err(SelectionError::BadWeight);
            }
        }
        if self.mode == SelectionMode::WeightedSum
            && w_rssi == 0.0
            && w_ext == 0.0
            && w_cnx == 0.0
            && w_load == 0.0
        {
            return Err(SelectionError::ZeroWeights);
        }
        self.w_rssi = w_rssi;
        self.w_ext = w_ext;
        self.w_cnx = w_cnx;
        self.w_load = w_load;
        Ok(self)
    }
}

/// Picks the best feasible candidate, or `None` when no candidate is
/// feasible.
///
/// Feasibility: `rssi > policy.threshold`, `ms_count < policy.capacity_m`,
/// and — when `improvement_floor` is given (the preventive handoff path) —
/// `rssi` strictly above the floor.
pub fn select_next_ap(
    candidates: &[CandidateFeatures],
    improvement_floor: Option<Dbm>,
    policy: &SelectionPolicy,
) -> Option<ApId> {
    let feasible: Vec<&CandidateFeatures> = candidates
        .iter()
        .filter(|c| {
            c.rssi.value() > policy.threshold.value()
                && c.ms_count < policy.capacity_m
                && improvement_floor.is_none_or(|f| c.rssi.value() > f.value())
        })
        .collect();
    if feasible.is_empty() {
        return None;
    }
    match policy.mode {
        SelectionMode::RssiOnly => pick_max(&feasible, |c| c.rssi.value()),
        SelectionMode::Lexicographic => {
            let mut best = feasible[0];
            for c in feasible.iter().skip(1) {
                let ord = c
                    .rssi
                    .total_cmp(&best.rssi)
                    .then(c.ext.cmp(&best.ext))
                    .then(c.cnx.cmp(&best.cnx))
                    .then(best.ms_count.cmp(&c.ms_count))
                    .then(best.ap.0.cmp(&c.ap.0));
                if ord == std::cmp::Ordering::Greater {
                    best = c;
                }
            }
            Some(best.ap)
        }
        SelectionMode::WeightedSum => {
            let norm_rssi = normalizer(&feasible, |c| c.rssi.value());
            let norm_ext = normalizer(&feasible, |c| f64::from(c.ext));
            let norm_cnx = normalizer(&feasible, |c| c.cnx as f64);
            let norm_load = normalizer(&feasible, |c| f64::from(c.ms_count));
            pick_max(&feasible, |c| {
                policy.w_rssi * norm_rssi(c.rssi.value()) + policy.w_ext * norm_ext(f64::from(c.ext))
                    + policy.w_cnx * norm_cnx(c.cnx as f64)
                    - policy.w_load * norm_load(f64::from(c.ms_count))
            })
        }
    }
}

/// Min-max normalizer over the feasible set; a constant feature maps
/// everything to zero.
fn normalizer<'a>(
    feasible: &[&CandidateFeatures],
    f: impl Fn(&CandidateFeatures) -> f64 + 'a,
) -> impl Fn(f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in feasible {
        let v = f(c);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    move |v: f64| if span > 0.0 { (v - lo) / span } else { 0.0 }
}

/// Argmax with strict improvement, so earlier (lower-id) candidates win
/// ties. Callers pass candidates in ascending id order.
fn pick_max(feasible: &[&CandidateFeatures], score: impl Fn(&CandidateFeatures) -> f64) -> Option<ApId> {
    let mut best: Option<(ApId, f64, u32)> = None;
    for c in feasible {
        let s = score(c);
        let better = match best {
            None => true,
            Some((_, bs, bid)) => s > bs || (s == bs && c.ap.0 < bid),
        };
        if better {
            best = Some((c.ap, s, c.ap.0));
        }
    }
    best.map(|(ap, _, _)| ap)
}
