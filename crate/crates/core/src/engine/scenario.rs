//! Scenario definition, validation, and derived geometry.

use thiserror::Error;

use crate::latency::{prescan_period_alpha, prescan_time, TimingError, TimingParams};
use crate::mobility::{Arena, MobilityParams};
use crate::propagation::{
    transmit_power_for, Dbm, Position, PropagationError, Thresholds,
};
use crate::scheme::SchemeKind;
use crate::selection::{ExtentMode, SelectionMode, SelectionPolicy};
use crate::time::Duration;
use crate::traffic::{ContentionModel, TrafficPreset};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario has no access points")]
    NoAps,
    #[error("timing: {0}")]
    Timing(#[from] TimingError),
    #[error("propagation: {0}")]
    Propagation(#[from] PropagationError),
    #[error("arena must be positive and finite")]
    BadArena,
    #[error("ap {0} at ({1}, {2}) lies outside the arena")]
    ApOutsideArena(u32, f64, f64),
    #[error("ap {0} channel {1} out of range (1..={2})")]
    BadChannel(u32, u32, u32),
    #[error("load must be within [0, 1], got {0}")]
    BadLoad(f64),
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("pre-scan wait {0} exceeds max_channel_time {1}")]
    PrescanWaitTooLong(Duration, Duration),
    #[error("speed bounds invalid: {0}..{1}")]
    BadSpeed(f64, f64),
    #[error("selection: {0}")]
    Selection(#[from] crate::selection::SelectionError),
    #[error("tick must be positive")]
    ZeroTick,
    #[error("explicit station placement needs at least one position")]
    NoMsPositions,
    #[error("penalty refers to unknown ap {0} or non-finite value {1}")]
    BadPenalty(u32, f64),
    #[error("ap capacity must be at least 1")]
    ZeroCapacity,
    #[error("station position ({0}, {1}) lies outside the arena")]
    MsOutsideArena(f64, f64),
}

/// Access-point placement.
#[derive(Debug, Clone, PartialEq)]
pub enum ApLayout {
    /// Offset-row hexagonal grid with the given spacing in meters.
    Hex { rows: u32, cols: u32, spacing: f64 },
    /// Rectangular grid.
    Grid { rows: u32, cols: u32, spacing: f64 },
    /// Explicit positions, optionally with pinned 1-based channels.
    Explicit(Vec<ApSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApSpec {
    pub x: f64,
    pub y: f64,
    pub channel: Option<u32>,
}

/// Where stations start.
#[derive(Debug, Clone, PartialEq)]
pub enum MsPlacement {
    /// Uniform over the arena, drawn from the placement stream.
    UniformRandom,
    /// Fixed positions, cycled when there are more stations than entries.
    Explicit(Vec<(f64, f64)>),
}

/// Traffic settings for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub preset: TrafficPreset,
    pub inter_arrival: Duration,
    pub deadline: Duration,
    pub psm_capacity: usize,
    pub contention: ContentionModel,
    /// Cell load fraction in [0, 1]; drives the contention level.
    pub load: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            preset: TrafficPreset::VoipOnly,
            inter_arrival: Duration::from_millis(20),
            deadline: Duration::from_millis(50),
            psm_capacity: 64,
            contention: ContentionModel::default(),
            load: 0.5,
        }
    }
}

/// Next-AP selection attachment.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub mode: SelectionMode,
    pub w_rssi: f64,
    pub w_ext: f64,
    pub w_cnx: f64,
    pub w_load: f64,
    pub capacity_m: u32,
    pub ext_mode: ExtentMode,
    /// Initial handoff-history seed entries (from, to, count).
    pub cnx_seed: Vec<(u32, u32, u64)>,
}

impl SelectionConfig {
    pub fn new(mode: SelectionMode) -> Self {
        SelectionConfig {
            mode,
            w_rssi: 1.0,
            w_ext: 1.0,
            w_cnx: 1.0,
            w_load: 1.0,
            capacity_m: 32,
            ext_mode: ExtentMode::NeighborSetSize,
            cnx_seed: Vec::new(),
        }
    }

    pub fn build_policy(&self, threshold: Dbm) -> Result<SelectionPolicy, ScenarioError> {
        Ok(SelectionPolicy::new(self.mode, threshold, self.capacity_m).with_weights(
            self.w_rssi,
            self.w_ext,
            self.w_cnx,
            self.w_load,
        )?)
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            SelectionMode::WeightedSum => "weighted_sum",
            SelectionMode::Lexicographic => "lexicographic",
            SelectionMode::RssiOnly => "rssi_only",
        }
    }
}

/// Full description of one run. Everything a run needs is in here plus
/// the seed; equal scenarios produce bit-identical ledgers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: ApLayout,
    /// Arena override; by default the AP bounding box grown by `margin`.
    pub arena: Option<(f64, f64)>,
    /// Free space around the AP bounding box when the arena is derived.
    pub margin: f64,
    /// Neighbor-graph edge threshold; default 1.5x the closest AP spacing.
    pub neighbor_radius: Option<f64>,
    pub timing: TimingParams,
    /// Per-channel wait of a pre-scan absence; default `max_channel_time`.
    pub prescan_wait: Option<Duration>,
    /// Authentication frames for non-pre-authenticated schemes (2 = open
    /// system, 4 = shared key).
    pub auth_frames: u32,
    pub thresholds: Thresholds,
    /// Weakest signal at which an AP is heard at all.
    pub detection_floor: Dbm,
    pub mobility: MobilityParams,
    pub tick: Duration,
    pub traffic: TrafficConfig,
    pub scheme: SchemeKind,
    pub selection: Option<SelectionConfig>,
    pub seed: u64,
    pub duration: Duration,
    pub n_ms: u32,
    pub ms_placement: MsPlacement,
    /// Transmit power; default calibrated so the preventive threshold sits
    /// at half the closest AP spacing.
    pub tx_power: Option<Dbm>,
    pub frequency_hz: f64,
    /// Standard deviation of optional additive RSSI noise; zero keeps the
    /// channel deterministic.
    pub noise_std_db: f64,
    /// Per-AP link-quality penalties in dB, modeling geographic
    /// constraints on some AP regions. Empty by default.
    pub rssi_penalties: Vec<(u32, f64)>,
    /// Stations an AP accepts before refusing association requests.
    pub ap_capacity: u32,
    /// Wait before retrying after a scan that found nothing.
    pub backoff: Duration,
}

impl Scenario {
    /// A scenario with the simulator's defaults around the given layout
    /// and scheme. Thresholds -51 / -39 dBm put the pre-scan threshold at
    /// -45 dBm.
    pub fn new(layout: ApLayout, scheme: SchemeKind) -> Self {
        use crate::mobility::ModelKind;
        Scenario {
            layout,
            arena: None,
            margin: 30.0,
            neighbor_radius: None,
            timing: TimingParams::default_80211b(),
            prescan_wait: None,
            auth_frames: 2,
            thresholds: Thresholds::new(Dbm::from_f64(-51.0), Dbm::from_f64(-39.0))
                .expect("default thresholds are valid"),
            detection_floor: Dbm::from_f64(-85.0),
            mobility: MobilityParams::new(ModelKind::RandomWaypoint, 0.1, 15.0)
                .with_pause(Duration::ZERO, Duration::from_secs(2)),
            tick: Duration::from_millis(10),
            traffic: TrafficConfig::default(),
            scheme,
            selection: None,
            seed: 1,
            duration: Duration::from_secs(10),
            n_ms: 100,
            ms_placement: MsPlacement::UniformRandom,
            tx_power: None,
            frequency_hz: 2.412e9,
            noise_std_db: 0.0,
            rssi_penalties: Vec::new(),
            ap_capacity: crate::traffic::MAX_ACTIVE_PER_CELL,
            backoff: Duration::from_millis(100),
        }
    }

    /// AP positions with their 1-based pinned channels, if any.
    pub fn ap_specs(&self) -> Vec<ApSpec> {
        match &self.layout {
            ApLayout::Hex { rows, cols, spacing } => {
                let mut out = Vec::new();
                let row_step = spacing * 3f64.sqrt() / 2.0;
                for r in 0..*rows {
                    for c in 0..*cols {
                        let off = if r % 2 == 1 { spacing / 2.0 } else { 0.0 };
                        out.push(ApSpec {
                            x: self.margin + f64::from(c) * spacing + off,
                            y: self.margin + f64::from(r) * row_step,
                            channel: None,
                        });
                    }
                }
                out
            }
            ApLayout::Grid { rows, cols, spacing } => {
                let mut out = Vec::new();
                for r in 0..*rows {
                    for c in 0..*cols {
                        out.push(ApSpec {
                            x: self.margin + f64::from(c) * spacing,
                            y: self.margin + f64::from(r) * spacing,
                            channel: None,
                        });
                    }
                }
                out
            }
            ApLayout::Explicit(specs) => specs.clone(),
        }
    }

    /// The run arena: explicit, or the AP bounding box plus margin.
    pub fn arena(&self) -> Result<Arena, ScenarioError> {
        if let Some((w, h)) = self.arena {
            if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
                return Err(ScenarioError::BadArena);
            }
            return Ok(Arena::new(w, h));
        }
        let specs = self.ap_specs();
        if specs.is_empty() {
            return Err(ScenarioError::NoAps);
        }
        let max_x = specs.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max);
        let max_y = specs.iter().map(|s| s.y).fold(f64::NEG_INFINITY, f64::max);
        let w = max_x + self.margin;
        let h = max_y + self.margin;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(ScenarioError::BadArena);
        }
        Ok(Arena::new(w, h))
    }

    /// Smallest distance between two APs; `None` with fewer than two.
    pub fn min_ap_spacing(&self) -> Option<f64> {
        let specs = self.ap_specs();
        let mut best: Option<f64> = None;
        for i in 0..specs.len() {
            for j in (i + 1)..specs.len() {
                let d = Position::new(specs[i].x, specs[i].y)
                    .distance_to(&Position::new(specs[j].x, specs[j].y));
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    /// Effective transmit power: explicit, or calibrated so the received
    /// level at half the closest AP spacing equals the preventive
    /// threshold. A single-AP scenario defaults to 20 dBm.
    pub fn effective_tx_power(&self) -> Result<Dbm, ScenarioError> {
        if let Some(p) = self.tx_power {
            return Ok(p);
        }
        match self.min_ap_spacing() {
            Some(s) => Ok(transmit_power_for(
                self.thresholds.rssi_prev(),
                s / 2.0,
                self.frequency_hz,
            )?),
            None => Ok(Dbm::from_f64(20.0)),
        }
    }

    pub fn effective_neighbor_radius(&self) -> f64 {
        self.neighbor_radius
            .unwrap_or_else(|| self.min_ap_spacing().map_or(0.0, |s| s * 1.5))
    }

    pub fn effective_prescan_wait(&self) -> Duration {
        self.prescan_wait.unwrap_or(self.timing.max_channel_time)
    }

    /// Full validation; a run rejects the scenario before executing any
    /// event if this fails.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let specs = self.ap_specs();
        if specs.is_empty() {
            return Err(ScenarioError::NoAps);
        }
        let arena = self.arena()?;
        for (i, s) in specs.iter().enumerate() {
            if !arena.contains(&Position::new(s.x, s.y)) {
                return Err(ScenarioError::ApOutsideArena(i as u32, s.x, s.y));
            }
            if let Some(ch) = s.channel {
                if ch == 0 || ch > self.timing.n_channels {
                    return Err(ScenarioError::BadChannel(i as u32, ch, self.timing.n_channels));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.traffic.load) {
            return Err(ScenarioError::BadLoad(self.traffic.load));
        }
        if self.duration == Duration::ZERO {
            return Err(ScenarioError::ZeroDuration);
        }
        if self.tick == Duration::ZERO {
            return Err(ScenarioError::ZeroTick);
        }
        if !(self.mobility.speed_min > 0.0 && self.mobility.speed_max >= self.mobility.speed_min) {
            return Err(ScenarioError::BadSpeed(
                self.mobility.speed_min,
                self.mobility.speed_max,
            ));
        }
        let wait = self.effective_prescan_wait();
        if wait > self.timing.max_channel_time {
            return Err(ScenarioError::PrescanWaitTooLong(
                wait,
                self.timing.max_channel_time,
            ));
        }
        if self.ap_capacity == 0 {
            return Err(ScenarioError::ZeroCapacity);
        }
        for &(ap, db) in &self.rssi_penalties {
            if ap as usize >= specs.len() || !db.is_finite() {
                return Err(ScenarioError::BadPenalty(ap, db));
            }
        }
        if let MsPlacement::Explicit(positions) = &self.ms_placement {
            if positions.is_empty() {
                return Err(ScenarioError::NoMsPositions);
            }
            for &(x, y) in positions {
                if !arena.contains(&Position::new(x, y)) {
                    return Err(ScenarioError::MsOutsideArena(x, y));
                }
            }
        }
        // The pre-scan period must cover a full cycle.
        debug_assert!(prescan_period_alpha(&self.timing) >= prescan_time(&self.timing, wait));
        self.effective_tx_power()?;
        if let Some(sel) = &self.selection {
            sel.build_policy(self.thresholds.rssi_min())?;
        }
        Ok(())
    }
}
