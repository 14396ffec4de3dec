//! Deterministic discrete-event core.
//!
//! A run owns all state: access points, stations with their mobility and
//! scheme machines, the event queue, and the metrics ledger. Three event
//! kinds drive everything — the global mobility tick, per-station traffic
//! emissions, and per-station procedure steps (scan dwells, pre-scan
//! absences, association frames). Events order by (time, insertion
//! sequence), so identical scenarios replay identically.
//!
//! Handoff sub-phases are individual events, which makes interruption
//! semantics exact: an urgent trigger during a pre-scan cycle abandons
//! the remaining channels at the end of the in-flight absence and carries
//! that remainder into the handoff latency.

mod metrics;
mod scenario;
mod trace;

pub use metrics::{MetricsLedger, PacketCounters};
pub use scenario::{
    ApLayout, ApSpec, MsPlacement, Scenario, ScenarioError, SelectionConfig, TrafficConfig,
};
pub use trace::{Digest, TraceSink, Tracer, VecSink, WriterSink};

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::latency::{prescan_period_alpha, TimingParams};
use crate::mobility::{Arena, MobilityParams, MobilityState};
use crate::propagation::{classify_zone, received_power, Dbm, Position, Thresholds, Zone};
use crate::scheme::{
    pshp_transition, ApSample, DynamicApList, HandoffForm, HandoffRecord, PshpAction, PshpEvent,
    PshpState, SchemeKind,
};
use crate::selection::{
    candidate_features, select_next_ap, CandidateFeatures, ExtentMode, NeighborContext,
    SelectionPolicy,
};
use crate::time::{Duration, SimTime};
use crate::traffic::{
    ContentionModel, LoadModel, Packet, PsmBuffer, TrafficClass, TrafficPreset, VoipSource,
};
use crate::{ApId, MsId};

/// Below this separation the free-space model is out of its depth; the
/// distance is clamped before evaluating it.
const MIN_PROPAGATION_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    Tick,
    Emit { ms: u32 },
    Proc { ms: u32, gen: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Scheduled {
    at: SimTime,
    seq: u64,
    ev: Ev,
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Ap {
    pos: Position,
    channel: u32,
    penalty_db: f64,
}

/// Latency bookkeeping carried through one handoff procedure.
#[derive(Debug, Clone, Copy)]
struct HandoffCtx {
    trigger: SimTime,
    from: usize,
    form: HandoffForm,
    scan_overhead: Duration,
    auth_cost: Duration,
    assoc_cost: Duration,
}

impl HandoffCtx {
    fn new(trigger: SimTime, from: usize, form: HandoffForm) -> Self {
        HandoffCtx {
            trigger,
            from,
            form,
            scan_overhead: Duration::ZERO,
            auth_cost: Duration::ZERO,
            assoc_cost: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ScanPhase {
    Sweep,
    /// Passive mode probes the elected AP before authenticating.
    Probe { target: usize },
}

#[derive(Debug)]
enum Activity {
    Idle,
    PreScan {
        chan: u32,
        started: SimTime,
        absence_start: SimTime,
        absence_end: SimTime,
        heard: Vec<ApSample>,
        urgent_at: Option<SimTime>,
    },
    Scanning {
        phase: ScanPhase,
        chan: u32,
        responders: Vec<ApSample>,
        hand: HandoffCtx,
        passive: bool,
    },
    Associating {
        target: usize,
        auth_left: u32,
        assoc_left: u32,
        hand: HandoffCtx,
    },
    Backoff {
        hand: HandoffCtx,
        passive: bool,
    },
}

struct PshpMs {
    state: PshpState,
    list: DynamicApList,
    next_prescan_at: SimTime,
    preauthenticated: bool,
}

struct ApfhMs {
    tracked: Option<ApSample>,
    rr_channel: u32,
}

struct Ms {
    mobility: MobilityState,
    rng: ChaCha8Rng,
    class: TrafficClass,
    source: VoipSource,
    current_ap: usize,
    psm_buffer: PsmBuffer,
    activity: Activity,
    gen: u32,
    pshp: Option<PshpMs>,
    apfh: Option<ApfhMs>,
    last_delivery: Option<SimTime>,
    holdoff_until: SimTime,
    disconnected: bool,
}

struct RunCfg {
    aps: Vec<Ap>,
    channel_aps: Vec<Vec<usize>>,
    arena: Arena,
    thresholds: Thresholds,
    timing: TimingParams,
    absence_len: Duration,
    alpha: Duration,
    staleness: Duration,
    tx_power: Dbm,
    frequency_hz: f64,
    noise_std_db: f64,
    detection_floor: Dbm,
    mobility: MobilityParams,
    tick: Duration,
    end: SimTime,
    scheme: SchemeKind,
    auth_frames: u32,
    policy: Option<(SelectionPolicy, ExtentMode)>,
    load: LoadModel,
    contention: ContentionModel,
    deadline: Duration,
    preset: TrafficPreset,
    inter_arrival: Duration,
    psm_capacity: usize,
    ap_capacity: u32,
    backoff: Duration,
}

struct World<'a> {
    cfg: RunCfg,
    ctx: NeighborContext,
    mss: Vec<Ms>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    now: SimTime,
    ledger: MetricsLedger,
    tracer: Tracer<'a>,
    medium_rng: ChaCha8Rng,
}

/// Result of a run together with the network context it built up.
pub struct RunOutput {
    pub ledger: MetricsLedger,
    pub context: NeighborContext,
}

/// Executes a scenario and returns its metrics.
pub fn run(scenario: &Scenario, sink: Option<&mut dyn TraceSink>) -> Result<MetricsLedger, ScenarioError> {
    Ok(run_detailed(scenario, sink)?.ledger)
}

/// Like [`run`], additionally returning the neighbor context for
/// inspection or export.
pub fn run_detailed(
    scenario: &Scenario,
    sink: Option<&mut dyn TraceSink>,
) -> Result<RunOutput, ScenarioError> {
    scenario.validate()?;
    let mut world = World::build(scenario, sink)?;
    world.execute();
    Ok(world.finish())
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub load: f64,
    pub seed: u64,
    pub ledger: MetricsLedger,
}

/// Runs the scenario once per (load, seed) pair. Runs execute in
/// parallel but the result order is fixed: ascending load, then seed.
pub fn sweep(
    base: &Scenario,
    loads: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepPoint>, ScenarioError> {
    let mut combos = Vec::new();
    for &load in loads {
        if !(0.0..=1.0).contains(&load) {
            return Err(ScenarioError::BadLoad(load));
        }
        for &seed in seeds {
            combos.push((load, seed));
        }
    }
    let mut points = combos
        .into_par_iter()
        .map(|(load, seed)| {
            let mut sc = base.clone();
            sc.traffic.load = load;
            sc.seed = seed;
            run(&sc, None).map(|ledger| SweepPoint { load, seed, ledger })
        })
        .collect::<Result<Vec<_>, _>>()?;
    points.sort_by(|a, b| {
        a.load
            .total_cmp(&b.load)
            .then_with(|| a.seed.cmp(&b.seed))
    });
    Ok(points)
}

fn rssi_at(cfg: &RunCfg, ap: usize, ms_pos: &Position, rng: Option<&mut ChaCha8Rng>) -> Dbm {
    let d = cfg.aps[ap].pos.distance_to(ms_pos).max(MIN_PROPAGATION_DISTANCE);
    let base = received_power(cfg.tx_power, d, cfg.frequency_hz)
        .expect("validated scenario cannot produce bad propagation inputs")
        .value()
        - cfg.aps[ap].penalty_db;
    if cfg.noise_std_db > 0.0 {
        if let Some(rng) = rng {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let z = (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            return Dbm::from_f64(base + z * cfg.noise_std_db);
        }
    }
    Dbm::from_f64(base)
}

impl<'a> World<'a> {
    fn build(scenario: &Scenario, sink: Option<&'a mut dyn TraceSink>) -> Result<Self, ScenarioError> {
        let specs = scenario.ap_specs();
        let arena = scenario.arena()?;
        let n_channels = scenario.timing.n_channels;
        let aps: Vec<Ap> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| Ap {
                pos: Position::new(s.x, s.y),
                channel: s.channel.map_or(i as u32 % n_channels, |c| c - 1),
                penalty_db: scenario
                    .rssi_penalties
                    .iter()
                    .filter(|(ap, _)| *ap as usize == i)
                    .map(|(_, db)| *db)
                    .sum(),
            })
            .collect();
        let mut channel_aps = vec![Vec::new(); n_channels as usize];
        for (i, ap) in aps.iter().enumerate() {
            channel_aps[ap.channel as usize].push(i);
        }

        let capacity_m = scenario
            .selection
            .as_ref()
            .map_or(crate::traffic::MAX_ACTIVE_PER_CELL, |s| s.capacity_m);
        let mut ctx = NeighborContext::new(aps.len(), capacity_m);
        let radius = scenario.effective_neighbor_radius();
        for i in 0..aps.len() {
            for j in (i + 1)..aps.len() {
                if aps[i].pos.distance_to(&aps[j].pos) <= radius {
                    ctx.add_neighbor_edge(ApId(i as u32), ApId(j as u32))?;
                }
            }
        }
        let policy = match &scenario.selection {
            Some(sel) => {
                for &(from, to, count) in &sel.cnx_seed {
                    ctx.seed_handoffs(ApId(from), ApId(to), count)?;
                }
                Some((
                    sel.build_policy(scenario.thresholds.rssi_min())?,
                    sel.ext_mode,
                ))
            }
            None => None,
        };

        let cfg = RunCfg {
            channel_aps,
            arena,
            thresholds: scenario.thresholds,
            timing: scenario.timing.clone(),
            absence_len: scenario.timing.t_switch * 2 + scenario.effective_prescan_wait(),
            alpha: prescan_period_alpha(&scenario.timing),
            staleness: prescan_period_alpha(&scenario.timing) * 2,
            tx_power: scenario.effective_tx_power()?,
            frequency_hz: scenario.frequency_hz,
            noise_std_db: scenario.noise_std_db,
            detection_floor: scenario.detection_floor,
            mobility: scenario.mobility,
            tick: scenario.tick,
            end: SimTime::ZERO + scenario.duration,
            scheme: scenario.scheme,
            auth_frames: scenario.auth_frames,
            policy,
            load: LoadModel::from_fraction(scenario.traffic.load),
            contention: scenario.traffic.contention,
            deadline: scenario.traffic.deadline,
            preset: scenario.traffic.preset,
            inter_arrival: scenario.traffic.inter_arrival,
            psm_capacity: scenario.traffic.psm_capacity,
            ap_capacity: scenario.ap_capacity,
            backoff: scenario.backoff,
            aps,
        };

        let mut placement_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        placement_rng.set_stream(0);
        let mut medium_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        medium_rng.set_stream(u64::from(scenario.n_ms) + 1);

        let mut mss = Vec::with_capacity(scenario.n_ms as usize);
        for id in 0..scenario.n_ms {
            let pos = match &scenario.ms_placement {
                MsPlacement::UniformRandom => cfg.arena.sample(&mut placement_rng),
                MsPlacement::Explicit(list) => {
                    let (x, y) = list[id as usize % list.len()];
                    Position::new(x, y)
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(u64::from(id) + 1);
            let mobility = MobilityState::init(&cfg.mobility, &cfg.arena, pos, &mut rng);
            // Initial association: strongest AP by plain geometry.
            let mut best = 0usize;
            let mut best_rssi = f64::NEG_INFINITY;
            for i in 0..cfg.aps.len() {
                let r = rssi_at(&cfg, i, &mobility.pos, None);
                if r.value() > best_rssi {
                    best_rssi = r.value();
                    best = i;
                }
            }
            ctx.associate(ApId(best as u32));
            mss.push(Ms {
                mobility,
                rng,
                class: cfg.preset.class_of(id),
                source: VoipSource::new(SimTime::ZERO, cfg.inter_arrival, cfg.deadline),
                current_ap: best,
                psm_buffer: PsmBuffer::new(cfg.psm_capacity),
                activity: Activity::Idle,
                gen: 0,
                pshp: (cfg.scheme == SchemeKind::Pshp).then(|| PshpMs {
                    state: PshpState::Standby,
                    list: DynamicApList::new(),
                    next_prescan_at: SimTime::ZERO,
                    preauthenticated: true,
                }),
                apfh: (cfg.scheme == SchemeKind::Apfh).then_some(ApfhMs {
                    tracked: None,
                    rr_channel: 0,
                }),
                last_delivery: None,
                holdoff_until: SimTime::ZERO,
                disconnected: false,
            });
        }

        let mut world = World {
            cfg,
            ctx,
            mss,
            queue: BinaryHeap::new(),
            seq: 0,
            now: SimTime::ZERO,
            ledger: MetricsLedger::default(),
            tracer: Tracer::new(sink),
            medium_rng,
        };
        world.ledger.interframe_gaps = vec![Vec::new(); scenario.n_ms as usize];
        let first_tick = SimTime::ZERO + world.cfg.tick;
        if first_tick <= world.cfg.end {
            world.schedule(first_tick, Ev::Tick);
        }
        for id in 0..scenario.n_ms {
            let at = world.mss[id as usize].source.next_emit_at();
            if at <= world.cfg.end {
                world.schedule(at, Ev::Emit { ms: id });
            }
        }
        Ok(world)
    }

    fn schedule(&mut self, at: SimTime, ev: Ev) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(Scheduled { at, seq, ev }));
    }

    fn schedule_proc(&mut self, i: usize, at: SimTime) {
        let gen = self.mss[i].gen;
        self.schedule(at, Ev::Proc { ms: i as u32, gen });
    }

    fn execute(&mut self) {
        while let Some(Reverse(s)) = self.queue.pop() {
            if s.at > self.cfg.end {
                break;
            }
            self.now = s.at;
            match s.ev {
                Ev::Tick => self.on_tick(),
                Ev::Emit { ms } => self.on_emit(ms as usize),
                Ev::Proc { ms, gen } => self.on_proc(ms as usize, gen),
            }
        }
    }

    fn finish(mut self) -> RunOutput {
        for i in 0..self.mss.len() {
            self.ledger.packets.in_flight_end += self.mss[i].psm_buffer.len() as u64;
            if matches!(
                self.mss[i].activity,
                Activity::Scanning { .. } | Activity::Associating { .. } | Activity::Backoff { .. }
            ) {
                self.ledger.unfinished_handoffs += 1;
            }
        }
        self.ledger.end_time = self.cfg.end;
        self.ledger.digest = self.tracer.digest.value();
        debug_assert_eq!(self.ledger.verify(), Ok(()));
        RunOutput {
            ledger: self.ledger,
            context: self.ctx,
        }
    }

    // ------------------------------------------------------------------
    // Sampling helpers
    // ------------------------------------------------------------------

    fn sample_current(&mut self, i: usize) -> Dbm {
        let World { cfg, mss, .. } = self;
        let ms = &mut mss[i];
        rssi_at(cfg, ms.current_ap, &ms.mobility.pos, Some(&mut ms.rng))
    }

    fn sample_ap(&mut self, i: usize, ap: usize) -> Dbm {
        let World { cfg, mss, .. } = self;
        let ms = &mut mss[i];
        rssi_at(cfg, ap, &ms.mobility.pos, Some(&mut ms.rng))
    }

    /// All APs on `chan` heard above the detection floor, at the
    /// station's current position.
    fn sample_channel(&mut self, i: usize, chan: u32) -> Vec<ApSample> {
        let now = self.now;
        let World { cfg, mss, .. } = self;
        let ms = &mut mss[i];
        cfg.channel_aps[chan as usize]
            .iter()
            .filter_map(|&ai| {
                let r = rssi_at(cfg, ai, &ms.mobility.pos, Some(&mut ms.rng));
                (r.value() >= cfg.detection_floor.value()).then_some(ApSample {
                    ap: ApId(ai as u32),
                    rssi: r,
                    sampled_at: now,
                })
            })
            .collect()
    }

    fn frame_delay(&mut self) -> Duration {
        self.cfg
            .contention
            .medium_access_delay(&self.cfg.load, &mut self.medium_rng)
    }

    // ------------------------------------------------------------------
    // Tick: mobility, sampling, scheme logic
    // ------------------------------------------------------------------

    fn on_tick(&mut self) {
        let now = self.now;
        for i in 0..self.mss.len() {
            {
                let World { cfg, mss, .. } = &mut *self;
                let ms = &mut mss[i];
                ms.mobility
                    .step(&cfg.mobility, &cfg.arena, now, cfg.tick, &mut ms.rng);
            }
            let rssi = self.sample_current(i);
            match self.cfg.scheme {
                SchemeKind::Pshp => self.pshp_tick(i, rssi),
                SchemeKind::Apfh => self.apfh_tick(i, rssi),
                SchemeKind::Standard80211Active | SchemeKind::Standard80211Passive => {
                    self.standard_tick(i, rssi)
                }
            }
        }
        let next = self.now + self.cfg.tick;
        if next <= self.cfg.end {
            self.schedule(next, Ev::Tick);
        }
    }

    fn standard_tick(&mut self, i: usize, rssi: Dbm) {
        if !matches!(self.mss[i].activity, Activity::Idle) {
            return;
        }
        if rssi.value() <= self.cfg.thresholds.rssi_min().value()
            && self.now >= self.mss[i].holdoff_until
        {
            let from = self.mss[i].current_ap;
            self.tracer.event(
                self.now,
                "handoff_trigger",
                Some(i as u32),
                Some(from as u32),
                &[],
                || "baseline".to_string(),
            );
            let hand = HandoffCtx::new(self.now, from, HandoffForm::Baseline);
            let passive = self.cfg.scheme == SchemeKind::Standard80211Passive;
            self.start_scan(i, hand, passive);
        }
    }

    fn apfh_tick(&mut self, i: usize, rssi: Dbm) {
        if !matches!(self.mss[i].activity, Activity::Idle) {
            return;
        }
        match classify_zone(rssi, &self.cfg.thresholds) {
            Zone::Safe => {
                self.mss[i].apfh.as_mut().expect("apfh state").tracked = None;
            }
            Zone::Gray => {
                // One channel per tick, round robin, no absence cost.
                let chan = {
                    let a = self.mss[i].apfh.as_mut().expect("apfh state");
                    let c = a.rr_channel % self.cfg.timing.n_channels;
                    a.rr_channel = a.rr_channel.wrapping_add(1);
                    c
                };
                let current = self.mss[i].current_ap;
                let samples = self.sample_channel(i, chan);
                let a = self.mss[i].apfh.as_mut().expect("apfh state");
                for s in samples {
                    if s.ap.0 as usize == current {
                        continue;
                    }
                    let replace = match &a.tracked {
                        None => true,
                        Some(t) => s.ap == t.ap || s.rssi.value() > t.rssi.value(),
                    };
                    if replace {
                        a.tracked = Some(s);
                    }
                }
            }
            Zone::Handover => {
                if self.now < self.mss[i].holdoff_until {
                    return;
                }
                let from = self.mss[i].current_ap;
                let tracked = self.mss[i].apfh.as_ref().expect("apfh state").tracked;
                let hand = HandoffCtx::new(self.now, from, HandoffForm::Baseline);
                match tracked {
                    Some(t) => {
                        self.tracer.event(
                            self.now,
                            "handoff_trigger",
                            Some(i as u32),
                            Some(from as u32),
                            &[u64::from(t.ap.0)],
                            || format!("apfh_tracked target={}", t.ap.0),
                        );
                        self.start_assoc(i, t.ap.0 as usize, hand);
                    }
                    None => {
                        self.tracer.event(
                            self.now,
                            "handoff_trigger",
                            Some(i as u32),
                            Some(from as u32),
                            &[],
                            || "apfh_fallback".to_string(),
                        );
                        self.start_scan(i, hand, false);
                    }
                }
            }
        }
    }

    // ------------------------------------------------------------------
    // PSHP
    // ------------------------------------------------------------------

    fn pshp_tick(&mut self, i: usize, rssi: Dbm) {
        let min_v = self.cfg.thresholds.rssi_min().value();
        if matches!(self.mss[i].activity, Activity::PreScan { .. }) {
            // Only an urgent threat interrupts a cycle; everything else
            // waits for it to finish.
            let mut newly_urgent = false;
            if let Activity::PreScan { urgent_at, .. } = &mut self.mss[i].activity {
                if rssi.value() <= min_v && urgent_at.is_none() {
                    *urgent_at = Some(self.now);
                    newly_urgent = true;
                }
            }
            if newly_urgent {
                let cur = self.mss[i].current_ap as u32;
                self.tracer.event(self.now, "urgent", Some(i as u32), Some(cur), &[], || {
                    "during_prescan".to_string()
                });
            }
            return;
        }
        if !matches!(self.mss[i].activity, Activity::Idle) {
            // Mid-procedure samples are non-matching events.
            let state = self.pshp_state(i);
            let tr = pshp_transition(
                state,
                &PshpEvent::RssiSample {
                    current: rssi,
                    head: None,
                },
                &self.cfg.thresholds,
            );
            if tr.ignored {
                self.ledger.ignored_events += 1;
            }
            return;
        }

        let current = self.mss[i].current_ap;
        {
            let staleness = self.cfg.staleness;
            let now = self.now;
            let p = self.mss[i].pshp.as_mut().expect("pshp state");
            p.list.purge_stale(now, staleness);
            p.list.remove(ApId(current as u32));
        }
        let acted = self.pshp_feed_sample(i, rssi, self.now, Duration::ZERO);
        if acted {
            return;
        }
        // Pre-scan arming: periodic while the link needs monitoring.
        let p = self.mss[i].pshp.as_ref().expect("pshp state");
        let state = p.state;
        if matches!(state, PshpState::Standby | PshpState::PreHandoff)
            && rssi.value() <= self.cfg.thresholds.rssi_prev().value()
            && self.now >= p.next_prescan_at
            && matches!(self.mss[i].activity, Activity::Idle)
        {
            let tr = pshp_transition(state, &PshpEvent::PrescanDue, &self.cfg.thresholds);
            debug_assert_eq!(tr.action, PshpAction::StartPrescan);
            self.set_pshp_state(i, tr.next);
            self.start_prescan(i);
        }
    }

    fn pshp_state(&self, i: usize) -> PshpState {
        self.mss[i].pshp.as_ref().expect("pshp state").state
    }

    fn set_pshp_state(&mut self, i: usize, s: PshpState) {
        self.mss[i].pshp.as_mut().expect("pshp state").state = s;
    }

    /// Best usable candidate for the current machine state: the list head
    /// in plain operation, the policy's choice with selection attached.
    fn pshp_head(&self, i: usize, current_rssi: Dbm, urgent: bool) -> Option<(ApId, Dbm)> {
        let current = ApId(self.mss[i].current_ap as u32);
        let p = self.mss[i].pshp.as_ref().expect("pshp state");
        match &self.cfg.policy {
            None => p.list.head().map(|s| (s.ap, s.rssi)),
            Some((policy, ext_mode)) => {
                let feats: Vec<CandidateFeatures> = p
                    .list
                    .entries()
                    .iter()
                    .filter_map(|e| {
                        candidate_features(&self.ctx, current, e.ap, e.rssi, *ext_mode).ok()
                    })
                    .collect();
                let floor = (!urgent).then_some(current_rssi);
                let chosen = select_next_ap(&feats, floor, policy)?;
                let e = p
                    .list
                    .entries()
                    .iter()
                    .find(|e| e.ap == chosen)
                    .expect("selected ap comes from the list");
                Some((e.ap, e.rssi))
            }
        }
    }

    /// Feeds one signal sample through the machine, chaining the urgent
    /// resolution at the same timestamp. Returns whether a procedure
    /// started.
    fn pshp_feed_sample(
        &mut self,
        i: usize,
        rssi: Dbm,
        trigger: SimTime,
        base_overhead: Duration,
    ) -> bool {
        let state = self.pshp_state(i);
        let head = self.pshp_head(i, rssi, matches!(state, PshpState::UrgentHandover));
        let tr = pshp_transition(
            state,
            &PshpEvent::RssiSample {
                current: rssi,
                head,
            },
            &self.cfg.thresholds,
        );
        if tr.ignored {
            self.ledger.ignored_events += 1;
        }
        self.set_pshp_state(i, tr.next);
        if self.pshp_dispatch(i, tr.action, trigger, base_overhead) {
            return true;
        }
        if tr.next == PshpState::UrgentHandover {
            let head = self.pshp_head(i, rssi, true);
            let tr2 = pshp_transition(
                PshpState::UrgentHandover,
                &PshpEvent::RssiSample {
                    current: rssi,
                    head,
                },
                &self.cfg.thresholds,
            );
            self.set_pshp_state(i, tr2.next);
            return self.pshp_dispatch(i, tr2.action, trigger, base_overhead);
        }
        false
    }

    fn pshp_dispatch(
        &mut self,
        i: usize,
        action: PshpAction,
        trigger: SimTime,
        base_overhead: Duration,
    ) -> bool {
        let from = self.mss[i].current_ap;
        match action {
            PshpAction::AssociateForm1(ap) => {
                let mut hand = HandoffCtx::new(trigger, from, HandoffForm::Form1);
                hand.scan_overhead = base_overhead;
                self.tracer.event(
                    self.now,
                    "handoff_trigger",
                    Some(i as u32),
                    Some(from as u32),
                    &[1, u64::from(ap.0)],
                    || format!("form=1 target={}", ap.0),
                );
                self.start_assoc(i, ap.0 as usize, hand);
                true
            }
            PshpAction::AssociateForm2(ap) => {
                let mut hand = HandoffCtx::new(trigger, from, HandoffForm::Form2);
                hand.scan_overhead = base_overhead;
                self.tracer.event(
                    self.now,
                    "handoff_trigger",
                    Some(i as u32),
                    Some(from as u32),
                    &[2, u64::from(ap.0)],
                    || format!("form=2 target={}", ap.0),
                );
                self.start_assoc(i, ap.0 as usize, hand);
                true
            }
            PshpAction::FullScanForm3 => {
                let mut hand = HandoffCtx::new(trigger, from, HandoffForm::Form3);
                hand.scan_overhead = base_overhead;
                self.tracer.event(
                    self.now,
                    "handoff_trigger",
                    Some(i as u32),
                    Some(from as u32),
                    &[3],
                    || "form=3 full_scan".to_string(),
                );
                self.start_scan(i, hand, false);
                true
            }
            _ => false,
        }
    }

    fn start_prescan(&mut self, i: usize) {
        self.ledger.prescan_cycles += 1;
        self.mss[i].gen += 1;
        let absence_end = self.now + self.cfg.absence_len;
        self.mss[i].activity = Activity::PreScan {
            chan: 0,
            started: self.now,
            absence_start: self.now,
            absence_end,
            heard: Vec::new(),
            urgent_at: None,
        };
        self.tracer.event(
            self.now,
            "prescan_start",
            Some(i as u32),
            Some(self.mss[i].current_ap as u32),
            &[],
            String::new,
        );
        let start = self.now;
        self.tracer.event(
            self.now,
            "psm_absence",
            Some(i as u32),
            None,
            &[start.as_micros(), absence_end.as_micros()],
            || format!("start_us={} end_us={}", start.as_micros(), absence_end.as_micros()),
        );
        self.schedule_proc(i, absence_end);
    }

    /// One pre-scan absence ended: sample the channel, flush the buffer,
    /// then either abandon (urgent pending), continue, or finish the
    /// cycle.
    fn prescan_step(
        &mut self,
        i: usize,
        chan: u32,
        started: SimTime,
        mut heard: Vec<ApSample>,
        urgent_at: Option<SimTime>,
    ) {
        heard.extend(self.sample_channel(i, chan));
        self.tracer.event(
            self.now,
            "prescan_channel",
            Some(i as u32),
            None,
            &[u64::from(chan), heard.len() as u64],
            || format!("chan={} heard={}", chan, heard.len()),
        );
        // Flush: the station is back on its channel; the AP drains the
        // buffer one medium access per packet.
        let parked = self.mss[i].psm_buffer.flush();
        let mut drain = Duration::ZERO;
        for p in parked {
            drain += self.frame_delay();
            self.deliver(i, p, self.now + drain);
        }

        let current = ApId(self.mss[i].current_ap as u32);
        if let Some(trig) = urgent_at {
            self.ledger.prescan_interrupted += 1;
            let p = self.mss[i].pshp.as_mut().expect("pshp state");
            p.list.merge(heard, Some(current));
            self.tracer.event(
                self.now,
                "prescan_end",
                Some(i as u32),
                None,
                &[1],
                || "interrupted".to_string(),
            );
            self.mss[i].gen += 1;
            self.mss[i].activity = Activity::Idle;
            let rssi = self.sample_current(i);
            if rssi.value() <= self.cfg.thresholds.rssi_min().value() {
                let overhead = self.now.since(trig);
                self.pshp_feed_sample(i, rssi, trig, overhead);
            }
            return;
        }

        if chan + 1 < self.cfg.timing.n_channels {
            let absence_start = self.now + drain;
            let absence_end = absence_start + self.cfg.absence_len;
            self.tracer.event(
                self.now,
                "psm_absence",
                Some(i as u32),
                None,
                &[absence_start.as_micros(), absence_end.as_micros()],
                || {
                    format!(
                        "start_us={} end_us={}",
                        absence_start.as_micros(),
                        absence_end.as_micros()
                    )
                },
            );
            self.mss[i].activity = Activity::PreScan {
                chan: chan + 1,
                started,
                absence_start,
                absence_end,
                heard,
                urgent_at: None,
            };
            self.schedule_proc(i, absence_end);
        } else {
            let alpha = self.cfg.alpha;
            let p = self.mss[i].pshp.as_mut().expect("pshp state");
            p.list.rebuild(heard, Some(current));
            p.next_prescan_at = started + alpha;
            let len = p.list.len();
            self.tracer.event(
                self.now,
                "prescan_end",
                Some(i as u32),
                None,
                &[0, len as u64],
                || format!("complete list={len}"),
            );
            self.mss[i].gen += 1;
            self.mss[i].activity = Activity::Idle;
        }
    }

    // ------------------------------------------------------------------
    // Scanning
    // ------------------------------------------------------------------

    fn start_scan(&mut self, i: usize, mut hand: HandoffCtx, passive: bool) {
        self.mss[i].gen += 1;
        self.tracer.event(
            self.now,
            "scan_start",
            Some(i as u32),
            None,
            &[u64::from(passive)],
            || format!("passive={passive}"),
        );
        let samples = self.sample_channel(i, 0);
        let dwell = self.scan_dwell(passive, !samples.is_empty());
        hand.scan_overhead += self.cfg.timing.t_switch + dwell;
        let done_at = self.now + self.cfg.timing.t_switch + dwell;
        self.mss[i].activity = Activity::Scanning {
            phase: ScanPhase::Sweep,
            chan: 0,
            responders: samples,
            hand,
            passive,
        };
        self.schedule_proc(i, done_at);
    }

    fn scan_dwell(&self, passive: bool, responders: bool) -> Duration {
        if passive {
            self.cfg.timing.beacon_interval
        } else if responders {
            self.cfg.timing.max_channel_time
        } else {
            self.cfg.timing.min_channel_time
        }
    }

    fn scan_step(
        &mut self,
        i: usize,
        phase: ScanPhase,
        chan: u32,
        mut responders: Vec<ApSample>,
        mut hand: HandoffCtx,
        passive: bool,
    ) {
        if let ScanPhase::Probe { target } = phase {
            self.start_assoc(i, target, hand);
            return;
        }
        if chan + 1 < self.cfg.timing.n_channels {
            let next = chan + 1;
            let samples = self.sample_channel(i, next);
            let dwell = self.scan_dwell(passive, !samples.is_empty());
            hand.scan_overhead += self.cfg.timing.t_switch + dwell;
            let done_at = self.now + self.cfg.timing.t_switch + dwell;
            responders.extend(samples);
            self.mss[i].activity = Activity::Scanning {
                phase: ScanPhase::Sweep,
                chan: next,
                responders,
                hand,
                passive,
            };
            self.schedule_proc(i, done_at);
            return;
        }
        // Sweep complete.
        match self.select_scan_target(i, &responders) {
            None => {
                self.tracer.event(
                    self.now,
                    "disconnect",
                    Some(i as u32),
                    None,
                    &[],
                    || "no responders".to_string(),
                );
                self.mss[i].disconnected = true;
                hand.scan_overhead += self.cfg.backoff;
                let until = self.now + self.cfg.backoff;
                self.mss[i].gen += 1;
                self.mss[i].activity = Activity::Backoff { hand, passive };
                self.schedule_proc(i, until);
            }
            Some(target) => {
                if passive {
                    // Probe the elected AP before authenticating.
                    let probe = self.cfg.timing.t_switch + self.cfg.timing.min_channel_time;
                    hand.scan_overhead += probe;
                    let done_at = self.now + probe;
                    self.tracer.event(
                        self.now,
                        "probe_selected",
                        Some(i as u32),
                        Some(target as u32),
                        &[],
                        String::new,
                    );
                    self.mss[i].activity = Activity::Scanning {
                        phase: ScanPhase::Probe { target },
                        chan,
                        responders,
                        hand,
                        passive,
                    };
                    self.schedule_proc(i, done_at);
                } else {
                    self.start_assoc(i, target, hand);
                }
            }
        }
    }

    /// Post-scan election: the attached policy over graph-neighbor
    /// responders when configured, best signal otherwise (and as the
    /// fallback when nothing is feasible).
    fn select_scan_target(&self, i: usize, responders: &[ApSample]) -> Option<usize> {
        if responders.is_empty() {
            return None;
        }
        if let Some((policy, ext_mode)) = &self.cfg.policy {
            let current = ApId(self.mss[i].current_ap as u32);
            let feats: Vec<CandidateFeatures> = responders
                .iter()
                .filter_map(|e| candidate_features(&self.ctx, current, e.ap, e.rssi, *ext_mode).ok())
                .collect();
            if let Some(ap) = select_next_ap(&feats, None, policy) {
                return Some(ap.0 as usize);
            }
        }
        let mut best: Option<&ApSample> = None;
        for s in responders {
            let better = match best {
                None => true,
                Some(b) => {
                    s.rssi.value() > b.rssi.value()
                        || (s.rssi == b.rssi && s.ap.0 < b.ap.0)
                }
            };
            if better {
                best = Some(s);
            }
        }
        best.map(|s| s.ap.0 as usize)
    }

    // ------------------------------------------------------------------
    // Association
    // ------------------------------------------------------------------

    /// Authentication (baselines only; the preventive scheme is
    /// pre-authenticated within its ESS) followed by re-association, one
    /// medium access per frame.
    fn start_assoc(&mut self, i: usize, target: usize, hand: HandoffCtx) {
        let auth_frames = match self.cfg.scheme {
            SchemeKind::Pshp => {
                let pre = self.mss[i].pshp.as_ref().expect("pshp state").preauthenticated;
                if pre {
                    0
                } else {
                    self.cfg.auth_frames
                }
            }
            _ => self.cfg.auth_frames,
        };
        self.mss[i].gen += 1;
        self.mss[i].activity = Activity::Associating {
            target,
            auth_left: auth_frames,
            assoc_left: 2,
            hand,
        };
        self.schedule_frame(i);
    }

    fn schedule_frame(&mut self, i: usize) {
        let d = self.frame_delay();
        let now = self.now;
        let (kind, target) = {
            let Activity::Associating {
                target,
                auth_left,
                assoc_left: _,
                hand,
            } = &mut self.mss[i].activity
            else {
                unreachable!("frame scheduling outside association");
            };
            if *auth_left > 0 {
                hand.auth_cost += d;
                ("auth_frame", *target)
            } else {
                hand.assoc_cost += d;
                ("assoc_frame", *target)
            }
        };
        self.tracer.event(
            now,
            kind,
            Some(i as u32),
            Some(target as u32),
            &[d.as_micros()],
            || format!("delay={}", d.as_micros()),
        );
        self.schedule_proc(i, now + d);
    }

    fn assoc_step(
        &mut self,
        i: usize,
        target: usize,
        auth_left: u32,
        assoc_left: u32,
        hand: HandoffCtx,
    ) {
        let (auth_left, assoc_left) = if auth_left > 0 {
            (auth_left - 1, assoc_left)
        } else {
            (auth_left, assoc_left - 1)
        };
        if auth_left + assoc_left > 0 {
            self.mss[i].activity = Activity::Associating {
                target,
                auth_left,
                assoc_left,
                hand,
            };
            self.schedule_frame(i);
            return;
        }
        self.resolve_assoc(i, target, hand);
    }

    fn resolve_assoc(&mut self, i: usize, target: usize, hand: HandoffCtx) {
        let rssi = self.sample_ap(i, target);
        let signal_ok = match hand.form {
            // The preventive gate re-checks at completion: the target must
            // still clear the handoff threshold.
            HandoffForm::Form1 | HandoffForm::Form2 => {
                rssi.value() > self.cfg.thresholds.rssi_min().value()
            }
            HandoffForm::Form3 | HandoffForm::Baseline => {
                rssi.value() >= self.cfg.detection_floor.value()
            }
        };
        // A full AP refuses new stations (its own are unaffected).
        let admitted = target == hand.from
            || self.ctx.assoc_count(ApId(target as u32)) < self.cfg.ap_capacity;
        let success = signal_ok && admitted;
        if success {
            self.complete_handoff(i, target, hand);
        } else {
            self.tracer.event(
                self.now,
                "assoc_fail",
                Some(i as u32),
                Some(target as u32),
                &[],
                String::new,
            );
            if self.cfg.scheme == SchemeKind::Pshp {
                let tr = pshp_transition(
                    self.pshp_state(i),
                    &PshpEvent::AssociationResult { success: false },
                    &self.cfg.thresholds,
                );
                self.set_pshp_state(i, tr.next);
                match tr.action {
                    PshpAction::PurgeListAndPrescan => {
                        self.ledger.assoc_failures += 1;
                        let now = self.now;
                        let p = self.mss[i].pshp.as_mut().expect("pshp state");
                        p.list.clear();
                        p.next_prescan_at = now;
                        self.mss[i].gen += 1;
                        self.mss[i].activity = Activity::Idle;
                    }
                    PshpAction::FullScanForm3 => {
                        let mut hand = hand;
                        hand.form = HandoffForm::Form3;
                        self.start_scan(i, hand, false);
                    }
                    _ => unreachable!("association failure yields a recovery action"),
                }
            } else {
                let passive = self.cfg.scheme == SchemeKind::Standard80211Passive;
                self.start_scan(i, hand, passive);
            }
        }
    }

    fn complete_handoff(&mut self, i: usize, target: usize, hand: HandoffCtx) {
        let same_ap = target == hand.from;
        self.mss[i].gen += 1;
        self.mss[i].activity = Activity::Idle;
        self.mss[i].disconnected = false;
        if same_ap {
            // Nothing better existed; stay put and hold off re-triggering
            // for a backoff so the scan does not restart every tick.
            self.mss[i].holdoff_until = self.now + self.cfg.backoff;
            self.tracer.event(
                self.now,
                "reassoc_same",
                Some(i as u32),
                Some(target as u32),
                &[],
                String::new,
            );
        } else {
            self.ctx
                .record_handoff(ApId(hand.from as u32), ApId(target as u32));
            self.mss[i].current_ap = target;
            let latency = self.now.since(hand.trigger);
            let record = HandoffRecord {
                ms: MsId(i as u32),
                from: ApId(hand.from as u32),
                to: ApId(target as u32),
                form: hand.form,
                trigger_time: hand.trigger,
                complete_time: self.now,
                latency,
                scan_overhead: hand.scan_overhead,
                auth_cost: hand.auth_cost,
                assoc_cost: hand.assoc_cost,
            };
            debug_assert!(record.is_consistent(), "record {record:?}");
            let form_code = match hand.form {
                HandoffForm::Form1 => 1,
                HandoffForm::Form2 => 2,
                HandoffForm::Form3 => 3,
                HandoffForm::Baseline => 0,
            };
            self.tracer.event(
                self.now,
                "handoff_complete",
                Some(i as u32),
                Some(target as u32),
                &[form_code, latency.as_micros()],
                || format!("form={} latency_us={}", form_code, latency.as_micros()),
            );
            self.ledger.records.push(record);
        }
        if self.cfg.scheme == SchemeKind::Pshp {
            let tr = pshp_transition(
                self.pshp_state(i),
                &PshpEvent::AssociationResult { success: true },
                &self.cfg.thresholds,
            );
            self.set_pshp_state(i, tr.next);
            if tr.action == PshpAction::CompleteHandoff {
                let now = self.now;
                let p = self.mss[i].pshp.as_mut().expect("pshp state");
                p.list.remove(ApId(target as u32));
                p.next_prescan_at = now;
            }
        }
        if self.cfg.scheme == SchemeKind::Apfh {
            self.mss[i].apfh.as_mut().expect("apfh state").tracked = None;
        }
    }

    // ------------------------------------------------------------------
    // Traffic
    // ------------------------------------------------------------------

    fn on_emit(&mut self, i: usize) {
        let packet = self.mss[i]
            .source
            .next_packet(self.now)
            .expect("emit event fired exactly at a boundary");
        let realtime = self.mss[i].class == TrafficClass::RealTime;
        self.ledger.packets.emitted += 1;
        if realtime {
            self.ledger.packets.realtime_emitted += 1;
        }
        self.tracer.event(
            self.now,
            "emit",
            Some(i as u32),
            None,
            &[packet.seq],
            || format!("seq={}", packet.seq),
        );
        let next = self.mss[i].source.next_emit_at();
        if next <= self.cfg.end {
            self.schedule(next, Ev::Emit { ms: i as u32 });
        }

        let unreachable_now = self.mss[i].disconnected
            || matches!(
                self.mss[i].activity,
                Activity::Scanning { .. } | Activity::Associating { .. } | Activity::Backoff { .. }
            );
        if unreachable_now {
            self.ledger.packets.handoff_lost += 1;
            self.tracer.event(
                self.now,
                "handoff_loss",
                Some(i as u32),
                None,
                &[packet.seq],
                || format!("seq={}", packet.seq),
            );
            return;
        }
        let absent = matches!(
            self.mss[i].activity,
            Activity::PreScan { absence_start, absence_end, .. }
                if self.now >= absence_start && self.now < absence_end
        );
        if absent {
            if let Some(evicted) = self.mss[i].psm_buffer.enqueue(packet) {
                self.ledger.packets.buffer_dropped += 1;
                self.tracer.event(
                    self.now,
                    "buffer_drop",
                    Some(i as u32),
                    None,
                    &[evicted.seq],
                    || format!("seq={}", evicted.seq),
                );
            }
            self.tracer.event(
                self.now,
                "buffered",
                Some(i as u32),
                None,
                &[packet.seq],
                || format!("seq={}", packet.seq),
            );
            return;
        }
        let d = self.frame_delay();
        self.deliver(i, packet, self.now + d);
    }

    fn deliver(&mut self, i: usize, packet: Packet, at: SimTime) {
        if at > self.cfg.end {
            self.ledger.packets.in_flight_end += 1;
            self.tracer.event(
                self.now,
                "in_flight",
                Some(i as u32),
                None,
                &[packet.seq],
                || format!("seq={}", packet.seq),
            );
            return;
        }
        let realtime = self.mss[i].class == TrafficClass::RealTime;
        let age = at.since(packet.emitted_at);
        if realtime && age > self.cfg.deadline {
            self.ledger.packets.deadline_dropped += 1;
            self.tracer.event(
                self.now,
                "deadline_drop",
                Some(i as u32),
                None,
                &[packet.seq, age.as_micros()],
                || format!("seq={} age_us={}", packet.seq, age.as_micros()),
            );
            return;
        }
        self.ledger.packets.delivered += 1;
        if realtime {
            self.ledger.packets.realtime_delivered += 1;
            if let Some(last) = self.mss[i].last_delivery {
                self.ledger.interframe_gaps[i].push(at.since(last));
            }
            self.mss[i].last_delivery = Some(at);
        }
        self.tracer.event(
            self.now,
            "deliver",
            Some(i as u32),
            None,
            &[packet.seq, at.as_micros()],
            || format!("seq={} at_us={}", packet.seq, at.as_micros()),
        );
    }

    // ------------------------------------------------------------------
    // Procedure dispatch
    // ------------------------------------------------------------------

    fn on_proc(&mut self, i: usize, gen: u32) {
        if self.mss[i].gen != gen {
            return;
        }
        let activity = std::mem::replace(&mut self.mss[i].activity, Activity::Idle);
        match activity {
            Activity::Idle => {}
            Activity::PreScan {
                chan,
                started,
                heard,
                urgent_at,
                ..
            } => self.prescan_step(i, chan, started, heard, urgent_at),
            Activity::Scanning {
                phase,
                chan,
                responders,
                hand,
                passive,
            } => self.scan_step(i, phase, chan, responders, hand, passive),
            Activity::Associating {
                target,
                auth_left,
                assoc_left,
                hand,
            } => self.assoc_step(i, target, auth_left, assoc_left, hand),
            Activity::Backoff { hand, passive, .. } => {
                self.start_scan(i, hand, passive);
            }
        }
    }
}

#[cfg(test)]
mod tests;
