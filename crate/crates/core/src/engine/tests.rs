use super::*;
use crate::mobility::ModelKind;

fn two_ap_line(scheme: SchemeKind, duration_s: u64) -> Scenario {
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![
            ApSpec {
                x: 10.0,
                y: 10.0,
                channel: None,
            },
            ApSpec {
                x: 110.0,
                y: 10.0,
                channel: None,
            },
        ]),
        scheme,
    );
    sc.arena = Some((160.0, 20.0));
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 2.0);
    sc.ms_placement = MsPlacement::Explicit(vec![(15.0, 10.0)]);
    sc.n_ms = 1;
    sc.traffic.load = 0.0;
    sc.traffic.contention.jitter_frac = 0.0;
    sc.duration = Duration::from_secs(duration_s);
    sc
}

#[test]
fn single_ap_stationary_ms_stays_clean() {
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![ApSpec {
            x: 30.0,
            y: 30.0,
            channel: None,
        }]),
        SchemeKind::Pshp,
    );
    sc.arena = Some((60.0, 60.0));
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 0.1);
    sc.ms_placement = MsPlacement::Explicit(vec![(31.0, 30.0)]);
    sc.n_ms = 1;
    sc.traffic.load = 0.0;
    sc.traffic.contention.jitter_frac = 0.0;
    sc.duration = Duration::from_secs(10);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 0);
    assert_eq!(ledger.loss_probability(), 0.0);
    assert_eq!(ledger.packets.deadline_dropped, 0);
    assert_eq!(ledger.packets.handoff_lost, 0);
    assert_eq!(ledger.prescan_cycles, 0);
    // 10 s of 20 ms packets: 500 emissions, all delivered or in the last
    // millisecond of flight.
    assert_eq!(ledger.packets.emitted, 500);
    assert!(ledger.packets.delivered >= 499);
    ledger.verify().unwrap();
    // Zero load, no jitter: every gap is exactly the inter-arrival.
    for gap in &ledger.interframe_gaps[0] {
        assert_eq!(*gap, Duration::from_millis(20));
    }
}

#[test]
fn identical_scenarios_produce_identical_ledgers() {
    let mut sc = Scenario::new(
        ApLayout::Hex {
            rows: 3,
            cols: 3,
            spacing: 50.0,
        },
        SchemeKind::Pshp,
    );
    sc.n_ms = 20;
    sc.duration = Duration::from_secs(2);
    sc.seed = 7;
    let a = run(&sc, None).unwrap();
    let b = run(&sc, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.digest, b.digest);

    let mut other = sc.clone();
    other.seed = 8;
    let c = run(&other, None).unwrap();
    assert_ne!(a.digest, c.digest);
}

#[test]
fn trace_lines_replay_packet_counters() {
    let mut sc = Scenario::new(
        ApLayout::Hex {
            rows: 3,
            cols: 3,
            spacing: 50.0,
        },
        SchemeKind::Pshp,
    );
    sc.n_ms = 10;
    sc.duration = Duration::from_secs(2);
    let mut sink = VecSink::default();
    let ledger = run(&sc, Some(&mut sink)).unwrap();
    let count = |kind: &str| {
        sink.lines
            .iter()
            .filter(|l| l.split(',').nth(1) == Some(kind))
            .count() as u64
    };
    assert_eq!(count("emit"), ledger.packets.emitted);
    assert_eq!(count("deliver"), ledger.packets.delivered);
    assert_eq!(count("deadline_drop"), ledger.packets.deadline_dropped);
    assert_eq!(count("handoff_loss"), ledger.packets.handoff_lost);
    assert_eq!(count("buffer_drop"), ledger.packets.buffer_dropped);
    assert_eq!(
        count("handoff_complete"),
        ledger.handoff_count()
    );
}

#[test]
fn two_ap_walkthrough_pshp_single_form1() {
    let sc = two_ap_line(SchemeKind::Pshp, 25);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 1, "records: {:?}", ledger.records);
    let r = &ledger.records[0];
    assert_eq!(r.form, HandoffForm::Form1);
    assert_eq!(r.from, ApId(0));
    assert_eq!(r.to, ApId(1));
    // Pre-authenticated preventive handoff pays re-association only: two
    // frames at the zero-load base delay.
    assert_eq!(r.auth_cost, Duration::ZERO);
    assert_eq!(r.scan_overhead, Duration::ZERO);
    assert_eq!(r.assoc_cost, Duration::from_millis(2));
    assert_eq!(r.latency, Duration::from_millis(2));
    assert!(r.is_consistent());
    assert!(ledger.prescan_cycles >= 1);
    // The crossing happens once the station passes the midpoint at 60 m,
    // i.e. after (60 - 15) / 2 = 22.5 s.
    assert!(r.trigger_time >= SimTime::from_micros(22_500_000));
    assert!(r.trigger_time <= SimTime::from_micros(23_500_000));
    ledger.verify().unwrap();
}

#[test]
fn two_ap_walkthrough_standard_pays_full_scan() {
    let sc = two_ap_line(SchemeKind::Standard80211Active, 55);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 1, "records: {:?}", ledger.records);
    let r = &ledger.records[0];
    assert_eq!(r.form, HandoffForm::Baseline);
    assert_eq!(r.to, ApId(1));
    // Both occupied channels answer (max dwell), nine stay silent (min
    // dwell): 2*(5+11) + 9*(5+7) = 140 ms, plus 2+2 frames at 1 ms.
    assert_eq!(r.scan_overhead, Duration::from_millis(140));
    assert_eq!(r.auth_cost, Duration::from_millis(2));
    assert_eq!(r.assoc_cost, Duration::from_millis(2));
    assert_eq!(r.latency, Duration::from_millis(144));
    // Never cheaper than the probe lower bound plus auth and assoc.
    assert!(r.latency >= Duration::from_millis(77 + 4));
    ledger.verify().unwrap();
}

#[test]
fn two_ap_walkthrough_passive_pays_beacon_dwells() {
    let sc = two_ap_line(SchemeKind::Standard80211Passive, 55);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 1, "records: {:?}", ledger.records);
    let r = &ledger.records[0];
    // Eleven beacon dwells with switches, then the probe of the elected
    // AP: 11*(100+5) + (5+7) = 1167 ms, plus 2+2 frames at 1 ms.
    assert_eq!(r.scan_overhead, Duration::from_millis(1167));
    assert_eq!(r.latency, Duration::from_millis(1171));
    ledger.verify().unwrap();
}

#[test]
fn rssi_only_selection_is_decision_equivalent_to_plain_standard() {
    // With a complete neighbor graph and slack capacity, attaching the
    // pure-signal selection rule must not change a single decision.
    let mut base = Scenario::new(
        ApLayout::Hex {
            rows: 3,
            cols: 3,
            spacing: 50.0,
        },
        SchemeKind::Standard80211Active,
    );
    base.neighbor_radius = Some(1e6);
    base.n_ms = 5;
    base.duration = Duration::from_millis(1500);
    let mut attached = base.clone();
    attached.selection = Some(SelectionConfig::new(
        crate::selection::SelectionMode::RssiOnly,
    ));
    for seed in 1..=100u64 {
        let mut a = base.clone();
        a.seed = seed;
        let mut b = attached.clone();
        b.seed = seed;
        let la = run(&a, None).unwrap();
        let lb = run(&b, None).unwrap();
        assert_eq!(la, lb, "decision divergence at seed {seed}");
    }
}

#[test]
fn apfh_safe_zone_means_zero_handoffs() {
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![ApSpec {
            x: 30.0,
            y: 30.0,
            channel: None,
        }]),
        SchemeKind::Apfh,
    );
    sc.arena = Some((60.0, 60.0));
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 0.1);
    sc.ms_placement = MsPlacement::Explicit(vec![(31.0, 30.0)]);
    sc.n_ms = 1;
    sc.duration = Duration::from_secs(10);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 0);
    assert_eq!(ledger.packets.handoff_lost, 0);
}

#[test]
fn apfh_handover_with_nothing_tracked_falls_back_to_full_scan() {
    // The station wakes up already in the handover zone, so no tracking
    // preceded the trigger and the fallback sweep runs.
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![
            ApSpec {
                x: 10.0,
                y: 10.0,
                channel: None,
            },
            ApSpec {
                x: 60.0,
                y: 10.0,
                channel: None,
            },
        ]),
        SchemeKind::Apfh,
    );
    sc.arena = Some((200.0, 20.0));
    sc.mobility =
        MobilityParams::new(ModelKind::Linear, 0.1, 0.1).with_linear_heading(std::f64::consts::PI);
    // 55 m past the near AP: beyond the handover radius (~49.9 m) of the
    // closest AP, with no gray-zone time beforehand.
    sc.ms_placement = MsPlacement::Explicit(vec![(115.0, 10.0)]);
    sc.n_ms = 1;
    sc.traffic.load = 0.0;
    sc.traffic.contention.jitter_frac = 0.0;
    sc.duration = Duration::from_secs(2);
    let mut sink = VecSink::default();
    run(&sc, Some(&mut sink)).unwrap();
    let fallback_at = sink
        .lines
        .iter()
        .position(|l| l.contains(",handoff_trigger,") && l.contains("apfh_fallback"))
        .expect("fallback trigger");
    assert!(
        sink.lines[fallback_at..]
            .iter()
            .any(|l| l.contains(",scan_start,")),
        "no sweep after the fallback trigger"
    );
}

#[test]
fn two_ap_walkthrough_apfh_pays_auth_assoc_only() {
    let sc = two_ap_line(SchemeKind::Apfh, 55);
    let ledger = run(&sc, None).unwrap();
    assert_eq!(ledger.handoff_count(), 1, "records: {:?}", ledger.records);
    let r = &ledger.records[0];
    assert_eq!(r.form, HandoffForm::Baseline);
    assert_eq!(r.to, ApId(1));
    assert_eq!(r.scan_overhead, Duration::ZERO);
    assert_eq!(r.latency, Duration::from_millis(4));
    ledger.verify().unwrap();
}

#[test]
fn unreachable_scan_disconnects_with_exact_sweep_cost() {
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![ApSpec {
            x: 10.0,
            y: 30.0,
            channel: None,
        }]),
        SchemeKind::Standard80211Active,
    );
    sc.arena = Some((300.0, 60.0));
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 0.1);
    sc.ms_placement = MsPlacement::Explicit(vec![(290.0, 30.0)]);
    sc.n_ms = 1;
    sc.traffic.load = 0.0;
    sc.traffic.contention.jitter_frac = 0.0;
    // The single AP sits at -69 dBm: below the handoff threshold, and
    // with the floor raised it does not even answer probes.
    sc.detection_floor = Dbm::from_f64(-60.0);
    sc.duration = Duration::from_secs(2);
    let mut sink = VecSink::default();
    let ledger = run(&sc, Some(&mut sink)).unwrap();
    assert_eq!(ledger.handoff_count(), 0);
    assert_eq!(ledger.unfinished_handoffs, 1);
    // Every emission fell into the scan/backoff window.
    assert_eq!(ledger.packets.handoff_lost, ledger.packets.emitted);
    // Trigger at the first tick; a silent sweep costs 11*(5+7) = 132 ms.
    assert!(sink
        .lines
        .iter()
        .any(|l| l == "142000,disconnect,0,-,no responders"));
    ledger.verify().unwrap();
}

#[test]
fn stationary_gray_station_prescans_without_losses() {
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![
            ApSpec {
                x: 10.0,
                y: 10.0,
                channel: None,
            },
            ApSpec {
                x: 110.0,
                y: 10.0,
                channel: None,
            },
        ]),
        SchemeKind::Pshp,
    );
    sc.arena = Some((220.0, 20.0));
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 0.1).with_linear_heading(0.0);
    // 55 m past the far AP: the gray zone of its only usable AP, with the
    // other AP far below the handoff threshold.
    sc.ms_placement = MsPlacement::Explicit(vec![(165.0, 10.0)]);
    sc.n_ms = 1;
    sc.traffic.load = 0.0;
    sc.traffic.contention.jitter_frac = 0.0;
    sc.duration = Duration::from_secs(10);
    let ledger = run(&sc, None).unwrap();
    // Cycles repeat on the pre-scan period while the link stays gray.
    assert!(
        ledger.prescan_cycles >= 30,
        "cycles: {}",
        ledger.prescan_cycles
    );
    assert_eq!(ledger.handoff_count(), 0);
    // Per-channel absences are short enough that parked packets never age
    // out, and nothing is lost.
    assert_eq!(ledger.packets.deadline_dropped, 0);
    assert_eq!(ledger.packets.handoff_lost, 0);
    assert_eq!(ledger.packets.buffer_dropped, 0);
    for gap in &ledger.interframe_gaps[0] {
        assert!(*gap <= Duration::from_millis(50), "gap {gap}");
    }
    ledger.verify().unwrap();
}

#[test]
fn busy_runs_conserve_packets_and_keep_records_consistent() {
    for scheme in [
        SchemeKind::Pshp,
        SchemeKind::Apfh,
        SchemeKind::Standard80211Active,
        SchemeKind::Standard80211Passive,
    ] {
        let mut sc = Scenario::new(
            ApLayout::Hex {
                rows: 3,
                cols: 3,
                spacing: 50.0,
            },
            scheme,
        );
        sc.n_ms = 30;
        sc.traffic.load = 0.9;
        sc.duration = Duration::from_secs(5);
        sc.seed = 33;
        let ledger = run(&sc, None).unwrap();
        ledger.verify().unwrap();
        for r in &ledger.records {
            assert!(r.is_consistent(), "{scheme:?}: {r:?}");
        }
        let p = ledger.loss_probability();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn sweep_orders_rows_and_matches_single_runs() {
    let mut sc = Scenario::new(
        ApLayout::Hex {
            rows: 3,
            cols: 3,
            spacing: 50.0,
        },
        SchemeKind::Pshp,
    );
    sc.n_ms = 10;
    sc.duration = Duration::from_secs(1);
    let points = sweep(&sc, &[0.5, 0.1], &[2, 1]).unwrap();
    let key: Vec<(f64, u64)> = points.iter().map(|p| (p.load, p.seed)).collect();
    assert_eq!(key, vec![(0.1, 1), (0.1, 2), (0.5, 1), (0.5, 2)]);
    // A sweep cell equals the equivalent standalone run.
    let mut single = sc.clone();
    single.traffic.load = 0.5;
    single.seed = 2;
    let ledger = run(&single, None).unwrap();
    assert_eq!(points[3].ledger, ledger);

    assert!(sweep(&sc, &[], &[1]).unwrap().is_empty());
    assert!(sweep(&sc, &[1.5], &[1]).is_err());
}

#[test]
fn form1_requires_strictly_better_signal() {
    // A station pinned to the arena edge equidistant from both APs keeps
    // pre-scanning but never hands off: the listed candidate only ever
    // equals the current link, and the gate is strict.
    let mut sc = Scenario::new(
        ApLayout::Explicit(vec![
            ApSpec {
                x: 10.0,
                y: 10.0,
                channel: None,
            },
            ApSpec {
                x: 110.0,
                y: 10.0,
                channel: None,
            },
        ]),
        SchemeKind::Pshp,
    );
    sc.arena = Some((120.0, 20.0));
    // Heading straight out of the top edge from a point on it: the walker
    // clamps in place every tick.
    sc.mobility = MobilityParams::new(ModelKind::Linear, 0.1, 0.1)
        .with_linear_heading(std::f64::consts::FRAC_PI_2);
    sc.ms_placement = MsPlacement::Explicit(vec![(60.0, 20.0)]);
    sc.n_ms = 1;
    sc.duration = Duration::from_secs(5);
    let ledger = run(&sc, None).unwrap();
    assert!(ledger.prescan_cycles >= 2);
    assert_eq!(ledger.handoff_count(), 0);
}
