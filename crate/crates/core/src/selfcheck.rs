//! Built-in formula self-test.
//!
//! Evaluates every timing-formula example plus the threshold midpoint and
//! the propagation decade law against frozen expected values. The CLI
//! exposes this as `--check`; the acceptance suite runs it as its first
//! gate. All checks are exact in integer microseconds except the decade
//! law, which allows 1e-9 dB.

use crate::latency::{
    handover_latency, min_channel_time_bound, prescan_period_alpha, prescan_time,
    probe_time_bounds, syncscan_delay, TimingParams,
};
use crate::propagation::{prevent_threshold, received_power, Dbm, SPEED_OF_LIGHT};
use crate::time::Duration;

/// One self-check result.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check_eq(name: &'static str, got: Duration, want: Duration) -> Check {
    Check {
        name,
        passed: got == want,
        detail: format!("got {} want {}", got.as_micros(), want.as_micros()),
    }
}

fn params(n: u32) -> TimingParams {
    TimingParams::new(
        n,
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
    .expect("self-check params are valid")
}

/// Runs the whole battery.
pub fn run_checks() -> Vec<Check> {
    let mut out = Vec::new();

    let p11 = params(11);
    let (lo, hi) = probe_time_bounds(&p11);
    out.push(check_eq("probe_bounds_lower_n11", lo, Duration::from_millis(77)));
    out.push(check_eq("probe_bounds_upper_n11", hi, Duration::from_millis(121)));
    let p13 = params(13);
    let (lo, hi) = probe_time_bounds(&p13);
    out.push(check_eq("probe_bounds_lower_n13", lo, Duration::from_millis(91)));
    out.push(check_eq("probe_bounds_upper_n13", hi, Duration::from_millis(143)));

    out.push(check_eq(
        "min_channel_time_bound_802_11b",
        min_channel_time_bound(Duration::from_micros(50), 31, Duration::from_micros(20)),
        Duration::from_micros(670),
    ));
    out.push(check_eq(
        "min_channel_time_bound_alt",
        min_channel_time_bound(Duration::from_micros(28), 15, Duration::from_micros(9)),
        Duration::from_micros(163),
    ));

    out.push(check_eq(
        "handover_latency_min_dwell",
        handover_latency(&p11, Duration::from_millis(7)),
        Duration::from_millis(136),
    ));
    out.push(check_eq(
        "handover_latency_max_dwell",
        handover_latency(&p11, Duration::from_millis(11)),
        Duration::from_millis(180),
    ));

    out.push(check_eq(
        "syncscan_delay_table",
        syncscan_delay(Duration::from_millis(5), Duration::from_millis(11)),
        Duration::from_millis(21),
    ));
    out.push(check_eq(
        "syncscan_delay_fast_switch",
        syncscan_delay(Duration::from_micros(150), Duration::from_millis(100)),
        Duration::from_micros(100_300),
    ));

    out.push(check_eq(
        "prescan_time_n11",
        prescan_time(&p11, Duration::from_millis(11)),
        Duration::from_millis(176),
    ));
    out.push(check_eq(
        "prescan_time_n13",
        prescan_time(&p13, Duration::from_millis(11)),
        Duration::from_millis(208),
    ));

    out.push(check_eq(
        "prescan_period_n11",
        prescan_period_alpha(&p11),
        Duration::from_millis(264),
    ));
    out.push(check_eq(
        "prescan_period_n32",
        prescan_period_alpha(&params(32)),
        Duration::from_millis(768),
    ));

    let mid = prevent_threshold(Dbm::from_f64(-51.0), Dbm::from_f64(-39.0));
    out.push(Check {
        name: "prevent_threshold_table",
        passed: mid == Ok(Dbm::from_f64(-45.0)),
        detail: format!("got {mid:?} want -45 dBm"),
    });
    let mid = prevent_threshold(Dbm::from_f64(-51.0), Dbm::from_f64(-39.0))
        .expect("valid interval");
    out.push(Check {
        name: "prevent_threshold_midpoint",
        passed: (mid.value() - (-51.0)).abs() == ((-39.0) - mid.value()).abs(),
        detail: format!("midpoint {}", mid.value()),
    });

    // Decade law: +10x distance costs exactly 20 dB.
    let f = 2.4e9;
    let lambda = SPEED_OF_LIGHT / f;
    let d = lambda / (4.0 * std::f64::consts::PI);
    let near = received_power(Dbm::from_f64(0.0), d, f).expect("valid");
    let far = received_power(Dbm::from_f64(0.0), 10.0 * d, f).expect("valid");
    let delta = near.value() - far.value();
    out.push(Check {
        name: "decade_law_20db",
        passed: (delta - 20.0).abs() < 1e-9,
        detail: format!("delta {delta}"),
    });
    let near = received_power(Dbm::from_f64(20.0), 37.0, f).expect("valid");
    let far = received_power(Dbm::from_f64(20.0), 370.0, f).expect("valid");
    let delta = near.value() - far.value();
    out.push(Check {
        name: "decade_law_20db_generic",
        passed: (delta - 20.0).abs() < 1e-9,
        detail: format!("delta {delta}"),
    });

    out
}

/// True when every check passed.
pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_green() {
        let checks = run_checks();
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(checks.len() >= 14);
    }
}
