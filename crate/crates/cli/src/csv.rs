//! CSV emission for sweep results.
//!
//! One row per run, sorted by (load, seed). The header is fixed and
//! versioned by the leading comment line; numeric formatting is
//! locale-independent, so identical invocations write identical bytes.

use std::io::{self, Write};

use roamsim_core::engine::SweepPoint;
use roamsim_core::scheme::HandoffForm;

pub const SCHEMA_LINE: &str = "# roamsim-csv v1";
pub const HEADER: &str = "run_id,seed,load,scheme,selection,handoff_count,form1,form2,form3,\
mean_latency_us,median_latency_us,p95_latency_us,loss_probability,\
packets_emitted,packets_delivered,packets_dropped";

pub fn write_csv<W: Write>(
    out: &mut W,
    scheme: &str,
    selection: &str,
    points: &[SweepPoint],
) -> io::Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{HEADER}")?;
    for (idx, p) in points.iter().enumerate() {
        let l = &p.ledger;
        let dropped = l.packets.deadline_dropped + l.packets.buffer_dropped + l.packets.handoff_lost;
        writeln!(
            out,
            "{},{},{:.3},{},{},{},{},{},{},{},{},{},{:.6},{},{},{}",
            idx + 1,
            p.seed,
            p.load,
            scheme,
            selection,
            l.handoff_count(),
            l.form_count(HandoffForm::Form1),
            l.form_count(HandoffForm::Form2),
            l.form_count(HandoffForm::Form3),
            l.mean_latency_us(),
            l.median_latency_us(),
            l.p95_latency_us(),
            l.loss_probability(),
            l.packets.emitted,
            l.packets.delivered,
            dropped,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use roamsim_core::engine::MetricsLedger;

    #[test]
    fn empty_sweep_writes_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "pshp", "none", &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SCHEMA_LINE);
        assert_eq!(lines[1], HEADER);
    }

    #[test]
    fn row_formatting_is_fixed() {
        let point = SweepPoint {
            load: 0.5,
            seed: 3,
            ledger: MetricsLedger::default(),
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, "pshp", "weighted_sum", &[point]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(2).unwrap();
        assert_eq!(
            row,
            "1,3,0.500,pshp,weighted_sum,0,0,0,0,0,0,0,0.000000,0,0,0"
        );
    }
}
