//! `roamsim` — scenario runner for the 802.11 handoff simulator.
//!
//! Reads a scenario file, optionally overrides the scheme, selection
//! mode, seeds, loads and duration from the command line, executes one
//! run per (load, seed) pair, and writes one CSV row per run. `--check`
//! runs the built-in timing-formula self-test instead.
//!
//! Exit codes: 0 success, 1 self-check failure, 2 configuration error,
//! 3 I/O error.

mod config;
mod csv;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use roamsim_core::engine::{run_detailed, sweep, Scenario, SweepPoint, TraceSink, WriterSink};
use roamsim_core::scheme::SchemeKind;
use roamsim_core::selection::SelectionMode;
use roamsim_core::selfcheck;
use roamsim_core::time::Duration;

#[derive(Parser, Debug)]
#[command(name = "roamsim", version, about = "802.11 inter-cell handoff simulator")]
struct Args {
    /// Scenario configuration file.
    #[arg(long, required_unless_present = "check")]
    config: Option<PathBuf>,

    /// Override the handoff scheme
    /// (standard_active | standard_passive | apfh | pshp).
    #[arg(long)]
    scheme: Option<String>,

    /// Override the selection mode
    /// (none | weighted_sum | lexicographic | rssi_only).
    #[arg(long)]
    selection: Option<String>,

    /// Single run seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,

    /// Inclusive seed range, e.g. 1..10.
    #[arg(long)]
    seeds: Option<String>,

    /// Comma-separated traffic loads in [0, 1], e.g. 0.1,0.5,0.9.
    #[arg(long)]
    loads: Option<String>,

    /// Override the run duration, in seconds.
    #[arg(long)]
    duration: Option<u64>,

    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Per-event trace log path.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Write the end-of-run neighbor context (graph, loads, handoff
    /// history) of the last run to this path.
    #[arg(long)]
    export_context: Option<PathBuf>,

    /// Run the timing-formula self-test and exit.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.check {
        return run_check();
    }
    match run_main(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code
        }
    }
}

struct CliError {
    message: String,
    exit_code: ExitCode,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: ExitCode::from(2),
    }
}

fn io_err(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: ExitCode::from(3),
    }
}

fn run_check() -> ExitCode {
    let checks = selfcheck::run_checks();
    for c in &checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        println!("{status} {:32} {}", c.name, c.detail);
    }
    if selfcheck::all_pass(&checks) {
        println!("self-check passed ({} checks)", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("self-check FAILED");
        ExitCode::from(1)
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let (a, b) = spec
        .split_once("..")
        .ok_or_else(|| config_err(format!("--seeds expects N..M, got `{spec}`")))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad seed range start `{a}`")))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad seed range end `{b}`")))?;
    if b < a {
        return Err(config_err(format!("empty seed range {a}..{b}")));
    }
    Ok((a..=b).collect())
}

fn parse_loads(spec: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v: f64 = item
            .parse()
            .map_err(|_| config_err(format!("bad load `{item}`")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(config_err(format!("load {v} outside [0, 1]")));
        }
        out.push(v);
    }
    Ok(out)
}

fn run_main(args: &Args) -> Result<ExitCode, CliError> {
    let config_path = args.config.as_ref().expect("clap enforces --config");
    let mut scenario =
        config::parse_config(config_path).map_err(|e| config_err(e.to_string()))?;

    if let Some(name) = &args.scheme {
        scenario.scheme = SchemeKind::parse(name)
            .ok_or_else(|| config_err(format!("unknown scheme `{name}`")))?;
    }
    if let Some(mode) = &args.selection {
        match mode.as_str() {
            "none" => scenario.selection = None,
            other => {
                let mode = match other {
                    "weighted_sum" => SelectionMode::WeightedSum,
                    "lexicographic" => SelectionMode::Lexicographic,
                    "rssi_only" => SelectionMode::RssiOnly,
                    _ => return Err(config_err(format!("unknown selection mode `{other}`"))),
                };
                match &mut scenario.selection {
                    Some(cfg) => cfg.mode = mode,
                    None => {
                        scenario.selection =
                            Some(roamsim_core::engine::SelectionConfig::new(mode))
                    }
                }
            }
        }
    }
    if let Some(secs) = args.duration {
        if secs == 0 {
            return Err(config_err("--duration must be positive"));
        }
        scenario.duration = Duration::from_secs(secs);
    }

    let seeds: Vec<u64> = match (&args.seeds, args.seed) {
        (Some(spec), _) => parse_seeds(spec)?,
        (None, Some(s)) => vec![s],
        (None, None) => vec![scenario.seed],
    };
    let loads: Vec<f64> = match &args.loads {
        Some(spec) => parse_loads(spec)?,
        None => vec![scenario.traffic.load],
    };

    scenario
        .validate()
        .map_err(|e| config_err(format!("scenario validation failed: {e}")))?;

    let selection_name = scenario
        .selection
        .as_ref()
        .map_or("none", |s| s.mode_name());
    let scheme_name = scenario.scheme.name();

    let points = if args.trace.is_some() || args.export_context.is_some() {
        run_sequentially(args, &scenario, &loads, &seeds)?
    } else {
        sweep(&scenario, &loads, &seeds)
            .map_err(|e| config_err(format!("sweep failed: {e}")))?
    };

    let mut csv_bytes = Vec::new();
    csv::write_csv(&mut csv_bytes, scheme_name, selection_name, &points)
        .map_err(|e| io_err(format!("formatting csv: {e}")))?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv_bytes)
                .map_err(|e| io_err(format!("writing {}: {e}", path.display())))?;
        }
        None => {
            std::io::stdout()
                .write_all(&csv_bytes)
                .map_err(|e| io_err(format!("writing stdout: {e}")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Trace and context export need deterministic sequential execution with
/// a sink attached; the row order matches the parallel sweep.
fn run_sequentially(
    args: &Args,
    scenario: &Scenario,
    loads: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepPoint>, CliError> {
    let mut trace_out = match &args.trace {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| io_err(format!("creating {}: {e}", path.display())))?;
            Some(WriterSink::new(BufWriter::new(file)))
        }
        None => None,
    };
    let mut combos: Vec<(f64, u64)> = Vec::new();
    for &load in loads {
        for &seed in seeds {
            combos.push((load, seed));
        }
    }
    combos.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut points = Vec::new();
    let mut last_context = None;
    for (load, seed) in combos {
        let mut sc = scenario.clone();
        sc.traffic.load = load;
        sc.seed = seed;
        if let Some(sink) = trace_out.as_mut() {
            sink.line(&format!("# run load={load:.3} seed={seed}"));
        }
        let output = run_detailed(
            &sc,
            trace_out.as_mut().map(|s| s as &mut dyn TraceSink),
        )
        .map_err(|e| config_err(format!("run failed: {e}")))?;
        points.push(SweepPoint {
            load,
            seed,
            ledger: output.ledger,
        });
        last_context = Some(output.context);
    }
    if let Some(mut sink) = trace_out {
        if sink.errored {
            return Err(io_err("trace write failed"));
        }
        sink.flush()
            .map_err(|e| io_err(format!("flushing trace: {e}")))?;
    }
    if let Some(path) = &args.export_context {
        let ctx = last_context.ok_or_else(|| config_err("no runs executed"))?;
        let mut file = BufWriter::new(
            File::create(path).map_err(|e| io_err(format!("creating {}: {e}", path.display())))?,
        );
        ctx.export(&mut file)
            .map_err(|e| io_err(format!("writing {}: {e}", path.display())))?;
    }
    Ok(points)
}
