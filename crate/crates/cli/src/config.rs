//! Scenario configuration files.
//!
//! One dialect: `[section]` headers and `key = value` lines, `#` for
//! comments. Unknown sections or keys are errors, so typos never pass
//! silently, and every diagnostic carries the offending line number.
//! Absent keys fall back to the simulator's defaults (11 channels, 7/11
//! ms dwells, 5 ms switch, -51/-45 dBm thresholds, 0.1-15 m/s, 20 ms
//! voice packets with a 50 ms deadline).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use roamsim_core::engine::{ApLayout, ApSpec, MsPlacement, Scenario, SelectionConfig};
use roamsim_core::latency::TimingParams;
use roamsim_core::mobility::{MobilityParams, ModelKind};
use roamsim_core::propagation::{Dbm, Thresholds};
use roamsim_core::scheme::SchemeKind;
use roamsim_core::selection::{ExtentMode, SelectionMode};
use roamsim_core::time::Duration;
use roamsim_core::traffic::TrafficPreset;

/// A configuration diagnostic with its source location.
#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<u32>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

struct Raw {
    path: PathBuf,
    // (section, key) -> (value, line)
    entries: BTreeMap<(String, String), (String, u32)>,
    sections: Vec<String>,
}

const SECTIONS: &[&str] = &[
    "arena",
    "aps",
    "timing",
    "thresholds",
    "mobility",
    "traffic",
    "scheme",
    "selection",
    "run",
];

impl Raw {
    fn err(&self, line: Option<u32>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn parse(path: &Path, text: &str) -> Result<Raw, ConfigError> {
        let mut raw = Raw {
            path: path.to_path_buf(),
            entries: BTreeMap::new(),
            sections: Vec::new(),
        };
        let mut section: Option<String> = None;
        for (idx, full_line) in text.lines().enumerate() {
            let line_no = idx as u32 + 1;
            let line = match full_line.find('#') {
                Some(p) => &full_line[..p],
                None => full_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(raw.err(Some(line_no), format!("unknown section [{name}]")));
                }
                raw.sections.push(name.clone());
                section = Some(name);
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(raw.err(Some(line_no), format!("expected `key = value`, got `{line}`")));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            let Some(section) = section.clone() else {
                return Err(raw.err(Some(line_no), format!("key `{key}` before any [section]")));
            };
            if raw
                .entries
                .insert((section.clone(), key.clone()), (value, line_no))
                .is_some()
            {
                return Err(raw.err(Some(line_no), format!("duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(raw)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, u32)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn take_f64(&mut self, section: &str, key: &str) -> Result<Option<(f64, u32)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some((x, line))),
                _ => Err(self.err(Some(line), format!("`{key}` expects a finite number, got `{v}`"))),
            },
        }
    }

    fn take_u64(&mut self, section: &str, key: &str) -> Result<Option<(u64, u32)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<u64>() {
                Ok(x) => Ok(Some((x, line))),
                _ => Err(self.err(
                    Some(line),
                    format!("`{key}` expects a non-negative integer, got `{v}`"),
                )),
            },
        }
    }

    fn take_bool(&mut self, section: &str, key: &str) -> Result<Option<(bool, u32)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => match v.as_str() {
                "true" | "on" | "yes" => Ok(Some((true, line))),
                "false" | "off" | "no" => Ok(Some((false, line))),
                _ => Err(self.err(Some(line), format!("`{key}` expects on/off, got `{v}`"))),
            },
        }
    }

    /// Remaining entries are typos; report the first by line number.
    fn finish(self) -> Result<(), ConfigError> {
        if let Some(((section, key), (_, line))) = self
            .entries
            .iter()
            .min_by_key(|(_, (_, line))| *line)
            .map(|(k, v)| (k.clone(), v.clone()))
        {
            return Err(self.err(Some(line), format!("unknown key `{key}` in [{section}]")));
        }
        Ok(())
    }
}

fn us(v: u64) -> Duration {
    Duration::from_micros(v)
}

/// Reads and fully validates a scenario file.
pub fn parse_config(path: &Path) -> Result<Scenario, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config_str(path, &text)
}

/// Parses configuration text; `path` is used for diagnostics and for
/// resolving referenced files.
pub fn parse_config_str(path: &Path, text: &str) -> Result<Scenario, ConfigError> {
    let mut raw = Raw::parse(path, text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();

    if !raw.sections.iter().any(|s| s == "aps") {
        return Err(raw.err(None, "missing required section [aps] (access-point placement)"));
    }

    // [aps]
    let layout_kind = raw.take("aps", "layout");
    let rows = raw.take_u64("aps", "rows")?.map(|(v, l)| (v as u32, l));
    let cols = raw.take_u64("aps", "cols")?.map(|(v, l)| (v as u32, l));
    let spacing = raw.take_f64("aps", "spacing")?;
    let ap_file = raw.take("aps", "file");
    let neighbor_radius = raw.take_f64("aps", "neighbor_radius")?;
    let ap_capacity = raw.take_u64("aps", "capacity")?;
    let penalties_raw = raw.take("aps", "penalties");

    let layout = match layout_kind.as_ref().map(|(v, l)| (v.as_str(), *l)) {
        None | Some(("hex", _)) => ApLayout::Hex {
            rows: rows.map_or(5, |(v, _)| v),
            cols: cols.map_or(5, |(v, _)| v),
            spacing: spacing.map_or(50.0, |(v, _)| v),
        },
        Some(("grid", _)) => ApLayout::Grid {
            rows: rows.map_or(5, |(v, _)| v),
            cols: cols.map_or(5, |(v, _)| v),
            spacing: spacing.map_or(50.0, |(v, _)| v),
        },
        Some(("explicit", line)) => {
            let Some((file, fline)) = ap_file.clone() else {
                return Err(raw.err(Some(line), "layout = explicit requires `file`"));
            };
            let specs = read_ap_file(&raw, &base_dir.join(&file), fline)?;
            ApLayout::Explicit(specs)
        }
        Some((other, line)) => {
            return Err(raw.err(
                Some(line),
                format!("layout must be hex, grid or explicit, got `{other}`"),
            ));
        }
    };
    if matches!(layout, ApLayout::Hex { .. } | ApLayout::Grid { .. }) {
        if let Some((_, line)) = ap_file {
            return Err(raw.err(Some(line), "`file` is only valid with layout = explicit"));
        }
    }
    let rssi_penalties = match penalties_raw {
        None => Vec::new(),
        Some((v, line)) => parse_penalties(&raw, &v, line)?,
    };

    // [scheme]
    let scheme = match raw.take("scheme", "scheme") {
        None => SchemeKind::Pshp,
        Some((v, line)) => SchemeKind::parse(&v).ok_or_else(|| {
            raw.err(
                Some(line),
                format!("scheme must be standard_active, standard_passive, apfh or pshp, got `{v}`"),
            )
        })?,
    };
    let backoff = raw.take_u64("scheme", "backoff_us")?.map(|(v, _)| us(v));

    let mut sc = Scenario::new(layout, scheme);
    sc.rssi_penalties = rssi_penalties;
    if let Some((r, _)) = neighbor_radius {
        sc.neighbor_radius = Some(r);
    }
    if let Some((c, line)) = ap_capacity {
        if c == 0 {
            return Err(raw.err(Some(line), "capacity must be at least 1"));
        }
        sc.ap_capacity = c as u32;
    }
    if let Some(b) = backoff {
        sc.backoff = b;
    }

    // [arena]
    let width = raw.take_f64("arena", "width")?;
    let height = raw.take_f64("arena", "height")?;
    match (width, height) {
        (Some((w, lw)), Some((h, _))) => {
            if w <= 0.0 || h <= 0.0 {
                return Err(raw.err(Some(lw), "arena dimensions must be positive"));
            }
            sc.arena = Some((w, h));
        }
        (None, None) => {}
        (Some((_, line)), None) | (None, Some((_, line))) => {
            return Err(raw.err(Some(line), "arena needs both width and height"));
        }
    }
    if let Some((m, line)) = raw.take_f64("arena", "margin")? {
        if m < 0.0 {
            return Err(raw.err(Some(line), "margin must be non-negative"));
        }
        sc.margin = m;
    }

    // [timing]
    let d = TimingParams::default_80211b();
    let channels = raw.take_u64("timing", "channels")?.map_or(d.n_channels, |(v, _)| v as u32);
    let min_ct = raw.take_u64("timing", "min_channel_time_us")?.map_or(d.min_channel_time, |(v, _)| us(v));
    let max_ct = raw.take_u64("timing", "max_channel_time_us")?.map_or(d.max_channel_time, |(v, _)| us(v));
    let switch = raw.take_u64("timing", "switch_us")?.map_or(d.t_switch, |(v, _)| us(v));
    let difs = raw.take_u64("timing", "difs_us")?.map_or(d.difs, |(v, _)| us(v));
    let slot = raw.take_u64("timing", "slot_time_us")?.map_or(d.slot_time, |(v, _)| us(v));
    let cw = raw.take_u64("timing", "cw")?.map_or(d.cw, |(v, _)| v as u32);
    let auth_mode = raw.take("timing", "auth");
    let auth_frames = match auth_mode.as_ref().map(|(v, l)| (v.as_str(), *l)) {
        None | Some(("open", _)) => 2,
        Some(("shared", _)) => 4,
        Some((other, line)) => {
            return Err(raw.err(Some(line), format!("auth must be open or shared, got `{other}`")));
        }
    };
    let t_auth = raw
        .take_u64("timing", "t_auth_us")?
        .map_or(us(1000) * u64::from(auth_frames), |(v, _)| us(v));
    let t_assoc = raw.take_u64("timing", "t_assoc_us")?.map_or(d.t_assoc, |(v, _)| us(v));
    let beacon = raw.take_u64("timing", "beacon_interval_us")?.map_or(d.beacon_interval, |(v, _)| us(v));
    sc.timing = TimingParams::new(
        channels, min_ct, max_ct, switch, difs, slot, cw, t_auth, t_assoc, beacon,
    )
    .map_err(|e| raw.err(None, format!("[timing]: {e}")))?;
    sc.auth_frames = auth_frames;
    if let Some((w, _)) = raw.take_u64("timing", "prescan_wait_us")? {
        sc.prescan_wait = Some(us(w));
    }

    // [thresholds]
    let rssi_min = raw.take_f64("thresholds", "rssi_min_dbm")?.map_or(-51.0, |(v, _)| v);
    let rssi_max = raw.take_f64("thresholds", "rssi_max_dbm")?.map_or(-39.0, |(v, _)| v);
    sc.thresholds = Thresholds::new(Dbm::from_f64(rssi_min), Dbm::from_f64(rssi_max))
        .map_err(|e| raw.err(None, format!("[thresholds]: {e}")))?;
    if let Some((f, _)) = raw.take_f64("thresholds", "detection_floor_dbm")? {
        sc.detection_floor = Dbm::from_f64(f);
    }

    // [mobility]
    let model = match raw.take("mobility", "model") {
        None => ModelKind::RandomWaypoint,
        Some((v, line)) => match v.as_str() {
            "random_waypoint" => ModelKind::RandomWaypoint,
            "random_direction" => ModelKind::RandomDirection,
            "linear" => ModelKind::Linear,
            other => {
                return Err(raw.err(
                    Some(line),
                    format!(
                        "model must be random_waypoint, random_direction or linear, got `{other}`"
                    ),
                ));
            }
        },
    };
    let allow_speed_override = raw
        .take_bool("mobility", "allow_speed_override")?
        .is_some_and(|(v, _)| v);
    let speed_min = raw.take_f64("mobility", "speed_min")?;
    let speed_max = raw.take_f64("mobility", "speed_max")?;
    let smin = speed_min.map_or(0.1, |(v, _)| v);
    let smax = speed_max.map_or(15.0, |(v, _)| v);
    if !(smin > 0.0 && smax >= smin) {
        let line = speed_max.or(speed_min).map(|(_, l)| l);
        return Err(raw.err(line, format!("speed bounds invalid: {smin}..{smax}")));
    }
    if !allow_speed_override {
        if let Some((v, line)) = speed_max {
            if v > 15.0 {
                return Err(raw.err(
                    Some(line),
                    format!(
                        "speed_max {v} exceeds the 15 m/s bound; set allow_speed_override = on to accept"
                    ),
                ));
            }
        }
        if let Some((v, line)) = speed_min {
            if v < 0.1 {
                return Err(raw.err(
                    Some(line),
                    format!(
                        "speed_min {v} is below the 0.1 m/s bound; set allow_speed_override = on to accept"
                    ),
                ));
            }
        }
    }
    let pause_min = raw.take_f64("mobility", "pause_min_s")?.map_or(0.0, |(v, _)| v);
    let pause_max = raw.take_f64("mobility", "pause_max_s")?.map_or(
        if model == ModelKind::RandomWaypoint { 2.0 } else { 0.0 },
        |(v, _)| v,
    );
    if pause_min < 0.0 || pause_max < pause_min {
        return Err(raw.err(None, format!("[mobility]: pause bounds invalid: {pause_min}..{pause_max}")));
    }
    let heading_deg = raw.take_f64("mobility", "heading_deg")?.map_or(0.0, |(v, _)| v);
    sc.mobility = MobilityParams::new(model, smin, smax)
        .with_pause(
            Duration::from_micros((pause_min * 1e6).round() as u64),
            Duration::from_micros((pause_max * 1e6).round() as u64),
        )
        .with_linear_heading(heading_deg.to_radians());
    if let Some((t, line)) = raw.take_u64("mobility", "tick_us")? {
        if t == 0 {
            return Err(raw.err(Some(line), "tick_us must be positive"));
        }
        sc.tick = us(t);
    }

    // [traffic]
    if let Some((v, line)) = raw.take("traffic", "preset") {
        sc.traffic.preset = TrafficPreset::parse(&v).ok_or_else(|| {
            raw.err(
                Some(line),
                format!("preset must be voip_only, mix_75_25 or mix_50_50, got `{v}`"),
            )
        })?;
    }
    if let Some((v, line)) = raw.take_u64("traffic", "inter_arrival_us")? {
        if v == 0 {
            return Err(raw.err(Some(line), "inter_arrival_us must be positive"));
        }
        sc.traffic.inter_arrival = us(v);
    }
    if let Some((v, _)) = raw.take_u64("traffic", "deadline_us")? {
        sc.traffic.deadline = us(v);
    }
    if sc.traffic.deadline <= sc.traffic.inter_arrival {
        return Err(raw.err(None, "[traffic]: deadline must exceed the inter-arrival time"));
    }
    if let Some((v, line)) = raw.take_u64("traffic", "psm_capacity")? {
        if v == 0 {
            return Err(raw.err(Some(line), "psm_capacity must be at least 1"));
        }
        sc.traffic.psm_capacity = v as usize;
    }
    if let Some((v, _)) = raw.take_u64("traffic", "base_delay_us")? {
        sc.traffic.contention.base_delay = us(v);
    }
    if let Some((v, line)) = raw.take_f64("traffic", "contention_factor")? {
        if v < 0.0 {
            return Err(raw.err(Some(line), "contention_factor must be non-negative"));
        }
        sc.traffic.contention.factor = v;
    }
    if let Some((on, _)) = raw.take_bool("traffic", "jitter")? {
        sc.traffic.contention.jitter_frac = if on { 0.2 } else { 0.0 };
    }
    if let Some((v, line)) = raw.take_f64("traffic", "load")? {
        if !(0.0..=1.0).contains(&v) {
            return Err(raw.err(Some(line), format!("load must be within [0, 1], got {v}")));
        }
        sc.traffic.load = v;
    }

    // [selection]
    let mode_entry = raw.take("selection", "mode");
    let mode_explicit = mode_entry.is_some();
    let mode = match mode_entry {
        None => None,
        Some((v, line)) => match v.as_str() {
            "none" => None,
            "weighted_sum" => Some(SelectionMode::WeightedSum),
            "lexicographic" => Some(SelectionMode::Lexicographic),
            "rssi_only" => Some(SelectionMode::RssiOnly),
            other => {
                return Err(raw.err(
                    Some(line),
                    format!(
                        "mode must be none, weighted_sum, lexicographic or rssi_only, got `{other}`"
                    ),
                ));
            }
        },
    };
    let w_rssi = raw.take_f64("selection", "w_rssi")?;
    let w_ext = raw.take_f64("selection", "w_ext")?;
    let w_cnx = raw.take_f64("selection", "w_cnx")?;
    let w_load = raw.take_f64("selection", "w_load")?;
    let sel_capacity = raw.take_u64("selection", "capacity")?;
    let ext_two_hop = raw.take_bool("selection", "ext_two_hop")?;
    let cnx_seed_file = raw.take("selection", "cnx_seed_file");
    if let Some(mode) = mode {
        let mut cfg = SelectionConfig::new(mode);
        cfg.w_rssi = w_rssi.map_or(1.0, |(v, _)| v);
        cfg.w_ext = w_ext.map_or(1.0, |(v, _)| v);
        cfg.w_cnx = w_cnx.map_or(1.0, |(v, _)| v);
        cfg.w_load = w_load.map_or(1.0, |(v, _)| v);
        cfg.capacity_m = sel_capacity.map_or(32, |(v, _)| v as u32);
        if ext_two_hop.is_some_and(|(v, _)| v) {
            cfg.ext_mode = ExtentMode::TwoHopOnly;
        }
        if let Some((file, line)) = cnx_seed_file {
            cfg.cnx_seed = read_cnx_file(&raw, &base_dir.join(&file), line)?;
        }
        sc.selection = Some(cfg);
    } else if !mode_explicit {
        // With `mode = none` spelled out, leftover selection keys are
        // inert defaults; without any mode they are most likely typos.
        if let Some((_, line)) = w_rssi.or(w_ext).or(w_cnx).or(w_load) {
            return Err(raw.err(Some(line), "selection weights need `mode` to be set"));
        }
    }

    // [run]
    if let Some((v, _)) = raw.take_u64("run", "seed")? {
        sc.seed = v;
    }
    if let Some((v, line)) = raw.take_u64("run", "duration_s")? {
        if v == 0 {
            return Err(raw.err(Some(line), "duration_s must be positive"));
        }
        sc.duration = Duration::from_secs(v);
    }
    if let Some((v, _)) = raw.take_u64("run", "n_ms")? {
        sc.n_ms = v as u32;
    }
    if let Some((v, _)) = raw.take_f64("run", "tx_power_dbm")? {
        sc.tx_power = Some(Dbm::from_f64(v));
    }
    if let Some((v, line)) = raw.take_f64("run", "frequency_hz")? {
        if v <= 0.0 {
            return Err(raw.err(Some(line), "frequency_hz must be positive"));
        }
        sc.frequency_hz = v;
    }
    if let Some((v, line)) = raw.take_f64("run", "noise_std_db")? {
        if v < 0.0 {
            return Err(raw.err(Some(line), "noise_std_db must be non-negative"));
        }
        sc.noise_std_db = v;
    }
    if let Some((file, line)) = raw.take("run", "ms_file") {
        let positions = read_ms_file(&raw, &base_dir.join(&file), line)?;
        sc.ms_placement = MsPlacement::Explicit(positions);
    }

    raw.finish()?;
    sc.validate().map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: None,
        message: format!("scenario validation failed: {e}"),
    })?;
    Ok(sc)
}

fn parse_penalties(raw: &Raw, value: &str, line: u32) -> Result<Vec<(u32, f64)>, ConfigError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((ap, db)) = item.split_once(':') else {
            return Err(raw.err(Some(line), format!("penalties expect `ap:db`, got `{item}`")));
        };
        let ap = ap.trim().parse::<u32>().map_err(|_| {
            raw.err(Some(line), format!("penalty ap id must be an integer, got `{ap}`"))
        })?;
        let db = db.trim().parse::<f64>().map_err(|_| {
            raw.err(Some(line), format!("penalty dB must be a number, got `{db}`"))
        })?;
        out.push((ap, db));
    }
    Ok(out)
}

fn read_ap_file(raw: &Raw, path: &Path, reference_line: u32) -> Result<Vec<ApSpec>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| {
        raw.err(
            Some(reference_line),
            format!("cannot read ap file {}: {e}", path.display()),
        )
    })?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| {
            raw.err(
                Some(reference_line),
                format!("{}:{}: {what}: `{line}`", path.display(), idx + 1),
            )
        };
        if parts.len() != 2 && parts.len() != 3 {
            return Err(bad("expected `x,y[,channel]`"));
        }
        let x = parts[0].parse::<f64>().map_err(|_| bad("bad x coordinate"))?;
        let y = parts[1].parse::<f64>().map_err(|_| bad("bad y coordinate"))?;
        let channel = match parts.get(2) {
            None => None,
            Some(c) => Some(c.parse::<u32>().map_err(|_| bad("bad channel"))?),
        };
        out.push(ApSpec { x, y, channel });
    }
    Ok(out)
}

fn read_ms_file(raw: &Raw, path: &Path, reference_line: u32) -> Result<Vec<(f64, f64)>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| {
        raw.err(
            Some(reference_line),
            format!("cannot read ms file {}: {e}", path.display()),
        )
    })?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || {
            raw.err(
                Some(reference_line),
                format!("{}:{}: expected `x,y`: `{line}`", path.display(), idx + 1),
            )
        };
        let (x, y) = line.split_once(',').ok_or_else(bad)?;
        let x = x.trim().parse::<f64>().map_err(|_| bad())?;
        let y = y.trim().parse::<f64>().map_err(|_| bad())?;
        out.push((x, y));
    }
    Ok(out)
}

fn read_cnx_file(raw: &Raw, path: &Path, reference_line: u32) -> Result<Vec<(u32, u32, u64)>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| {
        raw.err(
            Some(reference_line),
            format!("cannot read cnx seed file {}: {e}", path.display()),
        )
    })?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || {
            raw.err(
                Some(reference_line),
                format!(
                    "{}:{}: expected `from,to,count`: `{line}`",
                    path.display(),
                    idx + 1
                ),
            )
        };
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let from = parts[0].parse::<u32>().map_err(|_| bad())?;
        let to = parts[1].parse::<u32>().map_err(|_| bad())?;
        let count = parts[2].parse::<u64>().map_err(|_| bad())?;
        out.push((from, to, count));
    }
    Ok(out)
}
