//! Event tracing and the run checksum.
//!
//! Every semantic event feeds a 64-bit FNV-1a checksum that ends up in
//! the ledger, so two runs can be compared for bit-identical behavior
//! without keeping their full logs. An optional sink additionally
//! receives one text line per event:
//! `time_us,event_kind,ms_id,ap_id,detail`.

use std::io::{self, Write};

use crate::time::SimTime;

/// Receives formatted trace lines.
pub trait TraceSink {
    fn line(&mut self, text: &str);
}

/// Writes trace lines to any `io::Write`, one per line.
pub struct WriterSink<W: Write> {
    inner: W,
    pub errored: bool,
}

impl<W: Write> WriterSink<W> {
    pub fn new(inner: W) -> Self {
        WriterSink {
            inner,
            errored: false,
        }
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl<W: Write> TraceSink for WriterSink<W> {
    fn line(&mut self, text: &str) {
        if writeln!(self.inner, "{text}").is_err() {
            self.errored = true;
        }
    }
}

/// Collects trace lines in memory; handy for tests and replays.
#[derive(Default)]
pub struct VecSink {
    pub lines: Vec<String>,
}

impl TraceSink for VecSink {
    fn line(&mut self, text: &str) {
        self.lines.push(text.to_string());
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Streaming FNV-1a over the run's event fields.
#[derive(Debug, Clone, Copy)]
pub struct Digest(u64);

impl Default for Digest {
    fn default() -> Self {
        Digest(FNV_OFFSET)
    }
}

impl Digest {
    pub fn update_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn update_u64(&mut self, v: u64) {
        self.update_bytes(&v.to_le_bytes());
    }

    pub fn value(&self) -> u64 {
        self.0
    }
}

/// Trace dispatcher: hashes structured fields always, formats text only
/// when a sink is attached.
pub struct Tracer<'a> {
    pub sink: Option<&'a mut dyn TraceSink>,
    pub digest: Digest,
}

impl<'a> Tracer<'a> {
    pub fn new(sink: Option<&'a mut dyn TraceSink>) -> Self {
        Tracer {
            sink,
            digest: Digest::default(),
        }
    }

    pub fn event(
        &mut self,
        time: SimTime,
        kind: &'static str,
        ms: Option<u32>,
        ap: Option<u32>,
        detail: &[u64],
        text: impl FnOnce() -> String,
    ) {
        self.digest.update_u64(time.as_micros());
        self.digest.update_bytes(kind.as_bytes());
        self.digest.update_u64(ms.map_or(u64::MAX, u64::from));
        self.digest.update_u64(ap.map_or(u64::MAX, u64::from));
        for &d in detail {
            self.digest.update_u64(d);
        }
        if let Some(sink) = self.sink.as_deref_mut() {
            let ms_s = ms.map_or_else(|| "-".to_string(), |v| v.to_string());
            let ap_s = ap.map_or_else(|| "-".to_string(), |v| v.to_string());
            sink.line(&format!(
                "{},{},{},{},{}",
                time.as_micros(),
                kind,
                ms_s,
                ap_s,
                text()
            ));
        }
    }
}
