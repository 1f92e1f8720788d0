//! Binary frame wire format and real-time classification of a frame stream.
//!
//! A message is the 4-byte magic `GPUF`, a little-endian `u32` sample count
//! `n`, then `n` acoustic and `n` vibration samples as little-endian `i16`.
//! Corrupt input is reported and skipped by scanning for the next magic.

use std::collections::HashMap;
use std::io::{ErrorKind, Read, Write};
use std::time::Instant;

use serde::Serialize;

use crate::dsp::{FeatureExtractor, FEATURE_DIM};
use crate::error::{param, shape, Error, Result};
use crate::neuralnet::{Network, Prediction};
use crate::signals::{
    Channel, FramePair, SignalFrame, StateLabel, DEFAULT_FULL_SCALE_VOLTS, DEFAULT_SAMPLE_RATE, PCM_FULL_SCALE,
};
use crate::Scalar;

pub const MAGIC: [u8; 4] = *b"GPUF";
pub const HEADER_LEN: usize = 8;
pub const DEFAULT_MAX_FRAME_LEN: usize = 4096;
pub const DEFAULT_MIN_FRAME_LEN: usize = 16;

/// Bytes in a message carrying `n` samples per channel.
pub fn message_len(n: usize) -> usize {
    HEADER_LEN + 4 * n
}

pub fn encode_message(acoustic: &[i16], vibration: &[i16]) -> Result<Vec<u8>> {
    if acoustic.len() != vibration.len() {
        return Err(shape(format!("channel lengths differ: {} vs {}", acoustic.len(), vibration.len())));
    }
    let n = u32::try_from(acoustic.len()).map_err(|_| param("frame too long for the wire format"))?;
    let mut out = Vec::with_capacity(message_len(acoustic.len()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&n.to_le_bytes());
    for s in acoustic.iter().chain(vibration) {
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig {
    pub min_frame_len: usize,
    pub max_frame_len: usize,
    pub sample_rate: f64,
    pub full_scale_volts: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            min_frame_len: DEFAULT_MIN_FRAME_LEN,
            max_frame_len: DEFAULT_MAX_FRAME_LEN,
            sample_rate: DEFAULT_SAMPLE_RATE,
            full_scale_volts: DEFAULT_FULL_SCALE_VOLTS,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        let pow2 = |n: usize| n >= 2 && n.is_power_of_two();
        if !pow2(self.min_frame_len) || !pow2(self.max_frame_len) || self.min_frame_len > self.max_frame_len {
            return Err(param(format!(
                "frame length bounds [{}, {}] must be powers of two in increasing order",
                self.min_frame_len, self.max_frame_len
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(param("sample rate must be positive"));
        }
        if !(self.full_scale_volts > 0.0 && self.full_scale_volts.is_finite()) {
            return Err(param("full-scale voltage must be positive"));
        }
        Ok(())
    }

    fn accepts(&self, n: usize) -> bool {
        n.is_power_of_two() && (self.min_frame_len..=self.max_frame_len).contains(&n)
    }
}

/// A decoded message and the byte offset where it started.
#[derive(Debug, Clone, PartialEq)]
pub struct WireFrame {
    pub offset: u64,
    pub acoustic: Vec<i16>,
    pub vibration: Vec<i16>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamEvent {
    Frame(WireFrame),
    Malformed { offset: u64, reason: String },
}

const READ_CHUNK: usize = 64 * 1024;

/// Incremental decoder over any byte source.
pub struct FrameDecoder<R> {
    reader: R,
    config: StreamConfig,
    buf: Vec<u8>,
    /// Absolute stream offset of `buf[0]`.
    base: u64,
    eof: bool,
}

impl<R: Read> FrameDecoder<R> {
    pub fn new(reader: R, config: StreamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { reader, config, buf: Vec::new(), base: 0, eof: false })
    }

    /// Reads until at least `need` bytes are buffered; false at end of input.
    fn fill(&mut self, need: usize) -> Result<bool> {
        let mut chunk = [0u8; READ_CHUNK];
        while self.buf.len() < need && !self.eof {
            match self.reader.read(&mut chunk) {
                Ok(0) => self.eof = true,
                Ok(k) => self.buf.extend_from_slice(&chunk[..k]),
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(self.buf.len() >= need)
    }

    fn consume(&mut self, k: usize) {
        self.buf.drain(..k);
        self.base += k as u64;
    }

    fn header_at(&self, p: usize) -> Option<usize> {
        let h = self.buf.get(p..p + HEADER_LEN)?;
        if h[..4] != MAGIC {
            return None;
        }
        let n = u32::from_le_bytes([h[4], h[5], h[6], h[7]]) as usize;
        self.config.accepts(n).then_some(n)
    }

    fn find_magic(&self, from: usize) -> Option<usize> {
        self.buf.get(from..)?.windows(4).position(|w| w == MAGIC).map(|p| p + from)
    }

    /// Drops bytes from the front until a magic is at the head or input ends.
    fn resync(&mut self, offset: u64, reason: String) -> Result<StreamEvent> {
        self.consume(1.min(self.buf.len()));
        loop {
            if let Some(p) = self.find_magic(0) {
                self.consume(p);
                break;
            }
            let keep = self.buf.len().min(3);
            self.consume(self.buf.len() - keep);
            if !self.fill(self.buf.len() + 1)? {
                self.consume(self.buf.len());
                break;
            }
        }
        Ok(StreamEvent::Malformed { offset, reason })
    }

    pub fn next_event(&mut self) -> Result<Option<StreamEvent>> {
        if !self.fill(HEADER_LEN)? {
            if self.buf.is_empty() {
                return Ok(None);
            }
            let offset = self.base;
            let reason = format!("truncated header: {} trailing bytes", self.buf.len());
            self.consume(self.buf.len());
            return Ok(Some(StreamEvent::Malformed { offset, reason }));
        }
        let offset = self.base;
        if self.buf[..4] != MAGIC {
            return self.resync(offset, "bad magic".into()).map(Some);
        }
        let Some(n) = self.header_at(0) else {
            let raw = u32::from_le_bytes([self.buf[4], self.buf[5], self.buf[6], self.buf[7]]);
            return self.resync(offset, format!("invalid sample count {raw}")).map(Some);
        };
        let total = message_len(n);
        let complete = self.fill(total)?;
        let end = total.min(self.buf.len());
        // A valid header inside the payload means this message was cut short.
        let embedded = (HEADER_LEN..end).find(|&p| self.buf[p..].starts_with(&MAGIC) && self.header_at(p).is_some());
        if let Some(p) = embedded {
            self.consume(p);
            return Ok(Some(StreamEvent::Malformed {
                offset,
                reason: format!("truncated frame: {} of {total} bytes", p),
            }));
        }
        if !complete {
            let got = self.buf.len();
            self.consume(got);
            return Ok(Some(StreamEvent::Malformed {
                offset,
                reason: format!("truncated frame: {got} of {total} bytes"),
            }));
        }
        let payload = &self.buf[HEADER_LEN..total];
        let sample = |i: usize| i16::from_le_bytes([payload[2 * i], payload[2 * i + 1]]);
        let acoustic = (0..n).map(sample).collect();
        let vibration = (n..2 * n).map(sample).collect();
        self.consume(total);
        Ok(Some(StreamEvent::Frame(WireFrame { offset, acoustic, vibration })))
    }
}

impl<R: Read> Iterator for FrameDecoder<R> {
    type Item = Result<StreamEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_event().transpose()
    }
}

/// Fails unless the model maps the 12 features to the three states.
pub fn check_model<T: Scalar>(model: &Network<T>) -> Result<()> {
    let arch = model.architecture();
    if arch.input_dim != FEATURE_DIM || arch.output_dim != StateLabel::COUNT {
        return Err(Error::Numeric(format!(
            "model maps {} inputs to {} outputs, expected {FEATURE_DIM} to {}",
            arch.input_dim,
            arch.output_dim,
            StateLabel::COUNT
        )));
    }
    Ok(())
}

/// Featurizes and classifies decoded frames, caching one FFT plan per length.
pub struct FrameClassifier<'m, T> {
    model: &'m Network<T>,
    config: StreamConfig,
    extractors: HashMap<usize, FeatureExtractor<T>>,
}

impl<'m, T: Scalar> FrameClassifier<'m, T> {
    pub fn new(model: &'m Network<T>, config: StreamConfig) -> Result<Self> {
        config.validate()?;
        check_model(model)?;
        Ok(Self { model, config, extractors: HashMap::new() })
    }

    pub fn classify(&mut self, frame: &WireFrame) -> Result<Prediction<T>> {
        let n = frame.acoustic.len();
        if let std::collections::hash_map::Entry::Vacant(e) = self.extractors.entry(n) {
            e.insert(FeatureExtractor::new(n)?);
        }
        let scale = T::lit(self.config.full_scale_volts / PCM_FULL_SCALE);
        let rate = T::lit(self.config.sample_rate);
        let volts = |raw: &[i16]| raw.iter().map(|&s| T::lit(f64::from(s)) * scale).collect::<Vec<T>>();
        let pair = FramePair::new(
            SignalFrame::new(Channel::Acoustic, volts(&frame.acoustic), rate)?,
            SignalFrame::new(Channel::Vibration, volts(&frame.vibration), rate)?,
            None,
        )?;
        let features = self.extractors[&n].extract(&pair)?;
        self.model.predict(&features)
    }
}

#[derive(Serialize)]
struct FrameLine<'a> {
    frame: u64,
    label: &'a str,
    probs: [f64; 3],
    latency_us: u64,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    offset: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StreamSummary {
    pub frames: u64,
    pub errors: u64,
    /// Mean featurize + predict time per classified frame.
    pub mean_latency_us: f64,
    pub max_latency_us: f64,
}

/// Classifies every message from `reader`, writing one NDJSON line per frame
/// or malformed region in arrival order.
pub fn classify_stream<T: Scalar, R: Read, W: Write>(
    model: &Network<T>,
    reader: R,
    mut writer: W,
    config: StreamConfig,
) -> Result<StreamSummary> {
    let mut classifier = FrameClassifier::new(model, config)?;
    let decoder = FrameDecoder::new(reader, config)?;
    let mut summary = StreamSummary::default();
    let mut total_us = 0.0;
    for event in decoder {
        match event? {
            StreamEvent::Frame(frame) => {
                let start = Instant::now();
                match classifier.classify(&frame) {
                    Ok(pred) => {
                        let elapsed = start.elapsed().as_secs_f64() * 1e6;
                        total_us += elapsed;
                        summary.max_latency_us = summary.max_latency_us.max(elapsed);
                        let line = FrameLine {
                            frame: summary.frames,
                            label: pred.label.name(),
                            probs: pred.probs.map(|p| p.as_f64()),
                            latency_us: elapsed.round() as u64,
                        };
                        serde_json::to_writer(&mut writer, &line)?;
                        summary.frames += 1;
                    }
                    Err(e) => {
                        serde_json::to_writer(&mut writer, &ErrorLine { error: &e.to_string(), offset: frame.offset })?;
                        summary.errors += 1;
                    }
                }
            }
            StreamEvent::Malformed { offset, reason } => {
                serde_json::to_writer(&mut writer, &ErrorLine { error: &reason, offset })?;
                summary.errors += 1;
            }
        }
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    if summary.frames > 0 {
        summary.mean_latency_us = total_us / summary.frames as f64;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(n: usize, seed: i16) -> (Vec<i16>, Vec<i16>) {
        let a = (0..n).map(|i| (i as i16).wrapping_mul(31).wrapping_add(seed)).collect();
        let v = (0..n).map(|i| (i as i16).wrapping_mul(-17).wrapping_sub(seed)).collect();
        (a, v)
    }

    fn events(bytes: &[u8]) -> Vec<StreamEvent> {
        FrameDecoder::new(bytes, StreamConfig::default()).unwrap().map(|e| e.unwrap()).collect()
    }

    #[test]
    fn message_layout_is_byte_exact() {
        let msg = encode_message(&[1, -2], &[0x0304, -1]).unwrap();
        assert_eq!(msg, [b'G', b'P', b'U', b'F', 2, 0, 0, 0, 1, 0, 0xfe, 0xff, 4, 3, 0xff, 0xff]);
        assert_eq!(msg.len(), message_len(2));
        assert!(encode_message(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn decodes_back_to_back_frames() {
        let (a1, v1) = frame(16, 3);
        let (a2, v2) = frame(32, 9);
        let mut bytes = encode_message(&a1, &v1).unwrap();
        bytes.extend(encode_message(&a2, &v2).unwrap());
        let ev = events(&bytes);
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0], StreamEvent::Frame(WireFrame { offset: 0, acoustic: a1, vibration: v1 }));
        assert_eq!(
            ev[1],
            StreamEvent::Frame(WireFrame { offset: message_len(16) as u64, acoustic: a2, vibration: v2 })
        );
    }

    #[test]
    fn garbage_is_one_error_with_offset() {
        let (a, v) = frame(16, 1);
        let mut bytes = b"junkjunk!".to_vec();
        bytes.extend(encode_message(&a, &v).unwrap());
        let ev = events(&bytes);
        assert_eq!(ev.len(), 2);
        assert!(matches!(&ev[0], StreamEvent::Malformed { offset: 0, reason } if reason == "bad magic"));
        assert!(matches!(&ev[1], StreamEvent::Frame(f) if f.offset == 9));
    }

    #[test]
    fn truncated_frame_then_valid_frame() {
        let (a, v) = frame(64, 5);
        let full = encode_message(&a, &v).unwrap();
        let mut bytes = full[..100].to_vec();
        bytes.extend(&full);
        let ev = events(&bytes);
        assert_eq!(ev.len(), 2);
        assert!(
            matches!(&ev[0], StreamEvent::Malformed { offset: 0, reason } if reason.starts_with("truncated frame"))
        );
        assert_eq!(ev[1], StreamEvent::Frame(WireFrame { offset: 100, acoustic: a, vibration: v }));
    }

    #[test]
    fn truncated_at_end_of_input() {
        let (a, v) = frame(16, 0);
        let full = encode_message(&a, &v).unwrap();
        let ev = events(&full[..20]);
        assert_eq!(ev.len(), 1);
        assert!(matches!(&ev[0], StreamEvent::Malformed { offset: 0, .. }));
        let ev = events(&full[..5]);
        assert!(matches!(&ev[..], [StreamEvent::Malformed { offset: 0, .. }]));
    }

    #[test]
    fn rejects_bad_sample_counts() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend(12u32.to_le_bytes());
        bytes.extend([0u8; 48]);
        let (a, v) = frame(16, 2);
        bytes.extend(encode_message(&a, &v).unwrap());
        let ev = events(&bytes);
        assert_eq!(ev.len(), 2);
        assert!(matches!(&ev[0], StreamEvent::Malformed { offset: 0, reason } if reason.contains("12")));
        assert!(matches!(&ev[1], StreamEvent::Frame(_)));

        let mut big = MAGIC.to_vec();
        big.extend(8192u32.to_le_bytes());
        assert!(matches!(&events(&big)[..], [StreamEvent::Malformed { .. }]));
    }

    #[test]
    fn empty_input_has_no_events() {
        assert!(events(&[]).is_empty());
    }

    #[test]
    fn config_bounds_are_checked() {
        let bad = StreamConfig { min_frame_len: 24, ..StreamConfig::default() };
        assert!(bad.validate().is_err());
        let inverted = StreamConfig { min_frame_len: 64, max_frame_len: 32, ..StreamConfig::default() };
        assert!(inverted.validate().is_err());
    }
}
