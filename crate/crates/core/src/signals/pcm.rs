//! Headerless signed 16-bit little-endian PCM.

use super::{Channel, SignalFrame};
use crate::error::{param, Error, Result};
use crate::Scalar;

/// ADC counts corresponding to the full-scale voltage.
pub const PCM_FULL_SCALE: f64 = 32_768.0;

/// Peak voltage at full scale (+4 dBu line level).
pub const DEFAULT_FULL_SCALE_VOLTS: f64 = 1.736;

pub fn decode_i16_le(bytes: &[u8]) -> Result<Vec<i16>> {
    if bytes.is_empty() {
        return Err(Error::Format("empty PCM input".into()));
    }
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::Format(format!("odd PCM byte length {}", bytes.len())));
    }
    Ok(bytes.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect())
}

pub fn encode_pcm(samples: &[i16]) -> Vec<u8> {
    samples.iter().flat_map(|s| s.to_le_bytes()).collect()
}

fn to_volts<T: Scalar>(raw: &[i16], full_scale_volts: T) -> Vec<T> {
    let scale = full_scale_volts / T::lit(PCM_FULL_SCALE);
    raw.iter().map(|&r| T::lit(f64::from(r)) * scale).collect()
}

/// Decodes a mono PCM stream into a frame of volts.
pub fn ingest_pcm<T: Scalar>(
    bytes: &[u8],
    channel: Channel,
    sample_rate: T,
    full_scale_volts: T,
) -> Result<SignalFrame<T>> {
    if !(full_scale_volts > T::zero()) {
        return Err(param("full-scale voltage must be positive"));
    }
    let raw = decode_i16_le(bytes)?;
    SignalFrame::new(channel, to_volts(&raw, full_scale_volts), sample_rate)
}

/// Decodes an interleaved two-channel stream, acoustic sample first.
pub fn ingest_interleaved_pcm<T: Scalar>(
    bytes: &[u8],
    sample_rate: T,
    full_scale_volts: T,
) -> Result<(SignalFrame<T>, SignalFrame<T>)> {
    if !(full_scale_volts > T::zero()) {
        return Err(param("full-scale voltage must be positive"));
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!("interleaved PCM length {} is not a multiple of 4", bytes.len())));
    }
    let raw = decode_i16_le(bytes)?;
    let acoustic: Vec<i16> = raw.iter().step_by(2).copied().collect();
    let vibration: Vec<i16> = raw.iter().skip(1).step_by(2).copied().collect();
    Ok((
        SignalFrame::new(Channel::Acoustic, to_volts(&acoustic, full_scale_volts), sample_rate)?,
        SignalFrame::new(Channel::Vibration, to_volts(&vibration, full_scale_volts), sample_rate)?,
    ))
}

/// Quantises volts to ADC counts, rounding to nearest and saturating.
pub fn volts_to_pcm<T: Scalar>(samples: &[T], full_scale_volts: T) -> Vec<i16> {
    let scale = T::lit(PCM_FULL_SCALE) / full_scale_volts;
    samples
        .iter()
        .map(|&v| {
            let c = (v * scale).round().as_f64();
            c.clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
        })
        .collect()
}
