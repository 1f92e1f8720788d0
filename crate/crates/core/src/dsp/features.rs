use std::cmp::Ordering;

use super::spectrum::{spectrum_with_plan, FftPlan, Spectrum};
use super::stats::sample_std;
use crate::error::{param, shape, Result};
use crate::signals::{FramePair, SignalFrame};
use crate::Scalar;

/// Width of the network input.
pub const FEATURE_DIM: usize = 12;
/// Spectral peaks kept per channel.
pub const PEAK_COUNT: usize = 5;

/// `[acoustic peaks 1..5, acoustic std, vibration peaks 1..5, vibration std]`.
/// Peaks are one-sided spectral magnitudes in V/Hz, stds in volts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<T> {
    components: [T; FEATURE_DIM],
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(components: [T; FEATURE_DIM]) -> Self {
        Self { components }
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        let components: [T; FEATURE_DIM] = values
            .try_into()
            .map_err(|_| shape(format!("feature vector needs {FEATURE_DIM} values, got {}", values.len())))?;
        Ok(Self { components })
    }

    pub fn components(&self) -> &[T; FEATURE_DIM] {
        &self.components
    }

    pub fn acoustic_peaks(&self) -> &[T] {
        &self.components[..PEAK_COUNT]
    }

    pub fn acoustic_std(&self) -> T {
        self.components[PEAK_COUNT]
    }

    pub fn vibration_peaks(&self) -> &[T] {
        &self.components[PEAK_COUNT + 1..2 * PEAK_COUNT + 1]
    }

    pub fn vibration_std(&self) -> T {
        self.components[FEATURE_DIM - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|v| v.is_finite())
    }
}

/// The `k` largest one-sided magnitudes |S(kF)| over bins 1..=N/2 (DC
/// excluded), descending, ties resolved towards the lower bin.
pub fn top_peaks<T: Scalar>(spectrum: &Spectrum<T>, k: usize) -> Result<Vec<T>> {
    let half = spectrum.len() / 2;
    if k == 0 || k > half {
        return Err(param(format!("peak count must be in 1..={half}, got {k}")));
    }
    let mut ranked: Vec<(T, usize)> = (1..=half).map(|i| (spectrum.bins[i].norm(), i)).collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    Ok(ranked.into_iter().take(k).map(|(m, _)| m).collect())
}

/// Feature extraction with a cached FFT plan, for repeated frames of one length.
#[derive(Debug, Clone)]
pub struct FeatureExtractor<T> {
    plan: FftPlan<T>,
}

impl<T: Scalar> FeatureExtractor<T> {
    pub fn new(frame_len: usize) -> Result<Self> {
        Ok(Self { plan: FftPlan::new(frame_len)? })
    }

    fn channel(&self, frame: &SignalFrame<T>, out: &mut [T]) -> Result<()> {
        let spectrum = spectrum_with_plan(&self.plan, frame)?;
        let peaks = top_peaks(&spectrum, PEAK_COUNT)?;
        out[..PEAK_COUNT].copy_from_slice(&peaks);
        out[PEAK_COUNT] = sample_std(&frame.samples);
        Ok(())
    }

    pub fn extract(&self, pair: &FramePair<T>) -> Result<FeatureVector<T>> {
        let mut components = [T::zero(); FEATURE_DIM];
        let (acoustic, vibration) = components.split_at_mut(PEAK_COUNT + 1);
        self.channel(&pair.acoustic, acoustic)?;
        self.channel(&pair.vibration, vibration)?;
        Ok(FeatureVector { components })
    }
}

/// Builds the 12-component network input from a frame pair.
pub fn extract_features<T: Scalar>(pair: &FramePair<T>) -> Result<FeatureVector<T>> {
    FeatureExtractor::new(pair.acoustic.len())?.extract(pair)
}
