//! Calibrated synthetic signal generator.
//!
//! Each channel is Gaussian noise with the surveyed mean and standard
//! deviation. Optional tones at the first harmonics of the rotor frequency
//! give the classes spectral structure; when they are enabled the noise
//! variance is reduced so the total standard deviation still matches the
//! target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Channel, ChannelStats, FramePair, SignalFrame, StateLabel, DEFAULT_SAMPLE_RATE};
use crate::error::{param, Result};
use crate::Scalar;

/// Low-pressure turbine speed at the nominal operating mode, rpm.
pub const ROTOR_RPM: f64 = 4670.0;

/// Number of rotor harmonics injected.
pub const HARMONIC_COUNT: usize = 5;

/// Default tone amplitude as a fraction of the channel standard deviation.
pub const DEFAULT_HARMONIC_LEVEL: f64 = 0.2;

/// Tones at k * fundamental, k = 1..=5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonics<T> {
    pub fundamental: T,
    pub amplitudes: [T; HARMONIC_COUNT],
}

impl<T: Scalar> Harmonics<T> {
    pub fn uniform(fundamental: T, amplitude: T) -> Self {
        Self { fundamental, amplitudes: [amplitude; HARMONIC_COUNT] }
    }

    /// Variance contributed by the tones, sum of a_k^2 / 2.
    pub fn power(&self) -> T {
        self.amplitudes.iter().map(|&a| a * a).sum::<T>() / T::lit(2.0)
    }
}

/// Draws one frame of `frame_len` samples for a channel.
pub fn synth_frame<T: Scalar, R: Rng + ?Sized>(
    stats: &ChannelStats<T>,
    channel: Channel,
    frame_len: usize,
    sample_rate: T,
    harmonics: Option<&Harmonics<T>>,
    rng: &mut R,
) -> Result<SignalFrame<T>> {
    if frame_len < 2 {
        return Err(param(format!("frame length must be at least 2, got {frame_len}")));
    }
    if !stats.mean.is_finite() || !stats.std.is_finite() {
        return Err(param("channel statistics must be finite"));
    }
    if stats.std < T::zero() {
        return Err(param("standard deviation must be non-negative"));
    }
    if !(sample_rate > T::zero()) || !sample_rate.is_finite() {
        return Err(param("sample rate must be positive"));
    }

    let mut noise_var = stats.std * stats.std;
    let mut tones: Vec<(T, T, T)> = Vec::new();
    if let Some(h) = harmonics {
        let nyquist = sample_rate / T::lit(2.0);
        let top = h.fundamental * T::from_count(HARMONIC_COUNT);
        if !(h.fundamental > T::zero()) || !(top < nyquist) {
            return Err(param("harmonics must lie strictly between 0 Hz and the Nyquist frequency"));
        }
        if h.amplitudes.iter().any(|a| !a.is_finite() || *a < T::zero()) {
            return Err(param("harmonic amplitudes must be finite and non-negative"));
        }
        noise_var -= h.power();
        if noise_var < T::zero() {
            return Err(param("harmonic power exceeds the target variance"));
        }
        let two_pi = T::TAU();
        for (k, &amp) in h.amplitudes.iter().enumerate() {
            let phase = T::lit(rng.random::<f64>()) * two_pi;
            let omega = two_pi * h.fundamental * T::from_count(k + 1) / sample_rate;
            tones.push((amp, omega, phase));
        }
    }
    let noise_std = noise_var.sqrt();

    let samples = (0..frame_len)
        .map(|n| {
            let z: f64 = rng.sample(StandardNormal);
            let mut x = stats.mean + noise_std * T::lit(z);
            let t = T::from_count(n);
            for &(amp, omega, phase) in &tones {
                x += amp * (omega * t + phase).sin();
            }
            x
        })
        .collect();
    SignalFrame::new(channel, samples, sample_rate)
}

/// Parameters of a synthetic labelled corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec<T> {
    /// Samples per frame; a power of two.
    pub frame_len: usize,
    pub sample_rate: T,
    /// Frame pairs per state, indexed by [`StateLabel::index`].
    pub counts: [usize; 3],
    /// Generator targets, `[state][channel]`.
    pub stats: [[ChannelStats<T>; 2]; 3],
    pub harmonics: bool,
    /// Per-harmonic tone amplitude in volts, `[state][channel]`.
    pub harmonic_amplitudes: [[T; 2]; 3],
    /// Rotor frequency in Hz.
    pub fundamental: T,
    pub seed: u64,
}

impl<T: Scalar> DatasetSpec<T> {
    /// Reference statistics, 4096-sample frames, harmonics on.
    pub fn with_counts(counts: [usize; 3], seed: u64) -> Self {
        let stats = StateLabel::ALL.map(|s| Channel::BOTH.map(|c| ChannelStats::reference(s, c)));
        let level = T::lit(DEFAULT_HARMONIC_LEVEL);
        let harmonic_amplitudes = stats.map(|row| row.map(|st| st.std * level));
        Self {
            frame_len: 4096,
            sample_rate: T::lit(DEFAULT_SAMPLE_RATE),
            counts,
            stats,
            harmonics: true,
            harmonic_amplitudes,
            fundamental: T::lit(ROTOR_RPM / 60.0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 || !self.frame_len.is_power_of_two() {
            return Err(param(format!("frame length must be a power of two >= 2, got {}", self.frame_len)));
        }
        if !(self.sample_rate > T::zero()) || !self.sample_rate.is_finite() {
            return Err(param("sample rate must be positive"));
        }
        if !(self.fundamental < self.sample_rate / T::lit(2.0)) {
            return Err(param("fundamental must be below the Nyquist frequency"));
        }
        for row in &self.stats {
            for st in row {
                if !st.mean.is_finite() || !st.std.is_finite() || st.std < T::zero() {
                    return Err(param("generator statistics must be finite with std >= 0"));
                }
            }
        }
        if self.harmonics {
            for s in StateLabel::ALL {
                for c in Channel::BOTH {
                    let h = self.harmonics_for(s, c).expect("harmonics enabled");
                    let st = &self.stats[s.index()][c.index()];
                    if h.power() > st.std * st.std {
                        return Err(param(format!("harmonic power exceeds the {s}/{c} variance")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn harmonics_for(&self, state: StateLabel, channel: Channel) -> Option<Harmonics<T>> {
        self.harmonics
            .then(|| Harmonics::uniform(self.fundamental, self.harmonic_amplitudes[state.index()][channel.index()]))
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Per-split class counts for a pre-partitioned corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusCounts {
    pub train: [usize; 3],
    pub validation: [usize; 3],
    pub test: [usize; 3],
}

impl CorpusCounts {
    /// 5 309 / 590 / 1 475 examples. The test mix is (410, 1010, 55); the
    /// training and validation sets keep the same class proportions.
    pub fn reference() -> Self {
        Self { train: [1476, 3635, 198], validation: [164, 404, 22], test: [410, 1010, 55] }
    }

    pub fn totals(&self) -> [usize; 3] {
        [0, 1, 2].map(|i| self.train[i] + self.validation[i] + self.test[i])
    }
}

/// Draws one labelled pair for `state` from the spec's targets.
pub fn synth_pair<T: Scalar, R: Rng + ?Sized>(
    spec: &DatasetSpec<T>,
    state: StateLabel,
    rng: &mut R,
) -> Result<FramePair<T>> {
    let frame = |channel: Channel, rng: &mut R| {
        synth_frame(
            &spec.stats[state.index()][channel.index()],
            channel,
            spec.frame_len,
            spec.sample_rate,
            spec.harmonics_for(state, channel).as_ref(),
            rng,
        )
    };
    let acoustic = frame(Channel::Acoustic, rng)?;
    let vibration = frame(Channel::Vibration, rng)?;
    FramePair::new(acoustic, vibration, Some(state))
}

/// Generates `spec.counts[state]` labelled pairs per state, grouped by state.
pub fn synth_dataset<T: Scalar>(spec: &DatasetSpec<T>) -> Result<Vec<FramePair<T>>> {
    let mut out = Vec::with_capacity(spec.total());
    for_each_pair_on_stream(spec, 0, |pair| {
        out.push(pair);
        Ok(())
    })?;
    Ok(out)
}

/// Generates the spec's pairs one at a time, in state order.
pub(crate) fn for_each_pair_on_stream<T: Scalar>(
    spec: &DatasetSpec<T>,
    stream: u64,
    mut f: impl FnMut(FramePair<T>) -> Result<()>,
) -> Result<()> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    for state in StateLabel::ALL {
        for _ in 0..spec.counts[state.index()] {
            f(synth_pair(spec, state, &mut rng)?)?;
        }
    }
    Ok(())
}
