//! Two-channel signal model: machine states, per-channel statistics,
//! frames, synthesis, PCM ingestion and dataset assembly.

mod dataset;
mod pcm;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Error, Result};
use crate::Scalar;

pub use dataset::{
    dataset_header, read_dataset_csv, split_dataset, synth_corpus, synth_examples, write_dataset_csv, DataSplit,
    LabeledExample,
};
pub use pcm::{
    decode_i16_le, encode_pcm, ingest_interleaved_pcm, ingest_pcm, volts_to_pcm, DEFAULT_FULL_SCALE_VOLTS,
    PCM_FULL_SCALE,
};
pub use synth::{
    synth_dataset, synth_frame, synth_pair, CorpusCounts, DatasetSpec, Harmonics, DEFAULT_HARMONIC_LEVEL,
    HARMONIC_COUNT, ROTOR_RPM,
};

/// Default sampling frequency of the capture chain, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 44_100.0;

/// Diagnostic class of the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    /// After overhaul.
    Nominal = 0,
    /// Mid-life, around 12 000 operating hours.
    Current = 1,
    /// At the service limit, around 16 000 operating hours.
    Defective = 2,
}

impl StateLabel {
    pub const ALL: [StateLabel; 3] = [StateLabel::Nominal, StateLabel::Current, StateLabel::Defective];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::Nominal => "nominal",
            StateLabel::Current => "current",
            StateLabel::Defective => "defective",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nominal" => Ok(StateLabel::Nominal),
            "current" => Ok(StateLabel::Current),
            "defective" => Ok(StateLabel::Defective),
            other => Err(Error::Data(format!("unknown state label {other:?}"))),
        }
    }
}

/// One-hot encoding of a label.
pub fn one_hot<T: Scalar>(label: StateLabel) -> [T; 3] {
    let mut v = [T::zero(); 3];
    v[label.index()] = T::one();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Acoustic,
    Vibration,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Acoustic, Channel::Vibration];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Acoustic => "acoustic",
            Channel::Vibration => "vibration",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Summary statistics of one channel in one machine state, volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats<T> {
    pub mean: T,
    pub std: T,
    pub min: T,
    pub q25: T,
    pub q50: T,
    pub q75: T,
    pub max: T,
}

// Reference statistics of the surveyed unit, [state][channel] with the
// acoustic channel first. Columns: mean, std, min, 25%, 50%, 75%, max.
const REFERENCE_TABLE: [[[f64; 7]; 2]; 3] = [
    [
        [-0.0002, 0.0247, -0.0966, -0.0167, -0.0001, 0.0162, 0.094],
        [-0.0002, 0.0202, -0.0704, -0.0135, 0.0002, 0.0138, 0.0594],
    ],
    [
        [-0.0006, 0.1601, -0.6952, -0.1051, 0.0031, 0.1087, 0.7219],
        [-0.0015, 0.2209, -0.8825, -0.1523, -0.0007, 0.1505, 0.7928],
    ],
    [
        [-0.0093, 0.303, -0.9822, -0.2073, -0.0077, 0.188, 2.2995],
        [-0.0064, 0.5514, -1.6656, -0.3638, -0.0056, 0.3284, 8.4175],
    ],
];

impl<T: Scalar> ChannelStats<T> {
    /// Surveyed statistics for a state and channel.
    pub fn reference(state: StateLabel, channel: Channel) -> Self {
        let r = REFERENCE_TABLE[state.index()][channel.index()];
        Self {
            mean: T::lit(r[0]),
            std: T::lit(r[1]),
            min: T::lit(r[2]),
            q25: T::lit(r[3]),
            q50: T::lit(r[4]),
            q75: T::lit(r[5]),
            max: T::lit(r[6]),
        }
    }

    /// Gaussian-only description: the quantile fields are set equal to the mean.
    pub fn gaussian(mean: T, std: T) -> Self {
        Self { mean, std, min: mean, q25: mean, q50: mean, q75: mean, max: mean }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mean, self.std, self.min, self.q25, self.q50, self.q75, self.max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(param("channel statistics must be finite"));
        }
        if self.std < T::zero() {
            return Err(param("standard deviation must be non-negative"));
        }
        if !(self.min <= self.q25 && self.q25 <= self.q50 && self.q50 <= self.q75 && self.q75 <= self.max) {
            return Err(param("quantiles must be ordered min <= q25 <= q50 <= q75 <= max"));
        }
        Ok(())
    }
}

/// A fixed-length window of voltage samples from one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame<T> {
    pub channel: Channel,
    pub samples: Vec<T>,
    pub sample_rate: T,
}

impl<T: Scalar> SignalFrame<T> {
    pub fn new(channel: Channel, samples: Vec<T>, sample_rate: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if !(sample_rate > T::zero()) || !sample_rate.is_finite() {
            return Err(param("sample rate must be positive"));
        }
        Ok(Self { channel, samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sampling interval Ts in seconds.
    pub fn sample_interval(&self) -> T {
        self.sample_rate.recip()
    }
}

/// Simultaneous acoustic and vibration frames, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair<T> {
    pub acoustic: SignalFrame<T>,
    pub vibration: SignalFrame<T>,
    pub label: Option<StateLabel>,
}

impl<T: Scalar> FramePair<T> {
    pub fn new(acoustic: SignalFrame<T>, vibration: SignalFrame<T>, label: Option<StateLabel>) -> Result<Self> {
        if acoustic.len() != vibration.len() {
            return Err(shape(format!(
                "channel lengths differ: acoustic {} vs vibration {}",
                acoustic.len(),
                vibration.len()
            )));
        }
        if acoustic.sample_rate != vibration.sample_rate {
            return Err(shape("channel sample rates differ"));
        }
        if acoustic.channel != Channel::Acoustic || vibration.channel != Channel::Vibration {
            return Err(shape("frame pair channels must be (acoustic, vibration)"));
        }
        Ok(Self { acoustic, vibration, label })
    }
}
