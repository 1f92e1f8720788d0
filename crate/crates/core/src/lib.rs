//! Condition monitoring of rotating machinery from paired acoustic and
//! vibration recordings.
//!
//! The pipeline runs from raw signals to a diagnosis:
//!
//! * [`signals`] synthesises calibrated two-channel frames, ingests 16-bit
//!   PCM and assembles stratified datasets.
//! * [`dsp`] computes descriptive statistics, autocorrelation, the amplitude
//!   density spectrum, normality tests and the 12-component feature vector.
//! * [`neuralnet`] is a fully connected classifier with batch normalization,
//!   trained by backpropagation with Adam.
//! * [`evaluation`] builds confusion matrices and classification reports.
//! * [`stream`] decodes the binary frame wire format and classifies frames
//!   as they arrive.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to `f64`,
//! which is what the tooling uses throughout.

// `!(x > 0)` is used deliberately so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod neuralnet;
mod scalar;
pub mod signals;
pub mod stream;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use signals::{Channel, StateLabel};

pub type ChannelStats = signals::ChannelStats<f64>;
pub type SignalFrame = signals::SignalFrame<f64>;
pub type FramePair = signals::FramePair<f64>;
pub type DatasetSpec = signals::DatasetSpec<f64>;
pub type LabeledExample = signals::LabeledExample<f64>;
pub type DataSplit = signals::DataSplit<f64>;

pub type DescriptiveSummary = dsp::DescriptiveSummary<f64>;
pub type AcfSeries = dsp::AcfSeries<f64>;
pub type Spectrum = dsp::Spectrum<f64>;
pub type EsdSeries = dsp::EsdSeries<f64>;
pub type FeatureVector = dsp::FeatureVector<f64>;
pub type QqSeries = dsp::QqSeries<f64>;

pub type Model = neuralnet::Network<f64>;
pub type AdamState = neuralnet::AdamState<f64>;
pub type TrainHistory = neuralnet::TrainHistory;

/// Single-precision network, for deployments that trade accuracy for memory.
pub type ModelF32 = neuralnet::Network<f32>;
