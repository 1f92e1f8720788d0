//! Signal analysis: descriptive statistics, autocorrelation, the amplitude
//! density spectrum, normality testing and feature extraction.

mod features;
mod normality;
mod spectrum;
mod stats;

pub use features::{extract_features, top_peaks, FeatureExtractor, FeatureVector, FEATURE_DIM, PEAK_COUNT};
pub use normality::{normal_cdf, normal_quantile, qq_points, shapiro_wilk, NormalityResult, QqSeries};
pub use spectrum::{dft_spectrum, esd, EsdSeries, FftPlan, Spectrum};
pub use stats::{acf, describe, histogram, quantile_sorted, sample_std, AcfSeries, DescriptiveSummary, HistogramBin};
