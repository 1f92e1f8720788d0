//! Labelled feature datasets: stratified splitting, corpus synthesis and CSV I/O.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::synth::{for_each_pair_on_stream, CorpusCounts, DatasetSpec};
use super::{FramePair, StateLabel};
use crate::dsp::{extract_features, FeatureExtractor, FeatureVector, FEATURE_DIM};
use crate::error::{param, Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<T> {
    pub features: FeatureVector<T>,
    pub label: StateLabel,
}

impl<T: Scalar> LabeledExample<T> {
    pub fn from_pair(pair: &FramePair<T>) -> Result<Self> {
        let label = pair.label.ok_or_else(|| Error::Data("frame pair carries no label".into()))?;
        Ok(Self { features: extract_features(pair)?, label })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataSplit<T> {
    pub train: Vec<LabeledExample<T>>,
    pub validation: Vec<LabeledExample<T>>,
    pub test: Vec<LabeledExample<T>>,
}

impl<T> DataSplit<T> {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-class sizes of a three-way cut. Each split receives the floor of its
/// share; the leftover (at most two examples) goes to training first and
/// then to whichever held-out split lost the larger fraction.
fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact = ratios.map(|r| r * n as f64);
    let mut sizes = exact.map(|e| (e + 1e-9).floor() as usize);
    let mut leftover = n - sizes.iter().sum::<usize>();
    if leftover > 0 {
        sizes[0] += 1;
        leftover -= 1;
    }
    if leftover > 0 {
        let frac = |i: usize| exact[i] - sizes[i] as f64;
        let k = if frac(2) > frac(1) { 2 } else { 1 };
        sizes[k] += 1;
        leftover -= 1;
    }
    debug_assert_eq!(leftover, 0);
    sizes
}

/// Stratified train/validation/test split. Each class is shuffled with a
/// generator seeded from `seed` before cutting, so the result is a function
/// of `(examples, ratios, seed)` alone.
pub fn split_dataset<T: Scalar>(examples: &[LabeledExample<T>], ratios: [f64; 3], seed: u64) -> Result<DataSplit<T>> {
    if ratios.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(param("split ratios must be positive"));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(param(format!("split ratios must sum to 1, got {sum}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = DataSplit { train: Vec::new(), validation: Vec::new(), test: Vec::new() };
    for class in StateLabel::ALL {
        let mut members: Vec<&LabeledExample<T>> = examples.iter().filter(|e| e.label == class).collect();
        members.shuffle(&mut rng);
        let [n_train, n_val, _] = apportion(members.len(), ratios);
        for (i, e) in members.into_iter().enumerate() {
            let dest = if i < n_train {
                &mut split.train
            } else if i < n_train + n_val {
                &mut split.validation
            } else {
                &mut split.test
            };
            dest.push(e.clone());
        }
    }
    Ok(split)
}

fn synth_examples_on_stream<T: Scalar>(spec: &DatasetSpec<T>, stream: u64) -> Result<Vec<LabeledExample<T>>> {
    let extractor = FeatureExtractor::new(spec.frame_len)?;
    let mut out = Vec::with_capacity(spec.total());
    for_each_pair_on_stream(spec, stream, |pair| {
        let label = pair.label.expect("synthetic pairs are labelled");
        out.push(LabeledExample { features: extractor.extract(&pair)?, label });
        Ok(())
    })?;
    Ok(out)
}

/// Featurised equivalent of [`super::synth_dataset`]: the same frames,
/// reduced to feature vectors as they are generated.
pub fn synth_examples<T: Scalar>(spec: &DatasetSpec<T>) -> Result<Vec<LabeledExample<T>>> {
    synth_examples_on_stream(spec, 0)
}

/// Synthesises and featurises a pre-partitioned corpus. Each split draws
/// from its own generator stream of `template.seed`.
pub fn synth_corpus<T: Scalar>(template: &DatasetSpec<T>, counts: CorpusCounts) -> Result<DataSplit<T>> {
    let build =
        |counts: [usize; 3], stream: u64| synth_examples_on_stream(&DatasetSpec { counts, ..template.clone() }, stream);
    Ok(DataSplit {
        train: build(counts.train, 1)?,
        validation: build(counts.validation, 2)?,
        test: build(counts.test, 3)?,
    })
}

pub fn dataset_header() -> Vec<String> {
    (1..=FEATURE_DIM).map(|i| format!("f{i}")).chain(std::iter::once("label".to_string())).collect()
}

/// Writes `f1..f12,label` rows. Values use the shortest decimal form that
/// parses back to the same float.
pub fn write_dataset_csv<T: Scalar, W: Write>(writer: W, examples: &[LabeledExample<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(dataset_header())?;
    for e in examples {
        let mut row: Vec<String> = e.features.components().iter().map(|v| v.to_string()).collect();
        row.push(e.label.name().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`]. Errors name the
/// offending 1-based data row.
pub fn read_dataset_csv<T: Scalar, R: Read>(reader: R) -> Result<Vec<LabeledExample<T>>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    let expected = dataset_header();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(Error::Data(format!(
            "dataset header must be {} ({} columns), found {} columns",
            expected.join(","),
            expected.len(),
            header.len()
        )));
    }
    let mut out = Vec::new();
    for (i, record) in r.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        if record.len() != FEATURE_DIM + 1 {
            return Err(Error::Data(format!(
                "row {row}: expected {} columns, found {}",
                FEATURE_DIM + 1,
                record.len()
            )));
        }
        let mut components = [T::zero(); FEATURE_DIM];
        for (slot, field) in components.iter_mut().zip(record.iter()) {
            *slot = field
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data(format!("row {row}: invalid feature value {field:?}")))?;
        }
        let label: StateLabel =
            record[FEATURE_DIM].parse().map_err(|e: Error| Error::Data(format!("row {row}: {e}")))?;
        out.push(LabeledExample { features: FeatureVector::new(components), label });
    }
    Ok(out)
}
