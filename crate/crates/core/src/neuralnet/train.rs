use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::adam::{AdamConfig, AdamState};
use super::loss::cross_entropy;
use super::network::Network;
use crate::dsp::FEATURE_DIM;
use crate::error::{param, shape, Error, Result};
use crate::signals::{one_hot, DataSplit, LabeledExample, StateLabel};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, batch_size: 32, seed: 0, shuffle: true, adam: AdamConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    /// `None` when the validation set is empty.
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    pub optimizer_steps: u64,
}

fn to_batch<T: Scalar>(examples: &[&LabeledExample<T>]) -> (Array2<T>, Array2<T>) {
    let x = Array2::from_shape_fn((examples.len(), FEATURE_DIM), |(i, j)| examples[i].features.components()[j]);
    let y = Array2::from_shape_fn((examples.len(), StateLabel::COUNT), |(i, j)| one_hot::<T>(examples[i].label)[j]);
    (x, y)
}

/// Batch boundaries; a trailing batch of one row is merged into the
/// previous batch since batch statistics need two rows.
fn batch_ranges(n: usize, batch_size: usize) -> Vec<std::ops::Range<usize>> {
    let mut ranges: Vec<_> = (0..n).step_by(batch_size).map(|s| s..(s + batch_size).min(n)).collect();
    if ranges.len() > 1 && ranges.last().is_some_and(|r| r.len() == 1) {
        let last = ranges.pop().expect("non-empty");
        ranges.last_mut().expect("non-empty").end = last.end;
    }
    ranges
}

/// Mean loss and accuracy in inference mode.
pub(crate) fn evaluate<T: Scalar>(model: &Network<T>, examples: &[LabeledExample<T>]) -> Result<(f64, f64)> {
    const CHUNK: usize = 1024;
    let (mut loss_sum, mut correct) = (0.0, 0usize);
    for chunk in examples.chunks(CHUNK) {
        let refs: Vec<&LabeledExample<T>> = chunk.iter().collect();
        let (x, y) = to_batch(&refs);
        let probs = model.infer(x.view())?;
        loss_sum += cross_entropy(probs.view(), y.view())?.as_f64() * chunk.len() as f64;
        let predicted = model.classify_batch(x.view())?;
        correct += predicted.iter().zip(chunk).filter(|(p, e)| **p == e.label.index()).count();
    }
    let n = examples.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

/// Fixed-epoch minibatch training. Each epoch reshuffles the training set
/// with a generator seeded from `config.seed`, takes one Adam step per
/// batch, then scores the training and validation sets in inference mode.
pub fn train<T: Scalar>(model: &mut Network<T>, split: &DataSplit<T>, config: &TrainConfig) -> Result<TrainHistory> {
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(param("epochs and batch size must be at least 1"));
    }
    if split.train.len() < 2 {
        return Err(Error::Data(format!("training needs at least 2 examples, got {}", split.train.len())));
    }
    if model.architecture().input_dim != FEATURE_DIM || model.architecture().output_dim != StateLabel::COUNT {
        return Err(shape("model must map 12 features to 3 classes"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(config.adam);
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let ranges = batch_ranges(order.len(), config.batch_size);
    let mut history = TrainHistory::default();

    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for r in &ranges {
            let batch: Vec<&LabeledExample<T>> = order[r.clone()].iter().map(|&i| &split.train[i]).collect();
            let (x, y) = to_batch(&batch);
            let loss = model.train_step(x.view(), y.view(), &mut adam)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss in epoch {epoch}")));
            }
        }
        let (train_loss, train_accuracy) = evaluate(model, &split.train)?;
        if !train_loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss in epoch {epoch}")));
        }
        let (val_loss, val_accuracy) = if split.validation.is_empty() {
            (None, None)
        } else {
            let (l, a) = evaluate(model, &split.validation)?;
            (Some(l), Some(a))
        };
        history.records.push(EpochRecord { epoch, train_loss, train_accuracy, val_loss, val_accuracy });
    }
    history.optimizer_steps = adam.t;
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::FeatureVector;
    use crate::neuralnet::ModelArchitecture;

    #[test]
    fn ranges_merge_single_tail() {
        assert_eq!(batch_ranges(65, 32), vec![0..32, 32..65]);
        assert_eq!(batch_ranges(66, 32), vec![0..32, 32..64, 64..66]);
        assert_eq!(batch_ranges(32, 32), vec![0..32]);
        assert_eq!(batch_ranges(5, 10), vec![0..5]);
    }

    fn examples(n: usize) -> Vec<LabeledExample<f64>> {
        (0..n)
            .map(|i| {
                let label = StateLabel::from_index(i % 3).unwrap();
                let mut f = [0.0; 12];
                f[0] = label.index() as f64 + 0.01 * i as f64;
                LabeledExample { features: FeatureVector::new(f), label }
            })
            .collect()
    }

    #[test]
    fn one_epoch_one_step() {
        let split = DataSplit { train: examples(32), validation: vec![], test: vec![] };
        let mut model = Network::<f64>::new(ModelArchitecture::default(), 0).unwrap();
        let cfg = TrainConfig { epochs: 1, batch_size: 32, ..Default::default() };
        let h = train(&mut model, &split, &cfg).unwrap();
        assert_eq!(h.optimizer_steps, 1);
        assert_eq!(h.records.len(), 1);
        assert_eq!(h.records[0].val_accuracy, None);
    }

    #[test]
    fn too_little_data() {
        let split = DataSplit { train: examples(1), validation: vec![], test: vec![] };
        let mut model = Network::<f64>::new(ModelArchitecture::default(), 0).unwrap();
        assert!(matches!(train(&mut model, &split, &TrainConfig::default()), Err(Error::Data(_))));
    }
}
