use serde::Serialize;

use crate::error::{shape, Result};
use crate::signals::StateLabel;

const N: usize = StateLabel::COUNT;

/// Prediction counts; rows are ground truth, columns predictions, both in
/// (nominal, current, defective) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N]; N],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; N]; N]) -> Self {
        Self { counts }
    }

    pub fn record(&mut self, truth: StateLabel, prediction: StateLabel) {
        self.counts[truth.index()][prediction.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N).map(|i| self.counts[i][i]).sum()
    }

    /// Row sum: examples whose ground truth is `class`.
    pub fn support(&self, class: StateLabel) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    /// Column sum: examples predicted as `class`.
    pub fn predicted(&self, class: StateLabel) -> u64 {
        (0..N).map(|i| self.counts[i][class.index()]).sum()
    }

    pub fn true_positives(&self, class: StateLabel) -> u64 {
        self.counts[class.index()][class.index()]
    }

    pub fn false_positives(&self, class: StateLabel) -> u64 {
        self.predicted(class) - self.true_positives(class)
    }

    pub fn false_negatives(&self, class: StateLabel) -> u64 {
        self.support(class) - self.true_positives(class)
    }

    pub fn true_negatives(&self, class: StateLabel) -> u64 {
        self.total() - self.support(class) - self.false_positives(class)
    }
}

pub fn confusion_matrix(truths: &[StateLabel], predictions: &[StateLabel]) -> Result<ConfusionMatrix> {
    if truths.len() != predictions.len() {
        return Err(shape(format!("{} truths but {} predictions", truths.len(), predictions.len())));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truths.iter().zip(predictions) {
        cm.record(t, p);
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use StateLabel::*;

    #[test]
    fn perfect_classifier_is_diagonal() {
        let labels = [Nominal, Current, Current, Defective, Nominal, Current, Defective, Defective, Nominal, Current];
        let cm = confusion_matrix(&labels, &labels).unwrap();
        assert_eq!(cm.trace(), 10);
        assert_eq!(cm.total(), 10);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(cm.counts[i][j], 0);
                }
            }
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion_matrix(&[Nominal], &[]).is_err());
    }

    fn label() -> impl Strategy<Value = StateLabel> {
        (0usize..3).prop_map(|i| StateLabel::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn matches_pair_tally(pairs in proptest::collection::vec((label(), label()), 1..200)) {
            let (t, p): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let cm = confusion_matrix(&t, &p).unwrap();
            for a in StateLabel::ALL {
                for b in StateLabel::ALL {
                    let n = pairs.iter().filter(|&&(x, y)| x == a && y == b).count() as u64;
                    prop_assert_eq!(cm.counts[a.index()][b.index()], n);
                }
                prop_assert_eq!(cm.support(a), t.iter().filter(|&&x| x == a).count() as u64);
            }
            prop_assert_eq!(cm.total(), pairs.len() as u64);

            let mut shuffled = pairs.clone();
            shuffled.reverse();
            shuffled.rotate_left(pairs.len() / 3);
            let (t2, p2): (Vec<_>, Vec<_>) = shuffled.into_iter().unzip();
            prop_assert_eq!(confusion_matrix(&t2, &p2).unwrap(), cm);
        }
    }
}
