use ndarray::ArrayView2;

use crate::error::{shape, Result};
use crate::Scalar;

/// Probabilities are clipped to this floor before the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean categorical cross-entropy `-sum p log q` in nats over the batch rows.
pub fn cross_entropy<T: Scalar>(probs: ArrayView2<T>, targets: ArrayView2<T>) -> Result<T> {
    if probs.dim() != targets.dim() {
        return Err(shape(format!("probabilities {:?} vs targets {:?}", probs.dim(), targets.dim())));
    }
    let rows = probs.nrows();
    if rows == 0 {
        return Err(shape("empty batch"));
    }
    let floor = T::lit(PROB_FLOOR);
    let mut total = T::zero();
    for (q, p) in probs.iter().zip(targets.iter()) {
        if *p != T::zero() {
            total -= *p * q.max(floor).min(T::one()).ln();
        }
    }
    Ok(total / T::from_count(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_prediction() {
        let t = array![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(cross_entropy(t.view(), t.view()).unwrap() <= 1e-11);
    }

    #[test]
    fn hand_values() {
        let q = array![[0.7f64, 0.2, 0.1]];
        let p = array![[1.0, 0.0, 0.0]];
        assert!((cross_entropy(q.view(), p.view()).unwrap() - 0.356_674_943_938_732_4).abs() < 1e-15);
        let u = array![[1.0 / 3.0; 3]];
        let p = array![[0.0, 1.0, 0.0]];
        assert!((cross_entropy(u.view(), p.view()).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_is_clipped() {
        let q = array![[0.0, 1.0, 0.0]];
        let p = array![[1.0, 0.0, 0.0]];
        let l = cross_entropy(q.view(), p.view()).unwrap();
        assert!((l - -(1e-12f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch() {
        let q = array![[0.5, 0.5]];
        let p = array![[1.0, 0.0, 0.0]];
        assert!(cross_entropy(q.view(), p.view()).is_err());
    }
}
