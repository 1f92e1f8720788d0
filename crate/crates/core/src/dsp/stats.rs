use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::Scalar;

/// One row of a summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveSummary<T> {
    pub count: usize,
    pub mean: T,
    /// Sample standard deviation (N - 1 denominator).
    pub std: T,
    pub min: T,
    pub q25: T,
    pub q50: T,
    pub q75: T,
    pub max: T,
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_count(x.len())
}

/// Sample standard deviation with the N - 1 denominator; zero for fewer
/// than two samples.
pub fn sample_std<T: Scalar>(x: &[T]) -> T {
    if x.len() < 2 {
        return T::zero();
    }
    let m = mean(x);
    let ss: T = x.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::from_count(x.len() - 1)).sqrt()
}

/// Quantile of ascending data by linear interpolation at h = (n - 1) p.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted_copy<T: Scalar>(samples: &[T]) -> Result<Vec<T>> {
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("samples must be finite".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(s)
}

pub fn describe<T: Scalar>(samples: &[T]) -> Result<DescriptiveSummary<T>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: samples.len() });
    }
    let sorted = sorted_copy(samples)?;
    Ok(DescriptiveSummary {
        count: samples.len(),
        mean: mean(samples),
        std: sample_std(samples),
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.50),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Normalised autocorrelation at lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfSeries<T> {
    pub values: Vec<T>,
}

/// Autocorrelation estimate
/// `acf(l) = sum_{n=0}^{N-1-l} (x[n+l] - m)(x[n] - m) / (N var)`
/// with the population variance, so `acf(0)` is exactly one.
pub fn acf<T: Scalar>(samples: &[T], max_lag: usize) -> Result<AcfSeries<T>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if max_lag > n - 2 {
        return Err(param(format!("max lag {max_lag} exceeds N - 2 = {}", n - 2)));
    }
    let m = mean(samples);
    let centred: Vec<T> = samples.iter().map(|&v| v - m).collect();
    let lagged = |l: usize| -> T { centred[l..].iter().zip(&centred).map(|(&a, &b)| a * b).sum() };
    // N * var_pop is the zero-lag sum itself.
    let energy = lagged(0);
    if !(energy > T::zero()) {
        return Err(Error::DegenerateSignal("constant signal has zero variance".into()));
    }
    let values = (0..=max_lag).map(|l| if l == 0 { T::one() } else { lagged(l) / energy }).collect();
    Ok(AcfSeries { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin<T> {
    pub left: T,
    pub right: T,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; the last bin is closed.
pub fn histogram<T: Scalar>(samples: &[T], bins: usize) -> Result<Vec<HistogramBin<T>>> {
    if bins == 0 {
        return Err(param("histogram needs at least one bin"));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let sorted = sorted_copy(samples)?;
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = if hi > lo { (hi - lo) / T::from_count(bins) } else { T::one() };
    let mut counts = vec![0usize; bins];
    for &v in samples {
        let k = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            left: lo + width * T::from_count(k),
            right: if k + 1 == bins && hi > lo { hi } else { lo + width * T::from_count(k + 1) },
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn describe_small_inputs() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.q50, d.min, d.max), (2.0, 2.0, 1.0, 3.0));
        assert_eq!(d.std, 1.0);
        let d = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.q25, 1.75);
        assert_eq!(d.q75, 3.25);
        assert!(matches!(describe(&[1.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn acf_alternating_sequence() {
        let x: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a = acf(&x, 1).unwrap();
        assert_eq!(a.values[0], 1.0);
        assert!((a.values[1] + 0.875).abs() < 1e-15);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&[2.0; 10], 3), Err(Error::DegenerateSignal(_))));
        assert!(matches!(acf(&[1.0, 2.0, 3.0], 2), Err(Error::Parameter(_))));
        assert!(matches!(acf(&[1.0], 0), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[0.0, 0.1, 0.5, 0.9, 1.0], 2).unwrap();
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[1].right, 1.0);
        assert_eq!(h[0].count, 2);
    }

    proptest! {
        #[test]
        fn summary_is_ordered(x in proptest::collection::vec(-1e3f64..1e3, 2..200)) {
            let d = describe(&x).unwrap();
            prop_assert!(d.min <= d.q25 && d.q25 <= d.q50 && d.q50 <= d.q75 && d.q75 <= d.max);
            prop_assert!(d.std >= 0.0);
        }

        #[test]
        fn acf_bounded(x in proptest::collection::vec(-10f64..10.0, 4..100)) {
            prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-6));
            let a = acf(&x, x.len() - 2).unwrap();
            prop_assert_eq!(a.values[0], 1.0);
            prop_assert!(a.values.iter().all(|v| v.abs() <= 1.0 + 1e-9));
        }
    }
}
