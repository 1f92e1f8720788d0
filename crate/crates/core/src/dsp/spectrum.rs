//! Amplitude density spectrum by radix-2 decimation-in-time FFT.

use num_complex::Complex;

use crate::error::{shape, Result};
use crate::signals::SignalFrame;
use crate::Scalar;

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct FftPlan<T> {
    len: usize,
    twiddles: Vec<Complex<T>>,
    bit_reverse: Vec<usize>,
}

impl<T: Scalar> FftPlan<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 || !len.is_power_of_two() {
            return Err(shape(format!("FFT length must be a power of two >= 2, got {len}")));
        }
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len).map(|i| i.reverse_bits() >> (usize::BITS - bits)).collect();
        let n = T::from_count(len);
        // Each twiddle is evaluated directly; a recurrence would accumulate error.
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -T::TAU() * T::from_count(k) / n;
                Complex::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { len, twiddles, bit_reverse })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X[k] = sum_n x[n] exp(-j 2 pi n k / N)`.
    pub fn forward(&self, buf: &mut [Complex<T>]) -> Result<()> {
        if buf.len() != self.len {
            return Err(shape(format!("buffer length {} does not match plan length {}", buf.len(), self.len)));
        }
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
        Ok(())
    }
}

/// Amplitude density `S(kF) = Ts * sum_n x(n Ts) exp(-j 2 pi n k / N)`, V/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub bins: Vec<Complex<T>>,
    /// Bin spacing F = 1 / (N Ts), Hz.
    pub bin_width: T,
    /// Sampling interval Ts, s.
    pub sample_interval: T,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.bins.iter().map(|c| c.norm()).collect()
    }
}

pub fn dft_spectrum<T: Scalar>(frame: &SignalFrame<T>) -> Result<Spectrum<T>> {
    let plan = FftPlan::new(frame.len())?;
    spectrum_with_plan(&plan, frame)
}

pub(crate) fn spectrum_with_plan<T: Scalar>(plan: &FftPlan<T>, frame: &SignalFrame<T>) -> Result<Spectrum<T>> {
    let ts = frame.sample_interval();
    let mut bins: Vec<Complex<T>> = frame.samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
    plan.forward(&mut bins)?;
    for b in &mut bins {
        *b *= ts;
    }
    Ok(Spectrum { bins, bin_width: (T::from_count(frame.len()) * ts).recip(), sample_interval: ts })
}

/// Energy spectral density |S(kF)|^2.
#[derive(Debug, Clone, PartialEq)]
pub struct EsdSeries<T> {
    pub values: Vec<T>,
    pub bin_width: T,
}

impl<T: Scalar> EsdSeries<T> {
    pub fn frequencies(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.values.len()).map(|k| T::from_count(k) * self.bin_width)
    }

    /// Total energy F * sum |S_k|^2.
    pub fn energy(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.bin_width
    }
}

pub fn esd<T: Scalar>(spectrum: &Spectrum<T>) -> EsdSeries<T> {
    EsdSeries { values: spectrum.bins.iter().map(|c| c.norm_sqr()).collect(), bin_width: spectrum.bin_width }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::Channel;

    fn frame(samples: Vec<f64>, rate: f64) -> SignalFrame<f64> {
        SignalFrame::new(Channel::Acoustic, samples, rate).unwrap()
    }

    #[test]
    fn dc_only() {
        let s = dft_spectrum(&frame(vec![2.5; 4], 8.0)).unwrap();
        let ts = 1.0 / 8.0;
        assert_eq!(s.bins[0], Complex::new(4.0 * 2.5 * ts, 0.0));
        for b in &s.bins[1..] {
            assert!(b.norm() < 1e-15);
        }
        assert_eq!(s.bin_width, 2.0);
    }

    #[test]
    fn cosine_lands_in_two_bins() {
        let n = 16;
        let x = (0..n).map(|i| (std::f64::consts::TAU * 3.0 * i as f64 / n as f64).cos()).collect();
        let s = dft_spectrum(&frame(x, 1000.0)).unwrap();
        let ts = 1e-3;
        for (k, b) in s.bins.iter().enumerate() {
            if k == 3 || k == 13 {
                assert!((b.norm() - 8.0 * ts).abs() < 1e-15);
            } else {
                assert!(b.norm() <= 1e-12, "bin {k}: {}", b.norm());
            }
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(matches!(dft_spectrum(&frame(vec![1.0; 12], 1.0)), Err(crate::Error::Shape(_))));
        assert!(dft_spectrum(&frame(vec![1.0], 1.0)).is_err());
    }

    #[test]
    fn esd_modulus() {
        let s = Spectrum {
            bins: vec![Complex::new(3.0, 4.0), Complex::new(0.0, 0.0)],
            bin_width: 1.0,
            sample_interval: 0.5,
        };
        let e = esd(&s);
        assert_eq!(e.values, vec![25.0, 0.0]);
        let z = Spectrum { bins: vec![Complex::new(0.0, 0.0); 8], bin_width: 1.0, sample_interval: 1.0 };
        assert!(esd(&z).values.iter().all(|&v| v == 0.0));
    }
}
