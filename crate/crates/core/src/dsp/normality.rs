//! Shapiro-Wilk test (Royston's AS R94 approximation) and normal Q-Q data.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::Scalar;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF (Wichura's AS 241, PPND16), accurate to
/// about 1e-16. Returns +-inf at 0 and 1 and NaN outside [0, 1].
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.0809287301227 + 33430.57558358813) * r + 67265.7709270087) * r + 45921.95393154987)
            * r
            + 13731.69376550946)
            * r
            + 1971.5909503065514)
            * r
            + 133.14166789178438)
            * r
            + 3.3871328727963665;
        let den =
            ((((((r * 5226.495278852546 + 28729.085735721943) * r + 39307.89580009271) * r + 21213.794301586596) * r
                + 5394.196021424751)
                * r
                + 687.1870074920579)
                * r
                + 42.31333070160091)
                * r
                + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745450142783414e-4 + 0.022723844989269184) * r + 0.2417807251774506) * r
            + 1.2704582524523684)
            * r
            + 3.6478483247632045)
            * r
            + 5.769497221460691)
            * r
            + 4.630337846156545)
            * r
            + 1.4234371107496835;
        let den = ((((((r * 1.0507500716444169e-9 + 5.475938084995345e-4) * r + 0.015198666563616457) * r
            + 0.14810397642748008)
            * r
            + 0.6897673349851)
            * r
            + 1.6763848301838038)
            * r
            + 2.053191626637759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010334399292288e-7 + 2.7115555687434876e-5) * r + 1.2426609473880784e-3) * r
            + 0.026532189526576124)
            * r
            + 0.2965605718285049)
            * r
            + 1.7848265399172913)
            * r
            + 5.463784911164114)
            * r
            + 6.657904643501103;
        let den = ((((((r * 2.0442631033899397e-15 + 1.421511758316446e-7) * r + 1.8463183175100548e-5) * r
            + 7.868691311456133e-4)
            * r
            + 0.014875361290850615)
            * r
            + 0.1369298809227358)
            * r
            + 0.599832206555888)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityResult {
    pub w_statistic: f64,
    pub p_value: f64,
}

/// `c[0] + c[1] x + c[2] x^2 + ...`
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shapiro-Wilk W and its p-value, valid for 3 <= n <= 5000.
pub fn shapiro_wilk<T: Scalar>(samples: &[T]) -> Result<NormalityResult> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = samples.len();
    if !(3..=5000).contains(&n) {
        return Err(param(format!("Shapiro-Wilk needs 3..=5000 samples, got {n}")));
    }
    let mut x: Vec<f64> = samples.iter().map(|v| v.as_f64()).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("samples must be finite".into()));
    }
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let range = x[n - 1] - x[0];
    if range < 1e-19 {
        return Err(Error::DegenerateSignal("constant sample".into()));
    }

    // Coefficients for the upper half, a[i] pairs x[n-1-i] - x[i].
    let an = n as f64;
    let half = n / 2;
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let an25 = an + 0.25;
        let m: Vec<f64> = (1..=half).map(|i| normal_quantile((i as f64 - 0.375) / an25)).collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
            a[1] = a2;
            (2, fac)
        } else {
            let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    // W as the squared correlation between the ordered data and the
    // antisymmetric coefficient vector; 1 - W is formed directly.
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i],
            std::cmp::Ordering::Greater => a[j],
            std::cmp::Ordering::Equal => 0.0,
        }
    };
    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, &xi) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p = if n == 3 {
        const SIX_OVER_PI: f64 = 6.0 / std::f64::consts::PI;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (SIX_OVER_PI * (w.sqrt().asin() - STQR)).max(0.0)
    } else {
        let y = w1.ln();
        let ln_n = an.ln();
        if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                1e-99
            } else {
                let y = -(gamma - y).ln();
                let m = poly(&C3, an);
                let s = poly(&C4, an).exp();
                normal_upper_tail((y - m) / s)
            }
        } else {
            let m = poly(&C5, ln_n);
            let s = poly(&C6, ln_n).exp();
            normal_upper_tail((y - m) / s)
        }
    };
    Ok(NormalityResult { w_statistic: w.clamp(f64::MIN_POSITIVE, 1.0), p_value: p.clamp(0.0, 1.0) })
}

/// Normal Q-Q plot data: (theoretical quantile, ordered sample).
#[derive(Debug, Clone, PartialEq)]
pub struct QqSeries<T> {
    pub points: Vec<(T, T)>,
}

/// Blom plotting positions `(i - 0.375) / (n + 0.25)`.
pub fn qq_points<T: Scalar>(samples: &[T]) -> Result<QqSeries<T>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let denom = n as f64 + 0.25;
    let points = sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (T::lit(normal_quantile((i as f64 + 1.0 - 0.375) / denom)), v))
        .collect();
    Ok(QqSeries { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_symmetry_and_centre() {
        assert_eq!(normal_quantile(0.5), 0.0);
        for p in [0.5f64.powi(30), 0.5f64.powi(12), 0.0078125, 0.125, 0.375] {
            assert_eq!(normal_quantile(p), -normal_quantile(1.0 - p));
        }
        assert!(normal_quantile(-0.1).is_nan());
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn shapiro_rejects_bad_sizes() {
        assert!(matches!(shapiro_wilk(&[1.0, 2.0]), Err(Error::Parameter(_))));
        assert!(shapiro_wilk(&vec![0.0; 5001]).is_err());
        assert!(matches!(shapiro_wilk(&[1.0; 10]), Err(Error::DegenerateSignal(_))));
    }

    #[test]
    fn shapiro_three_points_exact() {
        // Equally spaced triple is as normal as three points get: W = 1, p = 1.
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.w_statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qq_fixed_point() {
        let n = 25;
        let theo: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25))).collect();
        let qq = qq_points(&theo).unwrap();
        for (t, s) in &qq.points {
            assert!((t - s).abs() < 1e-9);
        }
    }

    #[test]
    fn qq_three_points() {
        let qq = qq_points(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(qq.points[1].0, 0.0);
        assert!((qq.points[0].0 - normal_quantile(0.625 / 3.25)).abs() < 1e-15);
        assert!((qq.points[0].0 + qq.points[2].0).abs() < 1e-15);
        assert_eq!(qq.points.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        assert!(qq_points(&[1.0, 2.0]).is_err());
    }
}
