//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use vibrodiag::dsp::{acf, dft_spectrum, esd, sample_std, shapiro_wilk};
use vibrodiag::evaluation::{averaged_metrics, class_metrics, overall_accuracy, round_half_up, ConfusionMatrix};
use vibrodiag::neuralnet::{load_model, save_model, train, ModelArchitecture, TrainConfig};
use vibrodiag::signals::{synth_corpus, synth_frame, synth_pair, volts_to_pcm, CorpusCounts, DEFAULT_FULL_SCALE_VOLTS};
use vibrodiag::stream::{classify_stream, encode_message, StreamConfig};
use vibrodiag::{Channel, ChannelStats, DatasetSpec, Model, SignalFrame, StateLabel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_matrix() -> ConfusionMatrix {
    ConfusionMatrix::from_counts([[410, 0, 0], [0, 1006, 4], [0, 15, 40]])
}

fn parameter_accounting() -> Outcome {
    let model = Model::new(ModelArchitecture::default(), 0).map_err(|e| e.to_string())?;
    let c = model.param_counts();
    check(
        (c.total, c.trainable, c.non_trainable) == (38_195, 37_403, 792),
        format!("total {} trainable {} non-trainable {}", c.total, c.trainable, c.non_trainable),
    )
}

fn reference_report() -> Outcome {
    let cm = reference_matrix();
    let r4 = |x: f64| round_half_up(x, 4);
    let mut got = Vec::new();
    for s in StateLabel::ALL {
        let m = class_metrics(&cm, s);
        got.extend([m.precision, m.recall, m.f1]);
    }
    let a = averaged_metrics(&cm);
    got.extend([a.macro_avg.precision, a.macro_avg.recall, a.macro_avg.f1]);
    got.extend([a.weighted.precision, a.weighted.recall, a.weighted.f1]);
    got.extend([a.micro.precision, a.micro.recall, a.micro.f1]);
    let expect = [
        1.0, 1.0, 1.0, 0.9853, 0.9960, 0.9906, 0.9091, 0.7273, 0.8081, 0.9648, 0.9078, 0.9329, 0.9866, 0.9871, 0.9864,
        0.9871, 0.9871, 0.9871,
    ];
    let rounded: Vec<f64> = got.iter().map(|&x| r4(x)).collect();
    let mismatches = rounded.iter().zip(expect).filter(|(g, e)| **g != *e).count();
    check(mismatches == 0, format!("{} cells, {mismatches} mismatched", expect.len()))
}

fn accuracy() -> Outcome {
    let cm = reference_matrix();
    let acc = overall_accuracy(&cm, None);
    check(
        cm.trace() == 1456 && cm.total() == 1475 && round_half_up(acc, 4) == 0.9871,
        format!("{}/{} = {acc:.6}", cm.trace(), cm.total()),
    )
}

fn naive_dft(x: &[f64], ts: f64) -> Vec<Complex<f64>> {
    let n = x.len();
    let table: Vec<Complex<f64>> =
        (0..n).map(|m| Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * m as f64 / n as f64)).collect();
    (0..n)
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, &v) in x.iter().enumerate() {
                acc += table[(j * k) % n] * v;
            }
            acc * ts
        })
        .collect()
}

fn dft_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fs = 44_100.0;
    let (mut worst, mut worst_parseval) = (0.0f64, 0.0f64);
    for p in 1..=12 {
        let n = 1usize << p;
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let frame = SignalFrame::new(Channel::Acoustic, x.clone(), fs).map_err(|e| e.to_string())?;
            let fast = dft_spectrum(&frame).map_err(|e| e.to_string())?;
            let slow = naive_dft(&x, 1.0 / fs);
            let peak = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let dev = fast.bins.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(dev / peak);
            let time_energy = x.iter().map(|v| v * v).sum::<f64>() / fs;
            let freq_energy = esd(&fast).energy();
            worst_parseval = worst_parseval.max((freq_energy - time_energy).abs() / time_energy);
        }
    }
    check(
        worst <= 1e-9 && worst_parseval <= 1e-9,
        format!("max deviation {worst:.2e} x peak, Parseval {worst_parseval:.2e}"),
    )
}

fn acf_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut worst_zero) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=512);
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let got = acf(&x, n - 2).map_err(|e| e.to_string())?;
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        for l in 0..=n - 2 {
            let mut s = 0.0;
            for i in 0..n - l {
                s += (x[i + l] - mean) * (x[i] - mean);
            }
            worst = worst.max((got.values[l] - s / (n as f64 * var)).abs());
        }
        worst_zero = worst_zero.max((got.values[0] - 1.0).abs());
    }
    check(worst <= 1e-12 && worst_zero <= 1e-12, format!("max deviation {worst:.2e}, |acf(0) - 1| {worst_zero:.2e}"))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut model = Model::new(ModelArchitecture::default(), 6).map_err(|e| e.to_string())?;
    let b = 8;
    let x = Array2::from_shape_fn((b, 12), |_| StandardNormal.sample(&mut rng));
    let y = Array2::from_shape_fn((b, 3), |(i, j)| if j == i % 3 { 1.0 } else { 0.0 });
    let (_, grads) = model.backward(x.view(), y.view()).map_err(|e| e.to_string())?;
    let analytic: Vec<Vec<f64>> = grads.groups().iter().map(|g| g.to_vec()).collect();
    let names = model.trainable_group_names();
    let h = 1e-5;
    let mut worst = (0.0f64, String::new());
    let mut checked = 0usize;
    for (g, group) in analytic.iter().enumerate() {
        for (k, &a) in group.iter().enumerate() {
            let orig = model.trainable_params_mut()[g][k];
            model.trainable_params_mut()[g][k] = orig + h;
            let up = model.train_loss(x.view(), y.view()).map_err(|e| e.to_string())?;
            model.trainable_params_mut()[g][k] = orig - h;
            let down = model.train_loss(x.view(), y.view()).map_err(|e| e.to_string())?;
            model.trainable_params_mut()[g][k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > worst.0 {
                worst = (rel, format!("{}[{k}]", names[g]));
            }
            checked += 1;
        }
    }
    check(worst.0 <= 1e-4, format!("{checked} parameters, max relative error {:.2e} at {}", worst.0, worst.1))
}

fn end_to_end_training() -> Outcome {
    let spec = DatasetSpec::with_counts([0; 3], 2024);
    let split = synth_corpus(&spec, CorpusCounts::reference()).map_err(|e| e.to_string())?;
    let sizes = (split.train.len(), split.validation.len(), split.test.len());
    let mut model = Model::new(ModelArchitecture::default(), 2024).map_err(|e| e.to_string())?;
    let config = TrainConfig { seed: 2024, ..TrainConfig::default() };
    let history = train(&mut model, &split, &config).map_err(|e| e.to_string())?;
    let last = history.records.last().ok_or("no epochs")?;
    let correct =
        split.test.iter().filter(|e| model.predict(&e.features).map(|p| p.label == e.label).unwrap_or(false)).count();
    let test_acc = correct as f64 / split.test.len() as f64;
    check(
        sizes == (5309, 590, 1475) && history.records.len() == 20 && test_acc >= 0.95,
        format!(
            "splits {sizes:?}, train {:.4}, val {:.4}, test {test_acc:.4}",
            last.train_accuracy,
            last.val_accuracy.unwrap_or(f64::NAN)
        ),
    )
}

fn generator_calibration() -> Outcome {
    let spec = DatasetSpec::with_counts([0; 3], 8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = (1.0f64, String::new());
    for s in StateLabel::ALL {
        for c in Channel::BOTH {
            let target = ChannelStats::reference(s, c);
            let h = spec.harmonics_for(s, c);
            let mut good = 0;
            for _ in 0..1000 {
                let f = synth_frame(&target, c, spec.frame_len, spec.sample_rate, h.as_ref(), &mut rng)
                    .map_err(|e| e.to_string())?;
                let n = f.len() as f64;
                let mean = f.samples.iter().sum::<f64>() / n;
                let std = sample_std(&f.samples);
                let std_ok = (std - target.std).abs() <= 0.05 * target.std;
                let mean_ok = (mean - target.mean).abs() <= 3.0 * target.std / n.sqrt();
                if std_ok && mean_ok {
                    good += 1;
                }
            }
            let frac = good as f64 / 1000.0;
            if frac < worst.0 {
                worst = (frac, format!("{s}/{c}"));
            }
        }
    }
    check(worst.0 >= 0.99, format!("worst in-tolerance fraction {:.3} ({})", worst.0, worst.1))
}

fn persistence() -> Outcome {
    let spec = DatasetSpec::with_counts([0; 3], 9);
    let counts = CorpusCounts { train: [40, 40, 40], validation: [0; 3], test: [0; 3] };
    let split = synth_corpus(&spec, counts).map_err(|e| e.to_string())?;
    let mut model = Model::new(ModelArchitecture::default(), 9).map_err(|e| e.to_string())?;
    train(&mut model, &split, &TrainConfig { epochs: 2, seed: 9, ..TrainConfig::default() })
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    save_model(&model, &path).map_err(|e| e.to_string())?;
    let loaded: Model = load_model(&path).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut identical = 0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..0.5)).collect();
        let a = model.predict_probs(&x).map_err(|e| e.to_string())?;
        let b = loaded.predict_probs(&x).map_err(|e| e.to_string())?;
        if a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()) {
            identical += 1;
        }
    }
    check(identical == 100 && loaded == model, format!("{identical}/100 bitwise identical"))
}

fn normality_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rejected = 0;
    for _ in 0..200 {
        let x: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
        if shapiro_wilk(&x).map_err(|e| e.to_string())?.p_value < 0.05 {
            rejected += 1;
        }
    }
    let rate = rejected as f64 / 200.0;
    let mut uniform_hits = 0;
    for _ in 0..200 {
        let x: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        if shapiro_wilk(&x).map_err(|e| e.to_string())?.p_value < 0.01 {
            uniform_hits += 1;
        }
    }
    let power = uniform_hits as f64 / 200.0;
    // W and p from a reference implementation for fixed inputs.
    let fixed: [(Vec<f64>, f64, f64); 3] = [
        (
            (0..20).map(|i| (1.3 * i as f64).sin() + 0.1 * (i % 7) as f64).collect(),
            0.9353333376892975,
            0.19545754482664385,
        ),
        ((0..50).map(|i| (0.05 * i as f64).exp()).collect(), 0.8902154095581389, 0.00023193735326332578),
        (
            (0..11).map(|i| ((i * 37) % 11) as f64 / 3.0 + 0.01 * (i * i) as f64).collect(),
            0.9738265089047531,
            0.9223265001557871,
        ),
    ];
    let (mut dw, mut dp) = (0.0f64, 0.0f64);
    for (x, w, p) in &fixed {
        let r = shapiro_wilk(x).map_err(|e| e.to_string())?;
        dw = dw.max((r.w_statistic - w).abs());
        dp = dp.max((r.p_value - p).abs());
    }
    check(
        (0.01..=0.12).contains(&rate) && power >= 0.95 && dw <= 1e-3 && dp <= 1e-2,
        format!("normal rejection {rate:.3}, uniform power {power:.3}, |dW| {dw:.1e}, |dp| {dp:.1e}"),
    )
}

fn stream_latency() -> Outcome {
    let model = Model::new(ModelArchitecture::default(), 11).map_err(|e| e.to_string())?;
    let spec = DatasetSpec::with_counts([0; 3], 11);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bytes = Vec::new();
    for i in 0..1000 {
        let pair = synth_pair(&spec, StateLabel::ALL[i % 3], &mut rng).map_err(|e| e.to_string())?;
        let a = volts_to_pcm(&pair.acoustic.samples, DEFAULT_FULL_SCALE_VOLTS);
        let v = volts_to_pcm(&pair.vibration.samples, DEFAULT_FULL_SCALE_VOLTS);
        bytes.extend(encode_message(&a, &v).map_err(|e| e.to_string())?);
    }
    let mut out = Vec::new();
    let summary =
        classify_stream(&model, bytes.as_slice(), &mut out, StreamConfig::default()).map_err(|e| e.to_string())?;
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let in_order = text.lines().enumerate().all(|(i, line)| {
        serde_json::from_str::<serde_json::Value>(line).ok().and_then(|v| v["frame"].as_u64()) == Some(i as u64)
    });
    let lines = text.lines().count();
    let mean_ms = summary.mean_latency_us / 1000.0;
    check(
        lines == 1000 && summary.errors == 0 && in_order && mean_ms < 9.0,
        format!(
            "{lines} lines, in order {in_order}, mean latency {mean_ms:.3} ms, max {:.3} ms",
            summary.max_latency_us / 1000.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("parameter accounting", parameter_accounting, Duration::from_secs(1)),
        ("classification report", reference_report, Duration::from_secs(1)),
        ("overall accuracy", accuracy, Duration::from_secs(1)),
        ("DFT oracle", dft_oracle, Duration::from_secs(30)),
        ("ACF oracle", acf_oracle, Duration::from_secs(10)),
        ("gradient check", gradient_check, Duration::from_secs(300)),
        ("end-to-end training", end_to_end_training, Duration::from_secs(120)),
        ("generator calibration", generator_calibration, Duration::from_secs(60)),
        ("persistence", persistence, Duration::from_secs(60)),
        ("Shapiro-Wilk sanity", normality_test, Duration::from_secs(60)),
        ("streaming latency", stream_latency, Duration::from_secs(120)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
