use std::fs;
use std::path::{Path, PathBuf};

use vibrodiag::dsp::{acf, describe, dft_spectrum, esd, histogram, qq_points, shapiro_wilk};
use vibrodiag::signals::{ingest_interleaved_pcm, ingest_pcm, synth_dataset, DEFAULT_FULL_SCALE_VOLTS};
use vibrodiag::{Channel, DatasetSpec, SignalFrame, StateLabel};

use super::{dataset_spec, write_csv};
use crate::config::Settings;
use crate::error::{data, usage, CliResult};
use crate::AnalyzeArgs;

const DEFAULT_MAX_LAG: usize = 100;
const DEFAULT_BINS: usize = 50;
const DEFAULT_FRAMES: usize = 16;
const MAX_NORMALITY_SAMPLES: usize = 5000;

struct Signal {
    channel: Channel,
    samples: Vec<f64>,
}

fn parse_channel(name: &str) -> CliResult<Channel> {
    Channel::BOTH
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| usage(format!("unknown channel {name:?}; expected acoustic or vibration")))
}

fn analyze_channel(
    signal: &Signal,
    frame_len: usize,
    sample_rate: f64,
    max_lag: usize,
    bins: usize,
    dir: &Path,
) -> CliResult<[String; 8]> {
    let x = &signal.samples;
    if x.len() < frame_len {
        return Err(vibrodiag::Error::InsufficientData { needed: frame_len, got: x.len() }.into());
    }
    let summary = describe(x)?;
    let frame = SignalFrame::new(signal.channel, x[..frame_len].to_vec(), sample_rate)?;
    let acf_series = acf(&frame.samples, max_lag.min(frame_len - 2))?;
    let energy = esd(&dft_spectrum(&frame)?);
    let head = &x[..x.len().min(MAX_NORMALITY_SAMPLES)];
    let normality = shapiro_wilk(head)?;
    let qq = qq_points(head)?;
    let hist = histogram(x, bins)?;

    fs::create_dir_all(dir).map_err(|e| data(format!("cannot create {}: {e}", dir.display())))?;
    write_csv(
        &dir.join("acf.csv"),
        &["lag", "value"],
        acf_series.values.iter().enumerate().map(|(l, v)| [l.to_string(), v.to_string()]),
    )?;
    write_csv(
        &dir.join("esd.csv"),
        &["freq_hz", "value"],
        energy.frequencies().zip(&energy.values).map(|(f, v)| [f.to_string(), v.to_string()]),
    )?;
    write_csv(
        &dir.join("qq.csv"),
        &["theoretical", "sample"],
        qq.points.iter().map(|(t, v)| [t.to_string(), v.to_string()]),
    )?;
    write_csv(
        &dir.join("hist.csv"),
        &["bin_left", "bin_right", "count"],
        hist.iter().map(|b| [b.left.to_string(), b.right.to_string(), b.count.to_string()]),
    )?;
    println!(
        "{}: n {} mean {:.6} std {:.6} Shapiro-Wilk W {:.6} p {:.6} (first {} samples)",
        signal.channel,
        summary.count,
        summary.mean,
        summary.std,
        normality.w_statistic,
        normality.p_value,
        head.len()
    );
    Ok([
        summary.count.to_string(),
        summary.mean.to_string(),
        summary.std.to_string(),
        summary.min.to_string(),
        summary.q25.to_string(),
        summary.q50.to_string(),
        summary.q75.to_string(),
        summary.max.to_string(),
    ])
}

pub fn run(a: AnalyzeArgs, s: &Settings) -> CliResult<()> {
    let spec = dataset_spec(&a.signal, s)?;
    let pcm: Option<PathBuf> = s.opt("pcm", a.pcm)?;
    let interleaved = s.get("interleaved", a.interleaved.then_some(true), false)?;
    let channel = parse_channel(&s.get("channel", a.channel, "acoustic".to_string())?)?;
    let state: Option<String> = s.opt("state", a.state)?;
    let frames = s.get("frames", a.frames, DEFAULT_FRAMES)?;
    let full_scale = s.get("full_scale", a.full_scale, DEFAULT_FULL_SCALE_VOLTS)?;
    let max_lag = s.get("max_lag", a.max_lag, DEFAULT_MAX_LAG)?;
    let bins = s.get("bins", a.bins, DEFAULT_BINS)?;
    let out = s.get("out", a.out, PathBuf::from("analysis"))?;
    s.finish()?;

    let frame_len = spec.frame_len;
    if frame_len < 2 || !frame_len.is_power_of_two() {
        return Err(usage(format!("frame length must be a power of two >= 2, got {frame_len}")));
    }
    if bins == 0 {
        return Err(usage("bins must be at least 1"));
    }

    let (state_label, signals) = match (pcm, state) {
        (Some(_), Some(_)) => return Err(usage("give either --pcm or --state, not both")),
        (None, None) => return Err(usage("missing input: --pcm or --state")),
        (Some(path), None) => {
            let bytes = fs::read(&path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))?;
            if bytes.is_empty() {
                return Err(data(format!("{}: zero-length input", path.display())));
            }
            let signals = if interleaved {
                let (ac, vib) = ingest_interleaved_pcm(&bytes, spec.sample_rate, full_scale)?;
                vec![
                    Signal { channel: Channel::Acoustic, samples: ac.samples },
                    Signal { channel: Channel::Vibration, samples: vib.samples },
                ]
            } else {
                vec![Signal { channel, samples: ingest_pcm(&bytes, channel, spec.sample_rate, full_scale)?.samples }]
            };
            (String::new(), signals)
        }
        (None, Some(name)) => {
            let state: StateLabel = name.parse().map_err(|e: vibrodiag::Error| usage(e.to_string()))?;
            if frames == 0 {
                return Err(usage("frames must be at least 1"));
            }
            let mut counts = [0; 3];
            counts[state.index()] = frames;
            let pairs = synth_dataset(&DatasetSpec { counts, ..spec.clone() })?;
            let ac = pairs.iter().flat_map(|p| p.acoustic.samples.iter().copied()).collect();
            let vib = pairs.iter().flat_map(|p| p.vibration.samples.iter().copied()).collect();
            (
                state.name().to_string(),
                vec![
                    Signal { channel: Channel::Acoustic, samples: ac },
                    Signal { channel: Channel::Vibration, samples: vib },
                ],
            )
        }
    };

    let mut rows = Vec::new();
    for signal in &signals {
        let stats =
            analyze_channel(signal, frame_len, spec.sample_rate, max_lag, bins, &out.join(signal.channel.name()))?;
        let mut row = vec![state_label.clone(), signal.channel.name().to_string()];
        row.extend(stats);
        rows.push(row);
    }
    write_csv(
        &out.join("summary.csv"),
        &["state", "channel", "count", "mean", "std", "min", "q25", "q50", "q75", "max"],
        rows,
    )?;
    Ok(())
}
