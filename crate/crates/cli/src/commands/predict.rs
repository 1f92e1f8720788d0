use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use vibrodiag::dsp::{extract_features, FeatureVector};
use vibrodiag::neuralnet::load_model;
use vibrodiag::signals::{ingest_interleaved_pcm, ingest_pcm, DEFAULT_FULL_SCALE_VOLTS, DEFAULT_SAMPLE_RATE};
use vibrodiag::stream::check_model;
use vibrodiag::{Channel, FramePair, Model};

use crate::config::{List, Settings};
use crate::error::{data, usage, CliResult};
use crate::PredictArgs;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))
}

pub fn run(a: PredictArgs, s: &Settings) -> CliResult<()> {
    let model_path: PathBuf = s.get("model", a.model, PathBuf::from("model.json"))?;
    let features: Option<List<f64>> = s.opt("features", a.features)?;
    let pcm: Option<PathBuf> = s.opt("pcm", a.pcm)?;
    let acoustic: Option<PathBuf> = s.opt("acoustic", a.acoustic)?;
    let vibration: Option<PathBuf> = s.opt("vibration", a.vibration)?;
    let rate = s.get("sample_rate", a.sample_rate, DEFAULT_SAMPLE_RATE)?;
    let full_scale = s.get("full_scale", a.full_scale, DEFAULT_FULL_SCALE_VOLTS)?;
    s.finish()?;

    let features = match (features, pcm, acoustic, vibration) {
        (Some(List(values)), None, None, None) => {
            FeatureVector::from_slice(&values).map_err(|e| usage(format!("--features: {e}")))?
        }
        (None, Some(path), None, None) => {
            let (ac, vib) = ingest_interleaved_pcm(&read(&path)?, rate, full_scale)?;
            extract_features(&FramePair::new(ac, vib, None)?)?
        }
        (None, None, Some(ac), Some(vib)) => {
            let ac = ingest_pcm(&read(&ac)?, Channel::Acoustic, rate, full_scale)?;
            let vib = ingest_pcm(&read(&vib)?, Channel::Vibration, rate, full_scale)?;
            extract_features(&FramePair::new(ac, vib, None)?)?
        }
        _ => return Err(usage("give one input: --features, --pcm, or --acoustic with --vibration")),
    };

    let model: Model = load_model(&model_path)?;
    check_model(&model)?;
    let prediction = model.predict(&features)?;
    println!("{}", json!({ "label": prediction.label.name(), "probs": prediction.probs }));
    Ok(())
}
