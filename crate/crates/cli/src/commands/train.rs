use std::path::PathBuf;

use vibrodiag::neuralnet::{save_model, train, AdamConfig, ModelArchitecture, TrainConfig};
use vibrodiag::signals::split_dataset;
use vibrodiag::{DataSplit, Model};

use super::{read_dataset, write_csv};
use crate::config::{List, Settings};
use crate::error::{usage, CliResult};
use crate::TrainArgs;

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(a: TrainArgs, s: &Settings) -> CliResult<()> {
    let data = s.opt("data", a.data)?;
    let train_path: Option<PathBuf> = s.opt("train", a.train)?;
    let val_path: Option<PathBuf> = s.opt("val", a.val)?;
    let ratios = s.get("split", a.split, List(vec![0.7, 0.1, 0.2]))?.exactly::<3>("split")?;
    let model_path = s.get("model", a.model, PathBuf::from("model.json"))?;
    let default_history = model_path.with_file_name("history.csv");
    let history_path = s.get("history", a.history, default_history)?;
    let seed = s.get("seed", a.seed, 0)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        epochs: s.get("epochs", a.epochs, defaults.epochs)?,
        batch_size: s.get("batch_size", a.batch_size, defaults.batch_size)?,
        seed,
        shuffle: true,
        adam: AdamConfig { alpha: s.get("learning_rate", a.learning_rate, defaults.adam.alpha)?, ..defaults.adam },
    };
    let arch = ModelArchitecture {
        hidden: s.get("hidden", a.hidden, List(ModelArchitecture::default().hidden))?.0,
        ..ModelArchitecture::default()
    };
    s.finish()?;

    if config.epochs == 0 || config.batch_size == 0 {
        return Err(usage("epochs and batch size must be at least 1"));
    }
    if !(config.adam.alpha > 0.0 && config.adam.alpha.is_finite()) {
        return Err(usage("learning rate must be positive"));
    }
    arch.validate()?;

    let split = match (data, train_path) {
        (Some(_), Some(_)) => return Err(usage("give either --data or --train, not both")),
        (None, None) => return Err(usage("missing training data: --train or --data")),
        (Some(path), None) => {
            if val_path.is_some() {
                return Err(usage("--val cannot be combined with --data"));
            }
            split_dataset(&read_dataset(&path)?, ratios, seed)?
        }
        (None, Some(path)) => DataSplit {
            train: read_dataset(&path)?,
            validation: match val_path {
                Some(v) => read_dataset(&v)?,
                None => Vec::new(),
            },
            test: Vec::new(),
        },
    };

    let mut model = Model::new(arch, seed)?;
    let history = train(&mut model, &split, &config)?;
    save_model(&model, &model_path)?;
    write_csv(
        &history_path,
        &["epoch", "train_loss", "train_acc", "val_loss", "val_acc"],
        history.records.iter().map(|r| {
            [
                r.epoch.to_string(),
                r.train_loss.to_string(),
                r.train_accuracy.to_string(),
                opt_cell(r.val_loss),
                opt_cell(r.val_accuracy),
            ]
        }),
    )?;

    let last = history.records.last().expect("at least one epoch");
    print!("epoch {}: train_loss {:.4} train_acc {:.4}", last.epoch, last.train_loss, last.train_accuracy);
    if let (Some(l), Some(acc)) = (last.val_loss, last.val_accuracy) {
        print!(" val_loss {l:.4} val_acc {acc:.4}");
    }
    if !split.test.is_empty() {
        let correct = split
            .test
            .iter()
            .map(|e| model.predict(&e.features).map(|p| p.label == e.label))
            .collect::<Result<Vec<bool>, _>>()?
            .into_iter()
            .filter(|&ok| ok)
            .count();
        print!(" test_acc {:.4}", correct as f64 / split.test.len() as f64);
    }
    println!();
    println!("model written to {}", model_path.display());
    Ok(())
}
