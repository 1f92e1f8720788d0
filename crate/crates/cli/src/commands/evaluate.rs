use std::path::{Path, PathBuf};

use serde_json::json;
use vibrodiag::evaluation::{confusion_matrix, render_report, ClassificationReport};
use vibrodiag::neuralnet::load_model;
use vibrodiag::stream::check_model;
use vibrodiag::{Model, StateLabel};

use super::{open, read_dataset, write_csv, write_text};
use crate::config::Settings;
use crate::error::{data, usage, CliResult};
use crate::EvaluateArgs;

/// Reads a `truth,prediction` CSV.
fn read_predictions(path: &Path) -> CliResult<(Vec<StateLabel>, Vec<StateLabel>)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header = r.headers()?.clone();
    if header.len() != 2 || &header[0] != "truth" || &header[1] != "prediction" {
        return Err(data(format!("{}: header must be truth,prediction", path.display())));
    }
    let (mut truths, mut preds) = (Vec::new(), Vec::new());
    for (i, record) in r.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| data(format!("{}: row {row}: {e}", path.display())))?;
        let label = |k: usize| -> CliResult<StateLabel> {
            record[k].parse().map_err(|e| data(format!("{}: row {row}: {e}", path.display())))
        };
        truths.push(label(0)?);
        preds.push(label(1)?);
    }
    Ok((truths, preds))
}

pub fn run(a: EvaluateArgs, s: &Settings) -> CliResult<()> {
    let predictions: Option<PathBuf> = s.opt("predictions", a.predictions)?;
    let model_path: Option<PathBuf> = s.opt("model", a.model)?;
    let test_path: Option<PathBuf> = s.opt("test", a.test)?;
    let confusion_path = s.get("confusion", a.confusion, PathBuf::from("confusion.csv"))?;
    let json_path: Option<PathBuf> = s.opt("json", a.json)?;
    s.finish()?;

    let (truths, preds) = match (predictions, model_path, test_path) {
        (Some(p), None, None) => read_predictions(&p)?,
        (None, Some(m), Some(t)) => {
            let model: Model = load_model(&m)?;
            check_model(&model)?;
            let examples = read_dataset(&t)?;
            let preds =
                examples.iter().map(|e| model.predict(&e.features).map(|p| p.label)).collect::<Result<Vec<_>, _>>()?;
            (examples.iter().map(|e| e.label).collect(), preds)
        }
        _ => return Err(usage("give either --predictions, or both --model and --test")),
    };
    if truths.is_empty() {
        return Err(data("no examples to evaluate"));
    }

    let cm = confusion_matrix(&truths, &preds)?;
    let report = ClassificationReport::from_matrix(&cm);
    print!("{}", render_report(&report));
    println!();
    println!("accuracy {:.4} ({}/{})", report.overall_accuracy, cm.trace(), cm.total());

    write_csv(
        &confusion_path,
        &["truth", "nominal", "current", "defective"],
        StateLabel::ALL.iter().map(|&t| {
            std::iter::once(t.name().to_string())
                .chain(cm.counts[t.index()].iter().map(|c| c.to_string()))
                .collect::<Vec<_>>()
        }),
    )?;
    if let Some(path) = json_path {
        let doc = json!({ "report": report, "confusion": cm.counts });
        write_text(&path, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}
