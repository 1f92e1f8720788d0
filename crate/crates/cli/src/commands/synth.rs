use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use vibrodiag::signals::{synth_corpus, synth_examples, write_dataset_csv, CorpusCounts};
use vibrodiag::{Channel, DatasetSpec, LabeledExample, StateLabel};

use super::{create, dataset_spec, write_text};
use crate::config::{List, Settings};
use crate::error::{data, CliResult};
use crate::SynthArgs;

fn write_examples(path: &Path, examples: &[LabeledExample]) -> CliResult<()> {
    write_dataset_csv(create(path)?, examples).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn per_state(counts: [usize; 3]) -> serde_json::Value {
    json!({ "nominal": counts[0], "current": counts[1], "defective": counts[2] })
}

fn manifest(spec: &DatasetSpec, files: serde_json::Value) -> serde_json::Value {
    let stats: Vec<_> = StateLabel::ALL
        .iter()
        .flat_map(|&s| {
            Channel::BOTH.iter().map(move |&c| {
                let st = &spec.stats[s.index()][c.index()];
                json!({
                    "state": s.name(),
                    "channel": c.name(),
                    "mean": st.mean,
                    "std": st.std,
                    "harmonic_amplitude": spec.harmonic_amplitudes[s.index()][c.index()],
                })
            })
        })
        .collect();
    json!({
        "seed": spec.seed,
        "frame_len": spec.frame_len,
        "sample_rate": spec.sample_rate,
        "harmonics": spec.harmonics,
        "fundamental_hz": spec.fundamental,
        "generator": stats,
        "files": files,
    })
}

pub fn run(a: SynthArgs, s: &Settings) -> CliResult<()> {
    let template = dataset_spec(&a.signal, s)?;
    let corpus = s.get("corpus", a.corpus.then_some(true), false)?;
    let out: PathBuf = s.get("out", a.out, PathBuf::from(if corpus { "corpus" } else { "dataset.csv" }))?;
    let reference = CorpusCounts::reference();

    if corpus {
        let counts = CorpusCounts {
            train: s.get("train_counts", a.train_counts, List(reference.train.to_vec()))?.exactly("train-counts")?,
            validation: s
                .get("val_counts", a.val_counts, List(reference.validation.to_vec()))?
                .exactly("val-counts")?,
            test: s.get("test_counts", a.test_counts, List(reference.test.to_vec()))?.exactly("test-counts")?,
        };
        let manifest_path = s.get("manifest", a.manifest, out.join("manifest.json"))?;
        s.finish()?;
        template.validate()?;
        let split = synth_corpus(&template, counts)?;
        fs::create_dir_all(&out).map_err(|e| data(format!("cannot create {}: {e}", out.display())))?;
        for (name, examples) in [("train.csv", &split.train), ("val.csv", &split.validation), ("test.csv", &split.test)]
        {
            write_examples(&out.join(name), examples)?;
        }
        let files = json!({
            "train.csv": per_state(counts.train),
            "val.csv": per_state(counts.validation),
            "test.csv": per_state(counts.test),
        });
        write_text(&manifest_path, &serde_json::to_string_pretty(&manifest(&template, files))?)?;
        println!(
            "wrote {} / {} / {} examples to {}",
            split.train.len(),
            split.validation.len(),
            split.test.len(),
            out.display()
        );
    } else {
        let counts = s.get("counts", a.counts, List(reference.totals().to_vec()))?.exactly("counts")?;
        let manifest_path = s.get("manifest", a.manifest, out.with_extension("manifest.json"))?;
        s.finish()?;
        let spec = DatasetSpec { counts, ..template };
        spec.validate()?;
        let examples = synth_examples(&spec)?;
        write_examples(&out, &examples)?;
        let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        write_text(
            &manifest_path,
            &serde_json::to_string_pretty(&manifest(&spec, json!({ name: per_state(counts) })))?,
        )?;
        println!("wrote {} examples to {}", examples.len(), out.display());
    }
    Ok(())
}
