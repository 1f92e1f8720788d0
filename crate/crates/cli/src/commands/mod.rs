pub mod analyze;
pub mod evaluate;
pub mod predict;
pub mod stream;
pub mod synth;
pub mod train;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use vibrodiag::signals::{read_dataset_csv, DEFAULT_HARMONIC_LEVEL, DEFAULT_SAMPLE_RATE};
use vibrodiag::{DatasetSpec, LabeledExample};

use crate::config::Settings;
use crate::error::{data, CliResult};
use crate::SignalArgs;

pub const DEFAULT_FRAME_LEN: usize = 4096;

/// Generator settings shared by `synth` and `analyze`; counts are left at zero.
pub fn dataset_spec(a: &SignalArgs, s: &Settings) -> CliResult<DatasetSpec> {
    let seed = s.get("seed", a.seed, 0)?;
    let mut spec = DatasetSpec::with_counts([0; 3], seed);
    spec.frame_len = s.get("frame_len", a.frame_len, DEFAULT_FRAME_LEN)?;
    spec.sample_rate = s.get("sample_rate", a.sample_rate, DEFAULT_SAMPLE_RATE)?;
    spec.harmonics = s.get("harmonics", a.harmonics, true)?;
    let level = s.get("harmonic_level", a.harmonic_level, DEFAULT_HARMONIC_LEVEL)?;
    spec.harmonic_amplitudes = spec.stats.map(|row| row.map(|st| st.std * level));
    Ok(spec)
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| data(format!("cannot open {}: {e}", path.display())))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> CliResult<Vec<LabeledExample>> {
    read_dataset_csv(open(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Writes a CSV with the given header and rows.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
