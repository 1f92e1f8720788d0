//! `vibrodiag` command-line tool.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{List, Settings};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "vibrodiag", version, about = "Vibroacoustic condition diagnosis of rotating machinery")]
struct Cli {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise a labelled feature dataset.
    Synth(SynthArgs),
    /// Train a classifier on a feature dataset.
    Train(TrainArgs),
    /// Score a model or a predictions file and print a classification report.
    Evaluate(EvaluateArgs),
    /// Descriptive statistics, ACF, ESD, Q-Q and histogram data for a signal.
    Analyze(AnalyzeArgs),
    /// Classify a single frame pair or feature vector.
    Predict(PredictArgs),
    /// Classify a binary frame stream from stdin or TCP, one JSON line per frame.
    Stream(StreamArgs),
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    /// Samples per frame (power of two).
    #[arg(long)]
    pub frame_len: Option<usize>,
    /// Sampling rate in Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Rotor harmonics in synthetic signals (true/false).
    #[arg(long)]
    pub harmonics: Option<bool>,
    /// Harmonic tone amplitude as a fraction of the channel std.
    #[arg(long)]
    pub harmonic_level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output CSV, or output directory with --corpus.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Frame pairs per state: nominal,current,defective.
    #[arg(long)]
    pub counts: Option<List<usize>>,
    /// Write train.csv, val.csv and test.csv into --out.
    #[arg(long)]
    pub corpus: bool,
    #[arg(long)]
    pub train_counts: Option<List<usize>>,
    #[arg(long)]
    pub val_counts: Option<List<usize>>,
    #[arg(long)]
    pub test_counts: Option<List<usize>>,
    /// Manifest path (default: next to the output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub signal: SignalArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation CSV.
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Single CSV to split by --split instead of --train/--val.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Train,validation,test fractions for --data.
    #[arg(long)]
    pub split: Option<List<f64>>,
    /// Output model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output history CSV (default: history.csv next to the model).
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Hidden layer widths.
    #[arg(long)]
    pub hidden: Option<List<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labelled test CSV, scored with --model.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// CSV of `truth,prediction` pairs, instead of --model/--test.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Confusion matrix output.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    /// Optional JSON report output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Headerless 16-bit little-endian PCM input.
    #[arg(long)]
    pub pcm: Option<PathBuf>,
    /// PCM holds interleaved acoustic,vibration samples.
    #[arg(long)]
    pub interleaved: bool,
    /// Channel of a mono PCM file: acoustic or vibration.
    #[arg(long)]
    pub channel: Option<String>,
    /// Synthesise frames of this state instead of reading PCM.
    #[arg(long)]
    pub state: Option<String>,
    /// Number of synthetic frames.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Peak voltage at PCM full scale.
    #[arg(long)]
    pub full_scale: Option<f64>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub signal: SignalArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Twelve comma-separated feature values.
    #[arg(long)]
    pub features: Option<List<f64>>,
    /// Interleaved two-channel PCM frame.
    #[arg(long)]
    pub pcm: Option<PathBuf>,
    /// Mono acoustic PCM, with --vibration.
    #[arg(long)]
    pub acoustic: Option<PathBuf>,
    /// Mono vibration PCM, with --acoustic.
    #[arg(long)]
    pub vibration: Option<PathBuf>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub full_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Listen on this TCP address instead of reading stdin.
    #[arg(long)]
    pub listen: Option<String>,
    #[arg(long)]
    pub min_frame_len: Option<usize>,
    #[arg(long)]
    pub max_frame_len: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub full_scale: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => commands::synth::run(a, &settings),
        Command::Train(a) => commands::train::run(a, &settings),
        Command::Evaluate(a) => commands::evaluate::run(a, &settings),
        Command::Analyze(a) => commands::analyze::run(a, &settings),
        Command::Predict(a) => commands::predict::run(a, &settings),
        Command::Stream(a) => commands::stream::run(a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
