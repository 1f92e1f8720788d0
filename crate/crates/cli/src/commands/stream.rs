use std::io::{self, BufReader, BufWriter};
use std::net::TcpListener;
use std::path::PathBuf;

use vibrodiag::neuralnet::load_model;
use vibrodiag::stream::{check_model, classify_stream, StreamConfig, StreamSummary};
use vibrodiag::Model;

use crate::config::Settings;
use crate::error::{data, CliResult};
use crate::StreamArgs;

fn report(summary: &StreamSummary) {
    eprintln!(
        "frames {} errors {} mean latency {:.0} us max {:.0} us",
        summary.frames, summary.errors, summary.mean_latency_us, summary.max_latency_us
    );
}

pub fn run(a: StreamArgs, s: &Settings) -> CliResult<()> {
    let model_path: PathBuf = s.get("model", a.model, PathBuf::from("model.json"))?;
    let listen: Option<String> = s.opt("listen", a.listen)?;
    let defaults = StreamConfig::default();
    let config = StreamConfig {
        min_frame_len: s.get("min_frame_len", a.min_frame_len, defaults.min_frame_len)?,
        max_frame_len: s.get("max_frame_len", a.max_frame_len, defaults.max_frame_len)?,
        sample_rate: s.get("sample_rate", a.sample_rate, defaults.sample_rate)?,
        full_scale_volts: s.get("full_scale", a.full_scale, defaults.full_scale_volts)?,
    };
    s.finish()?;
    config.validate()?;

    let model: Model = load_model(&model_path)?;
    check_model(&model)?;

    match listen {
        None => {
            let summary = classify_stream(&model, BufReader::new(io::stdin().lock()), io::stdout().lock(), config)?;
            report(&summary);
        }
        Some(addr) => {
            let listener = TcpListener::bind(&addr).map_err(|e| data(format!("cannot listen on {addr}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr()?);
            // One connection at a time; each gets its own frame numbering.
            for conn in listener.incoming() {
                let conn = conn?;
                let peer = conn.peer_addr()?;
                eprintln!("connection from {peer}");
                match classify_stream(&model, BufReader::new(conn), BufWriter::new(io::stdout().lock()), config) {
                    Ok(summary) => report(&summary),
                    Err(e) => eprintln!("connection from {peer} ended: {e}"),
                }
            }
        }
    }
    Ok(())
}
