//! `imfkit`: estimate, apply and evaluate intensity mapping functions, and
//! build differently exposed panoramas.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use imfkit_core::synth::CurveKind;
use imfkit_core::Method;

use crate::commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "imfkit", version, about = "Intensity mapping functions between differently exposed images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate per-channel tables mapping --src intensities to --ref intensities.
    Estimate(EstimateArgs),
    /// Map an image through per-channel tables.
    Apply(ApplyArgs),
    /// Evaluate estimators over a directory of image pairs under simulated misalignment.
    Sweep(SweepArgs),
    /// Build benchmark panoramas from a stitch spec and fuse them.
    Stitch(StitchArgs),
    /// Generate synthetic exposure pairs or triples with ground truth.
    Synthgen(SynthgenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for imfkit_core::table::TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => imfkit_core::table::TableFormat::Csv,
            Format::Json => imfkit_core::table::TableFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    src: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Crop this many rows/columns asymmetrically from each image first.
    #[arg(long, default_value_t = 0)]
    nc: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Keep the raw estimate (possibly partial) instead of completing it.
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    /// A JSON bundle, or a directory of channel_<c>.csv files.
    #[arg(long)]
    tables: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Output PNG.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Directory with one subdirectory per image pair.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,6,8,10,12,14,16")]
    nc_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "wha,chm,gc")]
    methods: Vec<Method>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Skip SSIM (written as NaN).
    #[arg(long)]
    no_ssim: bool,
}

#[derive(Args, Debug)]
struct StitchArgs {
    /// Stitch spec JSON.
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Write only the fused panorama.
    #[arg(long)]
    no_intermediates: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Pair,
    Triple,
}

#[derive(Args, Debug)]
struct SynthgenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Curve family for pairs: gamma, sigmoid, shift or affine.
    #[arg(long, default_value = "gamma")]
    curve: CurveKind,
    /// Fix the curve's main parameter instead of drawing it.
    #[arg(long)]
    param: Option<f64>,
    /// Standard deviation of the additive noise, in levels.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = Kind::Pair)]
    kind: Kind,
    /// Pair width and height, or tile height for triples.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("IMFKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("IMFKIT_THREADS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("IMFKIT_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Apply(a) => commands::apply(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Stitch(a) => commands::stitch(a),
        Command::Synthgen(a) => commands::synthgen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error chain on one line, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.contains(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}
