//! `sdd`: batch front end for the detector. Subcommands generate synthetic
//! scenes, compute saliency maps, run detection, and score the results.
//!
//! Exit codes: 0 success, 1 I/O or input error, 2 usage or configuration
//! error, 3 a cube failed during detection.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod io;
pub mod records;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sdd", version, about = "Infrared small-target detection by sparse differential directionality")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic scene: frames/ (8-bit PGM) and gt.csv.
    Synth(SynthArgs),
    /// Write per-frame ASCE saliency maps as 16-bit PNG.
    Asce(AsceArgs),
    /// Detect targets in a sequence.
    Detect(DetectArgs),
    /// Score separated target images against ground truth.
    Eval(EvalArgs),
    /// Sweep a threshold over score images and write the ROC curve.
    Roc(RocArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene recipe (key = value).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AsceArgs {
    /// Raw cube file or directory of frames.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.5)]
    pub sigma: f64,
    /// Corner, coherence and edge weights.
    #[arg(long, default_value = "1,1,1")]
    pub alpha: String,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Configuration file (key = value).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Original sequence.
    #[arg(long)]
    pub orig: PathBuf,
    /// Separated target sequence.
    #[arg(long)]
    pub target: PathBuf,
    /// Side of the target box centered on each ground-truth point.
    #[arg(long = "box", default_value_t = 5)]
    pub box_size: usize,
    /// Neighborhood width around the target box.
    #[arg(long, default_value_t = sdd_core::metrics::DEFAULT_NEIGHBORHOOD)]
    pub d: usize,
    #[arg(long, default_value_t = sdd_core::metrics::DEFAULT_OMEGA)]
    pub omega: f64,
    /// Both sequences are multiplied by this before scoring (8-bit scale).
    #[arg(long, default_value_t = 255.0)]
    pub scale: f64,
    /// Hit window around a ground-truth point.
    #[arg(long, default_value_t = sdd_core::metrics::DEFAULT_ROC_WINDOW)]
    pub window: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Score sequence (directory of frames or raw cube file).
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = sdd_core::metrics::DEFAULT_ROC_WINDOW)]
    pub window: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Sizes the global rayon pool from `SDD_THREADS` (unset or 0 = automatic).
fn configure_threads() -> Result<(), config::ConfigError> {
    let Ok(raw) = std::env::var("SDD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| config::ConfigError(format!("SDD_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<config::ConfigError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<sdd_core::Error>() {
        Some(sdd_core::Error::SolverFailure { .. } | sdd_core::Error::CubeFailure { .. }) => EXIT_SOLVER,
        _ => EXIT_FAILURE,
    }
}

/// The error chain on one line. Causes already quoted by an outer message
/// (core errors embed their source) are not repeated.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Asce(a) => commands::asce(a),
        Command::Detect(a) => commands::detect(a),
        Command::Eval(a) => commands::eval(a),
        Command::Roc(a) => commands::roc(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            exit_code(&e)
        }
    }
}
