//! `mixfm`: train and probe sparse factorization machines with
//! mixup-style augmentation.
//!
//! Exit codes: 0 success, 1 validation or parse error, 2 I/O error,
//! 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use mixfm::Error;

use crate::config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "mixfm", version, about = "Sparse factorization machines with mixup augmentation")]
struct Cli {
    /// Flat `key = value` config file; explicit flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a CSV table of categorical/numeric columns into sparse features
    Encode(commands::encode::EncodeArgs),
    /// Generate synthetic splits with planted never-co-occurring pairs
    Synth(commands::synth::SynthArgs),
    /// Train a model, optionally with per-epoch augmentation
    Train(commands::train::TrainArgs),
    /// Score a checkpoint on a dataset (AUC / LogLoss)
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Write one augmentation batch to a sparse file
    Augment(commands::augment::AugmentArgs),
    /// Emit generalization-gap reports for a checkpoint
    Bound(commands::bound::BoundArgs),
    /// AUC improvement versus augmented-set size
    SweepRatio(commands::sweep::SweepRatioArgs),
    /// AUC delta versus saliency candidate count
    SweepNeighbors(commands::sweep::SweepNeighborsArgs),
    /// AUC and embedding norm versus embedding width, per method
    SweepEmbedding(commands::sweep::SweepEmbeddingArgs),
    /// AUC drop under test-time feature noise, per method
    Perturb(commands::perturb::PerturbArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Validation(_) | Error::DimMismatch { .. } => 1,
        Error::Io(_) => 2,
        Error::NonFinite(_) => 3,
    }
}

fn run(cli: Cli) -> mixfm::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Encode(args) => commands::encode::run(args, &file),
        Command::Synth(args) => commands::synth::run(args, &file),
        Command::Train(args) => commands::train::run(args, &file),
        Command::Evaluate(args) => commands::evaluate::run(args, &file),
        Command::Augment(args) => commands::augment::run(args, &file),
        Command::Bound(args) => commands::bound::run(args, &file),
        Command::SweepRatio(args) => commands::sweep::run_ratio(args, &file),
        Command::SweepNeighbors(args) => commands::sweep::run_neighbors(args, &file),
        Command::SweepEmbedding(args) => commands::sweep::run_embedding(args, &file),
        Command::Perturb(args) => commands::perturb::run(args, &file),
    }
}
