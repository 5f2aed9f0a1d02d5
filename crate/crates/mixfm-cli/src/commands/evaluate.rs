//! `mixfm evaluate`: score a checkpoint on a dataset.

use std::path::PathBuf;

use clap::Args;
use mixfm::metrics::evaluate;
use mixfm::{Error, Result};

use crate::commands::{load_dataset, load_model};
use crate::config::{pick_required, FileConfig};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Model checkpoint
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dataset to score (sparse format)
    #[arg(long)]
    data: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs, file: &FileConfig) -> Result<()> {
    let model_path = pick_required(args.model, file.get_path("model"), "model")?;
    let data_path = pick_required(args.data, file.get_path("data"), "data")?;
    let params = load_model(&model_path)?;
    let data = load_dataset(&data_path)?;
    let report = evaluate(&params, &data)
        .map_err(|e| e.in_context(&data_path.display().to_string()))?;
    let json = serde_json::to_string(&report).map_err(|e| Error::validation(e.to_string()))?;
    println!("{json}");
    Ok(())
}
