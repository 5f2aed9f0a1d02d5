//! `mixfm train`: full training run with per-epoch curves and a final
//! checkpoint.

use std::path::PathBuf;

use clap::Args;
use mixfm::augment::{train_augmented, EpochRecord};
use mixfm::metrics::EvalReport;
#[cfg(test)]
use mixfm::Error;
use mixfm::Result;

use crate::commands::{
    ensure_dir, load_aligned, out_path, save_model, write_text, CsvField, MixOpts, TrainOpts,
    CURVES_FILE, MODEL_FILE,
};
use crate::config::{pick_required, FileConfig};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training split (sparse format)
    #[arg(long)]
    train: Option<PathBuf>,
    /// Validation split, scored each epoch
    #[arg(long)]
    valid: Option<PathBuf>,
    /// Test split, scored each epoch
    #[arg(long)]
    test: Option<PathBuf>,
    /// Output directory for curves.csv and model.ckpt
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    train_opts: TrainOpts,
    #[command(flatten)]
    mix_opts: MixOpts,
}

pub fn run(args: TrainArgs, file: &FileConfig) -> Result<()> {
    let train_path = pick_required(args.train, file.get_path("train"), "train")?;
    let valid_path = args.valid.or_else(|| file.get_path("valid"));
    let test_path = args.test.or_else(|| file.get_path("test"));
    let out = pick_required(args.out, file.get_path("out"), "out")?;

    let mut sets = load_aligned(&[
        Some(&train_path),
        valid_path.as_deref(),
        test_path.as_deref(),
    ])?;
    let test = sets.pop().unwrap();
    let valid = sets.pop().unwrap();
    let train = sets.pop().unwrap().expect("train split is required");

    let cfg = args.train_opts.resolve(file)?;
    let mix = args.mix_opts.resolve(file, train.len())?;

    let (params, history) = train_augmented(&train, &cfg, &mix, valid.as_ref(), test.as_ref())?;

    ensure_dir(&out)?;
    write_text(&out_path(&out, CURVES_FILE), &render_curves(&history))?;
    save_model(&out_path(&out, MODEL_FILE), &params)?;

    if let Some(last) = history.last() {
        let report = last.test.as_ref().or(last.valid.as_ref()).unwrap_or(&last.train);
        println!(
            "trained {} epochs; final auc {:.6}, logloss {:.6} -> {}",
            history.len(),
            report.auc,
            report.logloss,
            out.display()
        );
    }
    Ok(())
}

/// `epoch,split,auc,logloss,seconds` rows; the seconds column is
/// wall-clock and excluded from determinism guarantees.
pub fn render_curves(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,split,auc,logloss,seconds\n");
    for rec in history {
        let splits: [(&str, Option<&EvalReport>); 3] = [
            ("train", Some(&rec.train)),
            ("valid", rec.valid.as_ref()),
            ("test", rec.test.as_ref()),
        ];
        for (name, report) in splits {
            let Some(report) = report else { continue };
            out.push_str(&crate::commands::csv_row(&[
                CsvField::Int(rec.epoch),
                CsvField::Text(name),
                CsvField::Float(report.auc),
                CsvField::Float(report.logloss),
                CsvField::Float(rec.seconds),
            ]));
            out.push('\n');
        }
    }
    out
}

/// Strips the wall-clock column so reruns can be compared bytewise.
#[cfg(test)]
pub fn curves_without_timing(csv: &str) -> Result<String> {
    let mut out = String::new();
    for line in csv.lines() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::validation(format!("malformed curves row `{line}`")));
        }
        out.push_str(&fields[..4].join(","));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_column_is_stripped() {
        let csv = "epoch,split,auc,logloss,seconds\n1,train,0.5,0.7,0.123\n";
        let stripped = curves_without_timing(csv).unwrap();
        assert_eq!(stripped, "epoch,split,auc,logloss\n1,train,0.5,0.7\n");
        assert!(curves_without_timing("a,b\n").is_err());
    }
}
