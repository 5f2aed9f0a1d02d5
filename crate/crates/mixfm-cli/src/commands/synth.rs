//! `mixfm synth`: planted-pair synthetic splits plus recorded truth.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use mixfm::sparse::write_dataset;
use mixfm::synth::{generate, SynthSpec};
use mixfm::{Error, Result};

use crate::commands::ensure_dir;
use crate::config::{pick, pick_required, FileConfig};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory for train.txt, valid.txt, test.txt, truth.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Total examples across the three splits
    #[arg(long)]
    n: Option<usize>,
    /// Fields per example (one active feature each)
    #[arg(long)]
    fields: Option<usize>,
    /// Features per field
    #[arg(long)]
    field_size: Option<usize>,
    /// Number of planted blocked pairs
    #[arg(long)]
    blocked: Option<usize>,
    /// Fraction of test examples forced to activate a blocked pair
    #[arg(long)]
    test_pair_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Embedding width of the generating model
    #[arg(long)]
    truth_d: Option<usize>,
    /// Log-odds added per jointly active blocked pair
    #[arg(long)]
    pair_boost: Option<f64>,
}

pub fn run(args: SynthArgs, file: &FileConfig) -> Result<()> {
    let out = pick_required(args.out, file.get_path("out"), "out")?;
    let defaults = SynthSpec::default();
    let spec = SynthSpec {
        n: pick(args.n, file.get("n")?, defaults.n),
        fields: pick(args.fields, file.get("fields")?, defaults.fields),
        field_size: pick(args.field_size, file.get("field_size")?, defaults.field_size),
        n_blocked: pick(args.blocked, file.get("blocked")?, defaults.n_blocked),
        test_pair_fraction: pick(
            args.test_pair_fraction,
            file.get("test_pair_fraction")?,
            defaults.test_pair_fraction,
        ),
        seed: pick(args.seed, file.get("seed")?, defaults.seed),
        truth_embed_dim: pick(args.truth_d, file.get("truth_d")?, defaults.truth_embed_dim),
        pair_boost: pick(args.pair_boost, file.get("pair_boost")?, defaults.pair_boost),
        ..defaults
    };
    let output = generate(&spec)?;
    ensure_dir(&out)?;
    for (name, data) in [
        ("train.txt", &output.train),
        ("valid.txt", &output.valid),
        ("test.txt", &output.test),
    ] {
        let mut writer = BufWriter::new(File::create(out.join(name))?);
        write_dataset(&mut writer, data)?;
    }
    let mut json = serde_json::to_string_pretty(&output.truth)
        .map_err(|e| Error::validation(e.to_string()))?;
    json.push('\n');
    std::fs::write(out.join("truth.json"), json)?;
    println!(
        "wrote {}/{}/{} examples ({} features, {} blocked pairs) -> {}",
        output.train.len(),
        output.valid.len(),
        output.test.len(),
        output.truth.dim,
        output.truth.blocked_pairs.len(),
        out.display()
    );
    Ok(())
}
