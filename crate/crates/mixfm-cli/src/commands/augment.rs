//! `mixfm augment`: materialize one epoch's augmentation batch.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use mixfm::augment::{copy_augment, generate_mix_batch, generate_salient_batch, MixMode};
use mixfm::rng::stream;
use mixfm::sparse::write_dataset;
use mixfm::{Error, FmParams, Result};

use crate::commands::{load_dataset, load_model, MixOpts, TrainOpts};
use crate::config::{pick_required, FileConfig};

#[derive(Args, Debug)]
pub struct AugmentArgs {
    /// Natural examples to draw parents from
    #[arg(long)]
    train: Option<PathBuf>,
    /// Output sparse file for the augmented batch
    #[arg(long)]
    output: Option<PathBuf>,
    /// Checkpoint scoring saliency candidates; a fresh seeded
    /// initialization is used when absent
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    train_opts: TrainOpts,
    #[command(flatten)]
    mix_opts: MixOpts,
}

pub fn run(args: AugmentArgs, file: &FileConfig) -> Result<()> {
    let train_path = pick_required(args.train, file.get_path("train"), "train")?;
    let output = pick_required(args.output, file.get_path("output"), "output")?;
    let data = load_dataset(&train_path)?;
    let cfg = args.train_opts.resolve(file)?;
    let mut mix = args.mix_opts.resolve(file, data.len())?;
    if mix.mode == MixMode::None {
        mix.mode = MixMode::Mix;
    }

    // The same stream the trainer uses for its first epoch, so a dump
    // previews exactly what training would see.
    let mut rng = stream(cfg.seed, "mix");
    let batch = match mix.mode {
        MixMode::None => unreachable!("mode rewritten above"),
        MixMode::Copy => copy_augment(&data, mix.n_prime, &mut rng)?,
        MixMode::Mix => generate_mix_batch(&data, &mix, &mut rng)?,
        MixMode::Saliency => {
            let params = match &args.model {
                Some(path) => load_model(path)?,
                None => FmParams::init(data.dim(), cfg.embed_dim, &mut stream(cfg.seed, "init"))?,
            };
            if params.dim() != data.dim() {
                return Err(Error::DimMismatch { expected: data.dim(), got: params.dim() });
            }
            generate_salient_batch(&params, &data, &mix, &mut rng)?
        }
    };

    let mut out = BufWriter::new(File::create(&output)?);
    write_dataset(&mut out, &batch)?;
    println!("wrote {} augmented examples -> {}", batch.len(), output.display());
    Ok(())
}
