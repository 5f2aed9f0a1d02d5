//! `mixfm perturb`: robustness to test-time feature noise.
//!
//! Each trained arm is scored on noise-corrupted copies of the test
//! split: every nonzero feature gets an independent uniform offset in
//! `[-eps, eps]` and is clamped back to `[0, 1]`. For a given seed and
//! noise level, all arms see the same corrupted copy, so differences
//! between rows come from the models alone. `delta` is the drop from
//! the clean-test AUC, by construction exactly zero at `eps = 0`.

use clap::Args;
use mixfm::augment::train_augmented;
use mixfm::metrics::evaluate;
use mixfm::rng::stream;
use mixfm::sparse::perturb_features;
use mixfm::{Result, TrainConfig};

use crate::commands::sweep::{finish, grid_f64, SweepCommon, SWEEP_HEADER};
use crate::commands::{csv_row, mean_sd, resolve_methods, CsvField, Method};
use crate::config::FileConfig;

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[command(flatten)]
    common: SweepCommon,
    /// Comma-separated noise amplitudes
    #[arg(long)]
    noise_grid: Option<String>,
    /// Comma-separated arms (fm|mixfm|smfm|copyfm)
    #[arg(long)]
    methods: Option<String>,
}

pub fn run(args: PerturbArgs, file: &FileConfig) -> Result<()> {
    let ctx = args.common.resolve(file)?;
    let grid = grid_f64(args.noise_grid, file, "noise_grid", &[0.0, 0.05, 0.1, 0.2])?;
    let methods = resolve_methods(args.methods, file, &[Method::Fm, Method::MixFm])?;

    // clean[m][r] and noisy[m][g][r]: AUC per arm, noise level, seed.
    let mut clean: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    let mut noisy: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); grid.len()]; methods.len()];

    for r in 0..ctx.repeats {
        let cfg_r = TrainConfig {
            seed: ctx.cfg.seed.wrapping_add(r as u64),
            ..ctx.cfg.clone()
        };
        let models = methods
            .iter()
            .map(|m| {
                let mix = m.mix_config(&ctx.mix);
                train_augmented(&ctx.train, &cfg_r, &mix, None, None).map(|(p, _)| p)
            })
            .collect::<Result<Vec<_>>>()?;
        for (mi, model) in models.iter().enumerate() {
            clean[mi].push(evaluate(model, &ctx.test)?.auc);
        }
        let mut noise_rng = stream(cfg_r.seed, "noise");
        for (gi, &eps) in grid.iter().enumerate() {
            if eps == 0.0 {
                for (mi, scores) in clean.iter().enumerate() {
                    noisy[mi][gi].push(*scores.last().expect("clean scored this seed"));
                }
                continue;
            }
            let corrupted = perturb_features(&ctx.test, eps, &mut noise_rng)?;
            for (mi, model) in models.iter().enumerate() {
                noisy[mi][gi].push(evaluate(model, &corrupted)?.auc);
            }
        }
    }

    let mut rows = vec![SWEEP_HEADER.to_string()];
    for (mi, method) in methods.iter().enumerate() {
        let (clean_mean, _) = mean_sd(&clean[mi]);
        for (gi, &eps) in grid.iter().enumerate() {
            let (mean, sd) = mean_sd(&noisy[mi][gi]);
            rows.push(csv_row(&[
                CsvField::Float(eps),
                CsvField::Text(method.label()),
                CsvField::Float(mean),
                CsvField::Float(sd),
                CsvField::Float(clean_mean - mean),
            ]));
        }
    }
    finish(ctx.out.as_deref(), &rows)
}
