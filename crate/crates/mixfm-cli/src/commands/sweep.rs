//! Grid experiments. Each sweep trains across `repeats` seeds per grid
//! point, scores the held-out split, and tabulates
//! `x,method,mean_auc,sd_auc,delta` rows into `sweep.csv`. The baseline
//! grid point is trained once and its rows reused, so its delta is
//! exactly zero rather than zero up to rounding.

use std::path::{Path, PathBuf};

use clap::Args;
use mixfm::augment::{train_augmented, MixConfig, MixMode};
use mixfm::metrics::evaluate;
use mixfm::theory::gamma_of;
use mixfm::{Dataset, Error, Result, TrainConfig};

use crate::commands::{
    csv_row, ensure_dir, load_aligned, mean_sd, out_path, resolve_methods, write_text, CsvField,
    Method, MixOpts, TrainOpts, SWEEP_FILE,
};
use crate::config::{parse_flag_list, pick, pick_required, FileConfig};

/// Flags every sweep shares.
#[derive(Args, Debug)]
pub struct SweepCommon {
    /// Natural training split
    #[arg(long)]
    train: Option<PathBuf>,
    /// Held-out split scored after training
    #[arg(long)]
    test: Option<PathBuf>,
    /// Directory receiving sweep.csv; stdout only when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Independent trainings per grid point, seeded seed..seed+repeats-1
    #[arg(long)]
    repeats: Option<usize>,
    #[command(flatten)]
    train_opts: TrainOpts,
    #[command(flatten)]
    mix_opts: MixOpts,
}

pub struct SweepContext {
    pub train: Dataset,
    pub test: Dataset,
    pub out: Option<PathBuf>,
    pub repeats: usize,
    pub cfg: TrainConfig,
    pub mix: MixConfig,
}

impl SweepCommon {
    pub fn resolve(self, file: &FileConfig) -> Result<SweepContext> {
        let train_path = pick_required(self.train, file.get_path("train"), "train")?;
        let test_path = pick_required(self.test, file.get_path("test"), "test")?;
        let mut sets = load_aligned(&[Some(&train_path), Some(&test_path)])?.into_iter();
        let train = sets.next().flatten().expect("train split loads");
        let test = sets.next().flatten().expect("test split loads");
        let cfg = self.train_opts.resolve(file)?;
        let mix = self.mix_opts.resolve(file, train.len())?;
        let repeats = pick(self.repeats, file.get("repeats")?, 10);
        if repeats == 0 {
            return Err(Error::validation("repeats must be at least 1"));
        }
        Ok(SweepContext {
            train,
            test,
            out: self.out.or(file.get_path("out")),
            repeats,
            cfg,
            mix,
        })
    }
}

/// Test AUC (and trained capacity) for each repetition of one arm.
pub struct ArmStats {
    pub aucs: Vec<f64>,
    pub gammas: Vec<f64>,
}

pub fn run_arm(ctx: &SweepContext, cfg: &TrainConfig, mix: &MixConfig) -> Result<ArmStats> {
    let mut aucs = Vec::with_capacity(ctx.repeats);
    let mut gammas = Vec::with_capacity(ctx.repeats);
    for r in 0..ctx.repeats {
        let cfg_r = TrainConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..cfg.clone()
        };
        let (params, _) = train_augmented(&ctx.train, &cfg_r, mix, None, None)?;
        aucs.push(evaluate(&params, &ctx.test)?.auc);
        gammas.push(gamma_of(&params));
    }
    Ok(ArmStats { aucs, gammas })
}

pub const SWEEP_HEADER: &str = "x,method,mean_auc,sd_auc,delta";

pub(crate) fn finish(out: Option<&Path>, rows: &[String]) -> Result<()> {
    let text = rows.join("\n") + "\n";
    print!("{text}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_text(&out_path(dir, SWEEP_FILE), &text)?;
    }
    Ok(())
}

pub(crate) fn grid_f64(
    flag: Option<String>,
    file: &FileConfig,
    key: &'static str,
    default: &[f64],
) -> Result<Vec<f64>> {
    let mut grid = match flag {
        Some(raw) => parse_flag_list(&raw, key)?,
        None => file.get_list::<f64>(key)?.unwrap_or_else(|| default.to_vec()),
    };
    if grid.is_empty() {
        return Err(Error::validation(format!("{key}: empty grid")));
    }
    for &x in &grid {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::validation(format!(
                "{key}: grid value {x} must be finite and non-negative"
            )));
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    grid.dedup();
    Ok(grid)
}

fn grid_usize(
    flag: Option<String>,
    file: &FileConfig,
    key: &'static str,
    default: &[usize],
    min: usize,
) -> Result<Vec<usize>> {
    let mut grid = match flag {
        Some(raw) => parse_flag_list(&raw, key)?,
        None => file.get_list::<usize>(key)?.unwrap_or_else(|| default.to_vec()),
    };
    if grid.is_empty() {
        return Err(Error::validation(format!("{key}: empty grid")));
    }
    for &x in &grid {
        if x < min {
            return Err(Error::validation(format!("{key}: grid value {x} must be >= {min}")));
        }
    }
    grid.sort_unstable();
    grid.dedup();
    Ok(grid)
}

// ---------------------------------------------------------------------
// sweep-ratio: mixing benefit as the augmented set grows.

#[derive(Args, Debug)]
pub struct SweepRatioArgs {
    #[command(flatten)]
    common: SweepCommon,
    /// Comma-separated augmented-to-natural size ratios
    #[arg(long)]
    ratios: Option<String>,
}

pub fn run_ratio(args: SweepRatioArgs, file: &FileConfig) -> Result<()> {
    let ctx = args.common.resolve(file)?;
    let grid = grid_f64(args.ratios, file, "ratios", &[0.0, 0.25, 0.5, 1.0, 2.0])?;
    let n = ctx.train.len();

    let unaugmented = MixConfig {
        mode: MixMode::None,
        n_prime: 0,
        ..ctx.mix
    };
    let baseline = mean_sd(&run_arm(&ctx, &ctx.cfg, &unaugmented)?.aucs);

    let mut rows = vec![SWEEP_HEADER.to_string()];
    for &ratio in &grid {
        let (label, (mean, sd)) = if ratio == 0.0 {
            ("fm", baseline)
        } else {
            let mix = MixConfig {
                mode: MixMode::Mix,
                n_prime: (ratio * n as f64).round() as usize,
                ..ctx.mix
            };
            ("mixfm", mean_sd(&run_arm(&ctx, &ctx.cfg, &mix)?.aucs))
        };
        rows.push(csv_row(&[
            CsvField::Float(ratio),
            CsvField::Text(label),
            CsvField::Float(mean),
            CsvField::Float(sd),
            CsvField::Float(mean - baseline.0),
        ]));
    }
    finish(ctx.out.as_deref(), &rows)
}

// ---------------------------------------------------------------------
// sweep-neighbors: saliency benefit as the candidate pool grows.

#[derive(Args, Debug)]
pub struct SweepNeighborsArgs {
    #[command(flatten)]
    common: SweepCommon,
    /// Comma-separated candidate counts
    #[arg(long)]
    p_grid: Option<String>,
}

pub fn run_neighbors(args: SweepNeighborsArgs, file: &FileConfig) -> Result<()> {
    let ctx = args.common.resolve(file)?;
    let grid = grid_usize(args.p_grid, file, "p_grid", &[1, 2, 5, 10], 1)?;

    // One candidate means no selection pressure: the p = 1 arm is the
    // plain-mixing baseline, bit for bit.
    let single = MixConfig {
        mode: MixMode::Saliency,
        p: 1,
        ..ctx.mix
    };
    let baseline = mean_sd(&run_arm(&ctx, &ctx.cfg, &single)?.aucs);

    let mut rows = vec![SWEEP_HEADER.to_string()];
    for &p in &grid {
        let (mean, sd) = if p == 1 {
            baseline
        } else {
            let mix = MixConfig {
                mode: MixMode::Saliency,
                p,
                ..ctx.mix
            };
            mean_sd(&run_arm(&ctx, &ctx.cfg, &mix)?.aucs)
        };
        rows.push(csv_row(&[
            CsvField::Int(p),
            CsvField::Text("smfm"),
            CsvField::Float(mean),
            CsvField::Float(sd),
            CsvField::Float(mean - baseline.0),
        ]));
    }
    finish(ctx.out.as_deref(), &rows)
}

// ---------------------------------------------------------------------
// sweep-embedding: capacity and accuracy as the embedding widens.

#[derive(Args, Debug)]
pub struct SweepEmbeddingArgs {
    #[command(flatten)]
    common: SweepCommon,
    /// Comma-separated embedding widths
    #[arg(long)]
    d_grid: Option<String>,
    /// Comma-separated arms (fm|mixfm|smfm|copyfm)
    #[arg(long)]
    methods: Option<String>,
}

pub fn run_embedding(args: SweepEmbeddingArgs, file: &FileConfig) -> Result<()> {
    let ctx = args.common.resolve(file)?;
    let grid = grid_usize(args.d_grid, file, "d_grid", &[2, 4, 8, 16], 1)?;
    let methods = resolve_methods(args.methods, file, &[Method::Fm, Method::MixFm])?;

    // The trained embedding norm rides along so capacity growth is
    // visible next to the accuracy it buys.
    let mut rows = vec![format!("{SWEEP_HEADER},mean_gamma")];
    for method in methods {
        let mix = method.mix_config(&ctx.mix);
        let mut first_mean = None;
        for &d in &grid {
            let cfg = TrainConfig {
                embed_dim: d,
                ..ctx.cfg.clone()
            };
            let stats = run_arm(&ctx, &cfg, &mix)?;
            let (mean, sd) = mean_sd(&stats.aucs);
            let (mean_gamma, _) = mean_sd(&stats.gammas);
            let base = *first_mean.get_or_insert(mean);
            rows.push(csv_row(&[
                CsvField::Int(d),
                CsvField::Text(method.label()),
                CsvField::Float(mean),
                CsvField::Float(sd),
                CsvField::Float(mean - base),
                CsvField::Float(mean_gamma),
            ]));
        }
    }
    finish(ctx.out.as_deref(), &rows)
}
