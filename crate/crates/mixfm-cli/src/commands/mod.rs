//! Subcommand implementations and shared plumbing.

pub mod augment;
pub mod bound;
pub mod encode;
pub mod evaluate;
pub mod perturb;
pub mod sweep;
pub mod synth;
pub mod train;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use mixfm::augment::{MixConfig, MixMode};
use mixfm::model::{load_checkpoint, save_checkpoint};
use mixfm::sparse::{read_dataset, ParseOptions};
use mixfm::{Dataset, Error, FmParams, LabeledExample, Result, SparseVector, TrainConfig};

use crate::config::{pick, FileConfig};

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_dataset(BufReader::new(file), ParseOptions::default())
        .map_err(|e| e.in_context(&path.display().to_string()))
}

/// Loads several splits and widens them to a common dimension, so files
/// written with inferred (header-free) widths still line up.
pub fn load_aligned(paths: &[Option<&Path>]) -> Result<Vec<Option<Dataset>>> {
    let mut sets: Vec<Option<Dataset>> = paths
        .iter()
        .map(|p| p.map(load_dataset).transpose())
        .collect::<Result<_>>()?;
    let dim = sets.iter().flatten().map(Dataset::dim).max().unwrap_or(0);
    for set in sets.iter_mut().flatten() {
        if set.dim() != dim {
            *set = widen(set, dim)?;
        }
    }
    Ok(sets)
}

fn widen(data: &Dataset, dim: usize) -> Result<Dataset> {
    let examples = data
        .iter()
        .map(|ex| {
            LabeledExample::new(
                SparseVector::new(dim, ex.x.iter().collect())?,
                ex.y,
                ex.provenance,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(dim, examples)
}

pub fn load_model(path: &Path) -> Result<FmParams> {
    let file = File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    load_checkpoint(&mut BufReader::new(file))
}

pub fn save_model(path: &Path, params: &FmParams) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    save_checkpoint(&mut out, params)?;
    out.flush()?;
    Ok(())
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Training hyperparameters shared by every training-backed command.
#[derive(Args, Debug, Clone, Default)]
pub struct TrainOpts {
    /// Training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minibatch size
    #[arg(long)]
    pub batch: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Embedding width
    #[arg(long)]
    pub d: Option<usize>,
    /// L2 penalty on linear weights and embeddings
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Master seed; all randomness derives from it
    #[arg(long)]
    pub seed: Option<u64>,
}

impl TrainOpts {
    pub fn resolve(&self, file: &FileConfig) -> Result<TrainConfig> {
        let defaults = TrainConfig::default();
        let cfg = TrainConfig {
            epochs: pick(self.epochs, file.get("epochs")?, defaults.epochs),
            batch_size: pick(self.batch, file.get("batch")?, defaults.batch_size),
            learning_rate: pick(self.lr, file.get("lr")?, defaults.learning_rate),
            embed_dim: pick(self.d, file.get("d")?, defaults.embed_dim),
            weight_decay: pick(self.weight_decay, file.get("weight_decay")?, defaults.weight_decay),
            seed: pick(self.seed, file.get("seed")?, defaults.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Augmentation knobs shared by train, augment and the sweeps.
#[derive(Args, Debug, Clone, Default)]
pub struct MixOpts {
    /// Augmentation mode
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// First Beta shape for the mixing coefficient
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Second Beta shape
    #[arg(long)]
    pub beta: Option<f64>,
    /// Augmented set size as a fraction of the natural set
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Candidate neighbors per parent in saliency mode
    #[arg(long)]
    pub p: Option<usize>,
    /// Rank saliency candidates by absolute value
    #[arg(long)]
    pub saliency_abs: bool,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    None,
    Copy,
    Mix,
    Saliency,
}

impl From<ModeArg> for MixMode {
    fn from(m: ModeArg) -> MixMode {
        match m {
            ModeArg::None => MixMode::None,
            ModeArg::Copy => MixMode::Copy,
            ModeArg::Mix => MixMode::Mix,
            ModeArg::Saliency => MixMode::Saliency,
        }
    }
}

pub fn parse_mode(raw: &str) -> Result<MixMode> {
    match raw {
        "none" => Ok(MixMode::None),
        "copy" => Ok(MixMode::Copy),
        "mix" => Ok(MixMode::Mix),
        "saliency" => Ok(MixMode::Saliency),
        other => Err(Error::validation(format!(
            "unknown mode `{other}` (expected none|copy|mix|saliency)"
        ))),
    }
}

impl MixOpts {
    /// `n` is the natural training-set size the ratio applies to.
    pub fn resolve(&self, file: &FileConfig, n: usize) -> Result<MixConfig> {
        let defaults = MixConfig::default();
        let mode = match self.mode {
            Some(m) => MixMode::from(m),
            None => match file.get::<String>("mode")? {
                Some(raw) => parse_mode(&raw)?,
                None => MixMode::None,
            },
        };
        let ratio = pick(self.ratio, file.get("ratio")?, 1.0);
        if !(ratio >= 0.0 && ratio.is_finite()) {
            return Err(Error::validation(format!("ratio {ratio} must be non-negative")));
        }
        let cfg = MixConfig {
            alpha: pick(self.alpha, file.get("alpha")?, defaults.alpha),
            beta: pick(self.beta, file.get("beta")?, defaults.beta),
            n_prime: (ratio * n as f64).round() as usize,
            p: pick(self.p, file.get("p")?, defaults.p),
            mode,
            saliency_abs: self.saliency_abs || file.get_bool("saliency_abs")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A named experimental arm of the A/B harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fm,
    MixFm,
    SmFm,
    CopyFm,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Fm => "fm",
            Method::MixFm => "mixfm",
            Method::SmFm => "smfm",
            Method::CopyFm => "copyfm",
        }
    }

    pub fn parse(raw: &str) -> Result<Method> {
        match raw {
            "fm" => Ok(Method::Fm),
            "mixfm" => Ok(Method::MixFm),
            "smfm" => Ok(Method::SmFm),
            "copyfm" => Ok(Method::CopyFm),
            other => Err(Error::validation(format!(
                "unknown method `{other}` (expected fm|mixfm|smfm|copyfm)"
            ))),
        }
    }

    pub fn mode(self) -> MixMode {
        match self {
            Method::Fm => MixMode::None,
            Method::MixFm => MixMode::Mix,
            Method::SmFm => MixMode::Saliency,
            Method::CopyFm => MixMode::Copy,
        }
    }

    /// The method's mix settings derived from the shared knobs.
    pub fn mix_config(self, base: &MixConfig) -> MixConfig {
        MixConfig {
            mode: self.mode(),
            // Plain mixing is the saliency procedure with one candidate.
            p: if self == Method::SmFm { base.p } else { 1 },
            ..*base
        }
    }
}

/// Method list from a `--methods a,b` flag or the `methods` config key;
/// the caller supplies the default arms.
pub fn resolve_methods(
    flag: Option<String>,
    file: &FileConfig,
    default: &[Method],
) -> Result<Vec<Method>> {
    let raw = match flag {
        Some(raw) => Some(raw),
        None => file.get::<String>("methods")?,
    };
    let methods = match raw {
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Method::parse)
            .collect::<Result<Vec<_>>>()?,
        None => default.to_vec(),
    };
    if methods.is_empty() {
        return Err(Error::validation("need at least one method"));
    }
    let mut seen = Vec::new();
    for m in &methods {
        if seen.contains(m) {
            return Err(Error::validation(format!("method `{}` listed twice", m.label())));
        }
        seen.push(*m);
    }
    Ok(methods)
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One CSV row; floats use the shortest round-trip form.
pub fn csv_row(fields: &[CsvField]) -> String {
    let rendered: Vec<String> = fields
        .iter()
        .map(|f| match f {
            CsvField::Text(s) => (*s).to_string(),
            CsvField::Int(i) => i.to_string(),
            CsvField::Float(x) => x.to_string(),
        })
        .collect();
    rendered.join(",")
}

pub enum CsvField<'a> {
    Text(&'a str),
    Int(usize),
    Float(f64),
}

/// Output file names shared by commands and asserted by tests.
pub const CURVES_FILE: &str = "curves.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const BOUND_FILE: &str = "bound.json";
pub const MODEL_FILE: &str = "model.ckpt";

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
