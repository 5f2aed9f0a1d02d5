//! Flat `key = value` experiment manifests.
//!
//! Every hyperparameter a subcommand accepts as a flag can also be set
//! in a config file; explicit flags win. Lines are `key = value`, with
//! `#` comments and blank lines ignored. Unknown keys are rejected to
//! catch typos early.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mixfm::{Error, Result};

/// All keys any subcommand understands. One manifest may drive several
/// commands, so keys a given command ignores are fine; keys nothing
/// understands are not.
const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "batch",
    "beta",
    "blocked",
    "d",
    "d_grid",
    "data",
    "delta",
    "epochs",
    "field_size",
    "fields",
    "input",
    "label",
    "lr",
    "methods",
    "mode",
    "model",
    "n",
    "noise_grid",
    "out",
    "output",
    "p",
    "p_grid",
    "pair_boost",
    "ratio",
    "ratios",
    "repeats",
    "saliency_abs",
    "samples",
    "seed",
    "test",
    "test_pair_fraction",
    "train",
    "truth_d",
    "valid",
    "weight_decay",
];

/// Parsed manifest. `FileConfig::default()` is the empty manifest.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    lineno + 1,
                    0,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::parse(lineno + 1, 0, format!("unknown config key `{key}`")));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::parse(lineno + 1, 0, format!("duplicate config key `{key}`")));
            }
        }
        Ok(FileConfig { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered config key `{key}`");
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::validation(format!("config key `{key}`: cannot parse `{v}`"))
                })
            })
            .transpose()
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => {
                    Err(Error::validation(format!("config key `{key}`: `{other}` is not a bool")))
                }
            })
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse().map_err(|_| {
                            Error::validation(format!(
                                "config key `{key}`: cannot parse list item `{s}`"
                            ))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Comma-separated list given as one CLI flag value.
pub fn parse_flag_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::validation(format!("{what}: bad list item `{s}`"))))
        .collect()
}

/// Flag beats file beats default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag beats file; absence is an error naming the missing key.
pub fn pick_required<T>(flag: Option<T>, file: Option<T>, key: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::validation(format!("missing required `--{key}` (or config key)")))
}
