//! Plain-text serialization: one example per line, `label idx:val ...`
//! with 0-based indices, `#`-prefixed comment lines, and an optional
//! `#dim <m>` header pinning the feature-space width.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::{Dataset, LabeledExample, Provenance, SparseVector, MAX_ABS_VALUE};

/// Knobs for the line parser.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Clamp feature values into `[-1, 1]` instead of rejecting them.
    pub clamp_values: bool,
}

/// Parses one `label idx:val ...` line into a labeled example.
///
/// `dim` is the ambient width; every index must be `< dim`. Returns a
/// parse error with a 1-based column offset on malformed input.
pub fn parse_sparse_line(line: &str, dim: usize, opts: ParseOptions) -> Result<LabeledExample> {
    let mut entries: Vec<(u32, f64)> = Vec::new();
    let mut tokens = tokens_with_cols(line);
    let (label_tok, label_col) = tokens
        .next()
        .ok_or_else(|| Error::parse(0, 1, "empty line"))?;
    let y: f64 = label_tok
        .parse()
        .map_err(|_| Error::parse(0, label_col, format!("invalid label `{label_tok}`")))?;
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::parse(0, label_col, format!("label {y} outside [0, 1]")));
    }
    for (tok, col) in tokens {
        let (idx_str, val_str) = tok
            .split_once(':')
            .ok_or_else(|| Error::parse(0, col, format!("expected idx:val, got `{tok}`")))?;
        let idx: u32 = idx_str
            .parse()
            .map_err(|_| Error::parse(0, col, format!("invalid feature index `{idx_str}`")))?;
        let mut val: f64 = val_str.parse().map_err(|_| {
            Error::parse(0, col, format!("invalid feature value `{val_str}`"))
        })?;
        if !val.is_finite() {
            return Err(Error::parse(0, col, format!("non-finite feature value `{val_str}`")));
        }
        if val.abs() > MAX_ABS_VALUE {
            if opts.clamp_values {
                val = val.clamp(-MAX_ABS_VALUE, MAX_ABS_VALUE);
            } else {
                return Err(Error::parse(
                    0,
                    col,
                    format!("feature value {val} outside [-1, 1] (use clamping to accept)"),
                ));
            }
        }
        entries.push((idx, val));
    }
    let x = SparseVector::new(dim, entries).map_err(|e| match e {
        Error::Validation(msg) => Error::parse(0, 1, msg),
        other => other,
    })?;
    LabeledExample::natural(x, y)
}

/// Splits on ASCII whitespace, tracking each token's 1-based column.
fn tokens_with_cols(line: &str) -> impl Iterator<Item = (&str, usize)> {
    let mut rest = line;
    let mut offset = 0usize;
    std::iter::from_fn(move || {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed
            .find(|c: char| c.is_whitespace())
            .unwrap_or(trimmed.len());
        let tok = &trimmed[..end];
        let col = offset + 1;
        rest = &trimmed[end..];
        offset += end;
        Some((tok, col))
    })
}

/// Formats one example in the same syntax the parser accepts.
pub fn format_sparse_line(ex: &LabeledExample) -> String {
    let mut out = String::new();
    if ex.y == ex.y.trunc() && (0.0..=1.0).contains(&ex.y) {
        let _ = write!(out, "{}", ex.y as u8);
    } else {
        let _ = write!(out, "{}", ex.y);
    }
    for (i, v) in ex.x.iter() {
        let _ = write!(out, " {i}:{v}");
    }
    out
}

/// Reads a whole dataset from a reader.
///
/// Blank lines and comment lines are skipped. A `#dim <m>` comment fixes
/// the width; without one the width is one past the largest index seen.
/// A `#mixed` comment marks all following examples as mixed (soft-label
/// files written by the augmentation pipeline).
pub fn read_dataset<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Dataset> {
    let mut raw: Vec<(usize, String)> = Vec::new();
    let mut declared_dim: Option<usize> = None;
    let mut mixed_from: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(d) = comment.strip_prefix("dim") {
                let d = d.trim().parse::<usize>().map_err(|_| {
                    Error::parse(lineno + 1, 1, format!("invalid dim header `{trimmed}`"))
                })?;
                declared_dim = Some(d);
            } else if comment == "mixed" {
                mixed_from = Some(raw.len());
            }
            continue;
        }
        raw.push((lineno + 1, line));
    }
    let dim = match declared_dim {
        Some(d) => d,
        None => {
            let mut max_idx: Option<u32> = None;
            for (lineno, line) in &raw {
                for (tok, col) in tokens_with_cols(line).skip(1) {
                    let idx_str = tok.split_once(':').map(|(i, _)| i).ok_or_else(|| {
                        Error::parse(*lineno, col, format!("expected idx:val, got `{tok}`"))
                    })?;
                    let idx: u32 = idx_str.parse().map_err(|_| {
                        Error::parse(*lineno, col, format!("invalid feature index `{idx_str}`"))
                    })?;
                    max_idx = Some(max_idx.map_or(idx, |m| m.max(idx)));
                }
            }
            max_idx.map_or(0, |m| m as usize + 1)
        }
    };
    let mut examples = Vec::with_capacity(raw.len());
    for (pos, (lineno, line)) in raw.iter().enumerate() {
        let mut ex = parse_sparse_line(line, dim, opts).map_err(|e| e.at_line(*lineno))?;
        if mixed_from.is_some_and(|from| pos >= from) {
            ex.provenance = Provenance::Mixed;
        }
        examples.push(ex);
    }
    Dataset::new(dim, examples)
}

/// Writes a dataset with a `#dim` header; adds `#mixed` before the first
/// mixed example so provenance survives a round trip when mixed examples
/// are written after all natural ones.
pub fn write_dataset<W: Write>(writer: &mut W, data: &Dataset) -> Result<()> {
    writeln!(writer, "#dim {}", data.dim())?;
    let mut mixed_marked = false;
    for ex in data.iter() {
        if ex.provenance == Provenance::Mixed && !mixed_marked {
            writeln!(writer, "#mixed")?;
            mixed_marked = true;
        }
        writeln!(writer, "{}", format_sparse_line(ex))?;
    }
    Ok(())
}
