//! Tabular-to-sparse encoding: one-hot categoricals, multi-hot sets,
//! and min-max scaled numerics, laid out in contiguous per-column blocks.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{Dataset, LabeledExample, SparseVector};

/// Raw tabular input: named columns, rows of string cells.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::validation(format!(
                    "row {i} has {} cells, header has {}",
                    row.len(),
                    columns.len()
                )));
            }
        }
        Ok(RawTable { columns, rows })
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::validation(format!("unknown column `{name}`")))
    }
}

/// What to do with a categorical token absent from the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OovPolicy {
    /// Fail encoding.
    #[default]
    Reject,
    /// Map to a reserved out-of-vocabulary slot at the end of the block.
    Bucket,
}

/// Per-column encoding rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    /// One active slot per row, chosen by the cell's token.
    OneHot {
        vocab: Vec<String>,
        oov: OovPolicy,
    },
    /// Zero or more active slots, tokens separated by `|` in the cell.
    MultiHot {
        vocab: Vec<String>,
        oov: OovPolicy,
    },
    /// Single slot holding `(x - min) / (max - min)` clamped to `[0, 1]`.
    Numeric { min: f64, max: f64 },
}

impl ColumnKind {
    /// Width of this column's slot block.
    pub fn width(&self) -> usize {
        match self {
            ColumnKind::OneHot { vocab, oov } | ColumnKind::MultiHot { vocab, oov } => {
                vocab.len() + usize::from(*oov == OovPolicy::Bucket)
            }
            ColumnKind::Numeric { .. } => 1,
        }
    }
}

/// A named column with its rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Full table-to-features mapping. Slot blocks follow the spec order, so
/// the layout (and therefore every index) is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSchema {
    pub columns: Vec<ColumnSpec>,
}

impl EncodingSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for col in &columns {
            if !seen.insert(col.name.clone()) {
                return Err(Error::validation(format!("duplicate column `{}`", col.name)));
            }
            match &col.kind {
                ColumnKind::OneHot { vocab, .. } | ColumnKind::MultiHot { vocab, .. } => {
                    if vocab.is_empty() {
                        return Err(Error::validation(format!(
                            "column `{}` has an empty vocabulary",
                            col.name
                        )));
                    }
                    let mut toks = std::collections::HashSet::new();
                    for t in vocab {
                        if !toks.insert(t) {
                            return Err(Error::validation(format!(
                                "column `{}` repeats vocabulary token `{t}`",
                                col.name
                            )));
                        }
                    }
                }
                ColumnKind::Numeric { min, max } => {
                    if !(min.is_finite() && max.is_finite()) || min >= max {
                        return Err(Error::validation(format!(
                            "column `{}` needs finite min < max, got [{min}, {max}]",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(EncodingSchema { columns })
    }

    /// Total feature-space width.
    pub fn dim(&self) -> usize {
        self.columns.iter().map(|c| c.kind.width()).sum()
    }

    /// Slot offset of each column block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.columns.len());
        let mut acc = 0;
        for col in &self.columns {
            offs.push(acc);
            acc += col.kind.width();
        }
        offs
    }

    /// Infers a schema from the data: categorical vocabularies in
    /// first-appearance order, numeric ranges from observed min/max.
    /// Columns whose every cell parses as a float become numeric;
    /// cells containing `|` make a column multi-hot.
    pub fn infer(table: &RawTable, skip: &[&str]) -> Result<Self> {
        let mut columns = Vec::new();
        for (ci, name) in table.columns.iter().enumerate() {
            if skip.contains(&name.as_str()) {
                continue;
            }
            let cells: Vec<&str> = table.rows.iter().map(|r| r[ci].as_str()).collect();
            let numeric: Option<Vec<f64>> = cells
                .iter()
                .map(|c| c.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect();
            let kind = if let Some(vals) = numeric.filter(|v| !v.is_empty()) {
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if min < max {
                    ColumnKind::Numeric { min, max }
                } else {
                    // Constant numeric column: treat as a single token.
                    ColumnKind::OneHot {
                        vocab: vec![cells.first().map(|c| c.trim().to_string()).unwrap_or_default()],
                        oov: OovPolicy::Reject,
                    }
                }
            } else {
                let multi = cells.iter().any(|c| c.contains('|'));
                let mut vocab: IndexMap<String, ()> = IndexMap::new();
                for cell in &cells {
                    if multi {
                        for tok in cell.split('|').filter(|t| !t.trim().is_empty()) {
                            vocab.entry(tok.trim().to_string()).or_insert(());
                        }
                    } else {
                        vocab.entry(cell.trim().to_string()).or_insert(());
                    }
                }
                let vocab: Vec<String> = vocab.into_keys().collect();
                if multi {
                    ColumnKind::MultiHot {
                        vocab,
                        oov: OovPolicy::Reject,
                    }
                } else {
                    ColumnKind::OneHot {
                        vocab,
                        oov: OovPolicy::Reject,
                    }
                }
            };
            columns.push(ColumnSpec {
                name: name.clone(),
                kind,
            });
        }
        EncodingSchema::new(columns)
    }

    /// Slot range `[start, end)` occupied by the named column.
    pub fn column_range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let offsets = self.offsets();
        for (col, off) in self.columns.iter().zip(offsets) {
            if col.name == name {
                return Ok(off..off + col.kind.width());
            }
        }
        Err(Error::validation(format!("unknown column `{name}`")))
    }
}

/// Encodes a raw table into a sparse dataset under a schema.
///
/// `label_col` names the column holding 0/1 labels; pass `None` for
/// implicit-feedback data where every row is a positive (label 1).
pub fn encode_records(
    table: &RawTable,
    schema: &EncodingSchema,
    label_col: Option<&str>,
) -> Result<Dataset> {
    let dim = schema.dim();
    let offsets = schema.offsets();
    let label_idx = label_col.map(|name| table.column_index(name)).transpose()?;
    let col_indices: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| table.column_index(&c.name))
        .collect::<Result<_>>()?;
    let mut examples = Vec::with_capacity(table.rows.len());
    for (ri, row) in table.rows.iter().enumerate() {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for ((spec, &off), &ci) in schema.columns.iter().zip(&offsets).zip(&col_indices) {
            let cell = row[ci].trim();
            match &spec.kind {
                ColumnKind::OneHot { vocab, oov } => {
                    let slot = resolve_token(vocab, *oov, cell, &spec.name, ri)?;
                    entries.push(((off + slot) as u32, 1.0));
                }
                ColumnKind::MultiHot { vocab, oov } => {
                    let mut slots: Vec<usize> = Vec::new();
                    for tok in cell.split('|').filter(|t| !t.trim().is_empty()) {
                        slots.push(resolve_token(vocab, *oov, tok.trim(), &spec.name, ri)?);
                    }
                    slots.sort_unstable();
                    slots.dedup();
                    for slot in slots {
                        entries.push(((off + slot) as u32, 1.0));
                    }
                }
                ColumnKind::Numeric { min, max } => {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::validation(format!(
                            "row {ri}, column `{}`: invalid number `{cell}`",
                            spec.name
                        ))
                    })?;
                    let scaled = ((v - min) / (max - min)).clamp(0.0, 1.0);
                    if scaled != 0.0 {
                        entries.push((off as u32, scaled));
                    }
                }
            }
        }
        let y = match label_idx {
            Some(ci) => {
                let cell = row[ci].trim();
                match cell {
                    "0" => 0.0,
                    "1" => 1.0,
                    _ => {
                        return Err(Error::validation(format!(
                            "row {ri}: label `{cell}` is not 0 or 1"
                        )))
                    }
                }
            }
            None => 1.0,
        };
        let x = SparseVector::new(dim, entries)?;
        examples.push(LabeledExample::natural(x, y)?);
    }
    Dataset::new(dim, examples)
}

fn resolve_token(
    vocab: &[String],
    oov: OovPolicy,
    token: &str,
    column: &str,
    row: usize,
) -> Result<usize> {
    match vocab.iter().position(|t| t == token) {
        Some(slot) => Ok(slot),
        None => match oov {
            OovPolicy::Bucket => Ok(vocab.len()),
            OovPolicy::Reject => Err(Error::validation(format!(
                "row {row}, column `{column}`: token `{token}` not in vocabulary"
            ))),
        },
    }
}
