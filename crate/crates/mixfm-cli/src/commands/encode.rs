//! `mixfm encode`: CSV table to sparse features.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use clap::Args;
use mixfm::sparse::{encode_records, write_dataset, ColumnKind, EncodingSchema, OovPolicy, RawTable};
use mixfm::{Error, Result};

use crate::config::{pick_required, FileConfig};

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output sparse dataset file
    #[arg(long)]
    output: Option<PathBuf>,
    /// Label column name; omit for unlabeled data (labels default to 1)
    #[arg(long, default_value = "label")]
    label: String,
    /// Treat the table as unlabeled
    #[arg(long)]
    no_label: bool,
    /// Columns to drop entirely (comma-separated)
    #[arg(long, value_delimiter = ',')]
    skip: Vec<String>,
    /// Load a previously saved schema instead of inferring one
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Write the schema used (inferred or loaded) as JSON
    #[arg(long)]
    schema_out: Option<PathBuf>,
    /// Map unknown categorical tokens to a reserved bucket slot
    #[arg(long)]
    oov_bucket: bool,
}

pub fn run(args: EncodeArgs, file: &FileConfig) -> Result<()> {
    let input = pick_required(args.input, file.get_path("input"), "input")?;
    let output = pick_required(args.output, file.get_path("output"), "output")?;

    let table = read_csv(&input)?;
    let label = if args.no_label { None } else { Some(args.label.as_str()) };

    let mut schema = match &args.schema {
        Some(path) => {
            let reader = BufReader::new(File::open(path)?);
            serde_json::from_reader(reader)
                .map_err(|e| Error::validation(format!("{}: bad schema: {e}", path.display())))?
        }
        None => {
            let mut skip: Vec<&str> = args.skip.iter().map(String::as_str).collect();
            if let Some(label) = label {
                skip.push(label);
            }
            EncodingSchema::infer(&table, &skip)?
        }
    };
    if args.oov_bucket {
        set_oov(&mut schema, OovPolicy::Bucket);
    }

    let data = encode_records(&table, &schema, label)
        .map_err(|e| e.in_context(&input.display().to_string()))?;

    let mut out = BufWriter::new(File::create(&output)?);
    write_dataset(&mut out, &data)?;
    if let Some(path) = &args.schema_out {
        let mut json = serde_json::to_string_pretty(&schema)
            .map_err(|e| Error::validation(e.to_string()))?;
        json.push('\n');
        std::fs::write(path, json)?;
    }
    println!(
        "encoded {} rows into {} features -> {}",
        data.len(),
        data.dim(),
        output.display()
    );
    Ok(())
}

fn set_oov(schema: &mut EncodingSchema, policy: OovPolicy) {
    for col in &mut schema.columns {
        match &mut col.kind {
            ColumnKind::OneHot { oov, .. } | ColumnKind::MultiHot { oov, .. } => *oov = policy,
            ColumnKind::Numeric { .. } => {}
        }
    }
}

fn read_csv(path: &std::path::Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> =
        reader.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        rows.push(record.iter().map(String::from).collect());
    }
    RawTable::new(header, rows).map_err(|e| e.in_context(&path.display().to_string()))
}

fn csv_error(path: &std::path::Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!("is_io_error guaranteed an I/O kind"),
        }
    } else {
        let line = err.position().map_or(0, |p| p.line() as usize);
        Error::parse(line, 0, format!("{}: {err}", path.display()))
    }
}
