//! Versioned binary model checkpoints.
//!
//! Layout (all little-endian): magic `FMCK`, format version u32, `m`
//! u64, `d` u64, then `w0`, `w`, `V` as f64, and finally an FNV-1a
//! checksum of everything before it. The checksum catches truncated or
//! corrupted files before a model silently evaluates garbage.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::FmParams;
use crate::rng::fnv1a64;

const MAGIC: &[u8; 4] = b"FMCK";
const VERSION: u32 = 1;

/// Serializes a model to a writer.
pub fn save_checkpoint<W: Write>(writer: &mut W, params: &FmParams) -> Result<()> {
    let mut buf = Vec::with_capacity(4 + 4 + 16 + 8 * (1 + params.w.len() + params.v.len()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(params.dim as u64).to_le_bytes());
    buf.extend_from_slice(&(params.embed_dim as u64).to_le_bytes());
    buf.extend_from_slice(&params.w0.to_le_bytes());
    for x in &params.w {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for x in &params.v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let checksum = fnv1a64(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    writer.write_all(&buf)?;
    Ok(())
}

/// Deserializes a model, verifying magic, version, shapes and checksum.
pub fn load_checkpoint<R: Read>(reader: &mut R) -> Result<FmParams> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    if buf.len() < 4 + 4 + 16 + 8 + 8 {
        return Err(Error::validation("checkpoint file is truncated"));
    }
    let (body, tail) = buf.split_at(buf.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    if fnv1a64(body) != stored {
        return Err(Error::validation("checkpoint checksum mismatch"));
    }
    if &body[0..4] != MAGIC {
        return Err(Error::validation("not a model checkpoint (bad magic)"));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::validation(format!(
            "unsupported checkpoint version {version} (expected {VERSION})"
        )));
    }
    let dim = u64::from_le_bytes(body[8..16].try_into().expect("8 bytes")) as usize;
    let embed_dim = u64::from_le_bytes(body[16..24].try_into().expect("8 bytes")) as usize;
    let expected = 24 + 8 * (1 + dim + dim * embed_dim);
    if body.len() != expected {
        return Err(Error::validation(format!(
            "checkpoint payload is {} bytes, header implies {expected}",
            body.len()
        )));
    }
    let mut floats = body[24..].chunks_exact(8).map(|c| {
        f64::from_le_bytes(c.try_into().expect("8 bytes"))
    });
    let w0 = floats.next().expect("w0 present");
    let w: Vec<f64> = floats.by_ref().take(dim).collect();
    let v: Vec<f64> = floats.collect();
    FmParams::new(dim, embed_dim, w0, w, v)
}
