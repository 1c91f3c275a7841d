//! Embedding sidecar: little-endian, `b"MEVE"`, `u32` dimension, `u64` row
//! count, then `count * dim` `f32` values. Row `i` belongs to the `i`-th
//! caption record.

use std::io::{Read, Write};
use std::path::Path;

use crate::bench::CaptionRecord;

use super::{open, IoError};

pub const EMBEDDING_MAGIC: [u8; 4] = *b"MEVE";
const MAX_DIM: usize = 1 << 20;

fn short(what: &str) -> IoError {
    IoError::Embedding(format!("truncated file while reading {what}"))
}

pub fn read_embeddings<R: Read>(mut reader: R) -> Result<Vec<Vec<f32>>, IoError> {
    let mut header = [0u8; 16];
    reader.read_exact(&mut header).map_err(|_| short("header"))?;
    if header[..4] != EMBEDDING_MAGIC {
        return Err(IoError::Embedding("bad magic, expected \"MEVE\"".into()));
    }
    let dim = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    let count = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    if dim > MAX_DIM {
        return Err(IoError::Embedding(format!("dimension {dim} exceeds {MAX_DIM}")));
    }
    if dim == 0 && count > 0 {
        return Err(IoError::Embedding("dimension 0 with non-empty rows".into()));
    }
    let count = usize::try_from(count).map_err(|_| IoError::Embedding("row count overflows".into()))?;
    let mut rows = Vec::new();
    let mut row = vec![0u8; dim * 4];
    for i in 0..count {
        reader
            .read_exact(&mut row)
            .map_err(|_| short(&format!("row {i}")))?;
        rows.push(
            row.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                .collect(),
        );
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest).map_err(|e| IoError::Embedding(e.to_string()))? != 0 {
        return Err(IoError::Embedding("trailing bytes after the last row".into()));
    }
    Ok(rows)
}

pub fn write_embeddings<W: Write>(mut out: W, rows: &[Vec<f32>]) -> Result<(), IoError> {
    let dim = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(IoError::Embedding("rows differ in dimension".into()));
    }
    let dim32 = u32::try_from(dim).map_err(|_| IoError::Embedding("dimension overflows u32".into()))?;
    let werr = |e: std::io::Error| IoError::Embedding(e.to_string());
    out.write_all(&EMBEDDING_MAGIC).map_err(werr)?;
    out.write_all(&dim32.to_le_bytes()).map_err(werr)?;
    out.write_all(&(rows.len() as u64).to_le_bytes()).map_err(werr)?;
    for r in rows {
        for x in r {
            out.write_all(&x.to_le_bytes()).map_err(werr)?;
        }
    }
    out.flush().map_err(werr)
}

/// Loads the sidecar at `path` and assigns row `i` to `records[i]`.
pub fn attach_embeddings(records: &mut [CaptionRecord], path: &Path) -> Result<(), IoError> {
    let rows = read_embeddings(open(path)?)?;
    if rows.len() != records.len() {
        return Err(IoError::Embedding(format!(
            "{} rows for {} caption records",
            rows.len(),
            records.len()
        )));
    }
    for (r, e) in records.iter_mut().zip(rows) {
        r.embedding = Some(e);
    }
    Ok(())
}
