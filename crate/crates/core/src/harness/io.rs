//! Binary matrix and vector files.
//!
//! Layout, all little-endian: 4-byte magic `RKMX`, `u32` format version,
//! `u64` row count, `u64` column count, then the entries as `f64` in
//! row-major order. Vectors are single-column matrices. Writes are
//! byte-deterministic: the same data always produces the same file.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RealVector};

const MAGIC: [u8; 4] = *b"RKMX";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: u64 = 24;
/// Refuse absurd headers before allocating for them.
const MAX_ENTRIES: u64 = 1 << 28;

fn format_error(offset: u64, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

/// Writes a matrix; any existing file is replaced.
pub fn write_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN as usize + 8 * a.data().len());
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for &v in a.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// Writes a vector as a single-column matrix.
pub fn write_vector(path: impl AsRef<Path>, v: &RealVector) -> Result<()> {
    write_matrix(
        path,
        &DenseMatrix::new(v.len(), 1, v.as_slice().to_vec())?,
    )
}

/// Reads a matrix, validating the header and that the payload length
/// matches it exactly.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN as usize];
    let mut got = 0usize;
    while got < header.len() {
        match reader.read(&mut header[got..])? {
            0 => {
                return Err(format_error(
                    got as u64,
                    format!("file ends inside the {HEADER_LEN}-byte header"),
                ));
            }
            n => got += n,
        }
    }
    if header[..4] != MAGIC {
        return Err(format_error(0, "not a matrix file (bad magic)"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("fixed slice"));
    if version != FORMAT_VERSION {
        return Err(format_error(
            4,
            format!("unsupported format version {version} (expected {FORMAT_VERSION})"),
        ));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().expect("fixed slice"));
    let cols = u64::from_le_bytes(header[16..24].try_into().expect("fixed slice"));
    if rows == 0 {
        return Err(format_error(8, "row count is zero"));
    }
    if cols == 0 {
        return Err(format_error(16, "column count is zero"));
    }
    let entries = rows
        .checked_mul(cols)
        .filter(|&e| e <= MAX_ENTRIES)
        .ok_or_else(|| format_error(8, format!("{rows} x {cols} entries exceed the size cap")))?;
    let expected = 8 * entries;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    let actual = payload.len() as u64;
    if actual < expected {
        return Err(format_error(
            HEADER_LEN + actual,
            format!("payload has {actual} bytes, header promises {expected}"),
        ));
    }
    if actual > expected {
        return Err(format_error(
            HEADER_LEN + expected,
            format!("{} trailing bytes after the payload", actual - expected),
        ));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("fixed chunk")))
        .collect();
    DenseMatrix::new(rows as usize, cols as usize, data)
}

/// Reads a vector; the file must hold exactly one column.
pub fn read_vector(path: impl AsRef<Path>) -> Result<RealVector> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(format_error(
            16,
            format!("expected a single-column file, found {} columns", m.cols()),
        ));
    }
    RealVector::new(m.data().to_vec())
}
