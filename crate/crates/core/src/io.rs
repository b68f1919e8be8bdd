//! Matrix and vector files.
//!
//! CSV: one matrix row per line, comma separated, `.` decimal point. Vectors
//! are written one entry per line.
//!
//! Binary: a 16-byte header (`LPQM` or `LPQV`, u32 rows, u32 cols, 4 reserved
//! zero bytes) followed by rows·cols little-endian f64 values in row-major
//! order. Vectors use `LPQV` with cols = 1.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

pub const MATRIX_MAGIC: &[u8; 4] = b"LPQM";
pub const VECTOR_MAGIC: &[u8; 4] = b"LPQV";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad file format: {0}")]
    Format(String),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

pub fn write_matrix_csv<W: Write>(w: W, a: &DMatrix<f64>) -> IoResult<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..a.nrows() {
        out.write_record(a.row(i).iter().map(|v| format!("{v:e}")))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> IoResult<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(format_err(format!("row {rows} has {} fields, expected {c}", rec.len())));
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| format_err(format!("row {rows}: cannot parse {field:?}")))?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, cols.unwrap_or(0), &data))
}

pub fn write_vector_csv<W: Write>(w: W, v: &DVector<f64>) -> IoResult<()> {
    write_matrix_csv(w, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

pub fn read_vector_csv<R: Read>(r: R) -> IoResult<DVector<f64>> {
    let m = read_matrix_csv(r)?;
    if m.ncols() > 1 {
        return Err(format_err(format!("expected one column, got {}", m.ncols())));
    }
    Ok(DVector::from_column_slice(m.as_slice()))
}

fn write_bin<W: Write>(mut w: W, magic: &[u8; 4], rows: usize, cols: usize, row_major: impl Iterator<Item = f64>) -> IoResult<()> {
    let dim = |n: usize| u32::try_from(n).map_err(|_| format_err(format!("dimension {n} exceeds u32")));
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(magic);
    header[4..8].copy_from_slice(&dim(rows)?.to_le_bytes());
    header[8..12].copy_from_slice(&dim(cols)?.to_le_bytes());
    w.write_all(&header)?;
    for v in row_major {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_bin<R: Read>(mut r: R, magic: &[u8; 4]) -> IoResult<(usize, usize, Vec<f64>)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[..4] != magic {
        return Err(format_err(format!(
            "magic {:?}, expected {:?}",
            String::from_utf8_lossy(&header[..4]),
            String::from_utf8_lossy(magic)
        )));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| format_err("dimension product overflows"))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(format_err(format!("payload has {} bytes, expected {}", bytes.len(), len * 8)));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, data))
}

pub fn write_matrix_bin<W: Write>(w: W, a: &DMatrix<f64>) -> IoResult<()> {
    let (rows, cols) = a.shape();
    write_bin(w, MATRIX_MAGIC, rows, cols, (0..rows).flat_map(|i| (0..cols).map(move |j| a[(i, j)])))
}

pub fn read_matrix_bin<R: Read>(r: R) -> IoResult<DMatrix<f64>> {
    let (rows, cols, data) = read_bin(r, MATRIX_MAGIC)?;
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_vector_bin<W: Write>(w: W, v: &DVector<f64>) -> IoResult<()> {
    write_bin(w, VECTOR_MAGIC, v.len(), 1, v.iter().copied())
}

pub fn read_vector_bin<R: Read>(r: R) -> IoResult<DVector<f64>> {
    let (rows, cols, data) = read_bin(r, VECTOR_MAGIC)?;
    if cols != 1 {
        return Err(format_err(format!("vector file has {cols} columns")));
    }
    Ok(DVector::from_vec(data).rows(0, rows).into_owned())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a matrix, choosing CSV for a `.csv` extension and binary otherwise.
pub fn load_matrix(path: impl AsRef<Path>) -> IoResult<DMatrix<f64>> {
    let path = path.as_ref();
    let f = BufReader::new(File::open(path)?);
    if is_csv(path) {
        read_matrix_csv(f)
    } else {
        read_matrix_bin(f)
    }
}

pub fn load_vector(path: impl AsRef<Path>) -> IoResult<DVector<f64>> {
    let path = path.as_ref();
    let f = BufReader::new(File::open(path)?);
    if is_csv(path) {
        read_vector_csv(f)
    } else {
        read_vector_bin(f)
    }
}

pub fn save_matrix(path: impl AsRef<Path>, a: &DMatrix<f64>) -> IoResult<()> {
    let path = path.as_ref();
    let f = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_matrix_csv(f, a)
    } else {
        write_matrix_bin(f, a)
    }
}

pub fn save_vector(path: impl AsRef<Path>, v: &DVector<f64>) -> IoResult<()> {
    let path = path.as_ref();
    let f = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_vector_csv(f, v)
    } else {
        write_vector_bin(f, v)
    }
}
