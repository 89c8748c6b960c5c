//! CSV and binary matrix ingestion.
//!
//! Binary layout: `b"LDM1"`, `u32` LE rows, `u32` LE cols, then `rows * cols`
//! `f64` LE values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LDM1";
const HEADER_LEN: usize = 12;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A parsed CSV file: header names plus raw string cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub context: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::invalid(format!("{context}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(Error::EmptyBody(context.to_string()));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::invalid(format!("{context}: {e}")))?;
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            if rec.len() != headers.len() {
                return Err(Error::Ragged {
                    context: context.to_string(),
                    row: i + 1,
                    expected: headers.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(Error::EmptyBody(context.to_string()));
        }
        Ok(Self {
            context: context.to_string(),
            headers,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                context: self.context.clone(),
                column: name.to_string(),
            })
    }

    /// Parse cell `(row, col)` as a finite float; `row` is 0-based.
    pub fn float(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
            context: self.context.clone(),
            row: row + 1,
            column: self.headers[col].clone(),
            value: cell.clone(),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(v)
    }

    pub fn int(&self, row: usize, col: usize) -> Result<i64> {
        let cell = &self.rows[row][col];
        cell.parse().map_err(|_| Error::NonNumeric {
            context: self.context.clone(),
            row: row + 1,
            column: self.headers[col].clone(),
            value: cell.clone(),
        })
    }

    /// Whole table as a numeric matrix.
    pub fn to_matrix(&self) -> Result<Matrix> {
        let mut data = Vec::with_capacity(self.rows.len() * self.headers.len());
        for r in 0..self.rows.len() {
            for c in 0..self.headers.len() {
                data.push(self.float(r, c)?);
            }
        }
        Matrix::new(self.rows.len(), self.headers.len(), data)
    }
}

/// Parse CSV text with a header row into names and a matrix.
pub fn parse_csv_matrix(text: &str, context: &str) -> Result<(Vec<String>, Matrix)> {
    let table = Table::parse(text, context)?;
    let m = table.to_matrix()?;
    Ok((table.headers, m))
}

pub fn read_csv_matrix(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let table = Table::read(path)?;
    let m = table.to_matrix()?;
    Ok((table.headers, m))
}

pub fn write_csv_matrix(path: &Path, names: &[String], m: &Matrix) -> Result<()> {
    fs::write(path, csv_string(names, m)).map_err(io_err(path))
}

/// CSV text with shortest round-trip float formatting.
pub fn csv_string(names: &[String], m: &Matrix) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn encode_bin(m: &Matrix) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for v in m.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_bin(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned();
        return Err(Error::BadMagic(shown));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::ZeroShape { rows, cols });
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = rows * cols * 8;
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::invalid(format!(
            "{} trailing bytes after {rows}x{cols} payload",
            payload.len() - expected
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let m = Matrix::new(rows, cols, data)?;
    if let Some((row, col)) = m.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(m)
}

pub fn save_bin(m: &Matrix, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_bin(m)).map_err(io_err(path))
}

pub fn load_bin(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_bin(&bytes)
}

/// True when the file starts with the binary magic.
pub fn is_bin_file(path: &Path) -> Result<bool> {
    use std::io::Read;
    let mut f = fs::File::open(path).map_err(io_err(path))?;
    let mut head = [0u8; 4];
    let n = f.read(&mut head).map_err(io_err(path))?;
    Ok(n == 4 && &head == MAGIC)
}
