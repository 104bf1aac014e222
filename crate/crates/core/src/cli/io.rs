//! Output files: full-precision CSV with a config preamble, JSON reports, and
//! HBWF field snapshots.
//!
//! HBWF layout (little-endian): `"HBWF"`, `u32` version, `u32` d, `u32` N,
//! then `N^d` records of eight `f64` (re/im of `m00, m01, m10, m11`). An
//! optional trailer follows: `"HBWFCONF"`, `u64` byte length, UTF-8 text.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{HbkError, Result};
use crate::field::WignerField;
use crate::lattice::TorusGrid;
use crate::spin::SpinMatrix;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"HBWF";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const TRAILER_MAGIC: &[u8; 8] = b"HBWFCONF";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `# `-prefixed preamble lines, then the CSV table.
pub fn write_csv(path: &Path, preamble: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    for line in preamble.lines() {
        writeln!(file, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| HbkError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| HbkError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    writeln!(file)?;
    Ok(())
}

pub fn write_snapshot(path: &Path, field: &WignerField, trailer: Option<&str>) -> Result<()> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(16 + 64 * field.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    for v in [SNAPSHOT_VERSION, grid.dim() as u32, grid.n() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for m in field.iter() {
        for z in [m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]] {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    if let Some(text) = trailer {
        out.extend_from_slice(TRAILER_MAGIC);
        out.extend_from_slice(&(text.len() as u64).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a snapshot and its trailer text, if any.
pub fn read_snapshot(path: &Path) -> Result<(WignerField, Option<String>)> {
    let bad = |message: &str| HbkError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad("missing HBWF header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    if word(1) != SNAPSHOT_VERSION {
        return Err(bad("unsupported version"));
    }
    let grid = TorusGrid::new(word(2) as usize, word(3) as usize)?;
    let body = 64 * grid.len();
    if bytes.len() < 16 + body {
        return Err(bad("truncated records"));
    }
    let f = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    let data = (0..grid.len())
        .map(|k| {
            let base = 16 + 64 * k;
            let z = |j: usize| Complex64::new(f(base + 16 * j), f(base + 16 * j + 8));
            SpinMatrix::new(z(0), z(1), z(2), z(3))
        })
        .collect();
    let rest = &bytes[16 + body..];
    let trailer = if rest.is_empty() {
        None
    } else {
        if rest.len() < 16 || &rest[..8] != TRAILER_MAGIC {
            return Err(bad("unrecognized trailing bytes"));
        }
        let len = u64::from_le_bytes(rest[8..16].try_into().expect("8 bytes")) as usize;
        let text = rest.get(16..16 + len).ok_or_else(|| bad("truncated trailer"))?;
        Some(String::from_utf8(text.to_vec()).map_err(|_| bad("trailer is not UTF-8"))?)
    };
    Ok((WignerField::new(grid, data)?, trailer))
}
