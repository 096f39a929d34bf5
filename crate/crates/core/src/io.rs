//! Deterministic data emission: CSV with 17 significant digits (so every
//! f64 round-trips bit-for-bit) and atomic file writes (temp + rename).

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes bytes to `path` atomically via a temporary sibling file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Renders header + rows as CSV text with full-precision floats.
pub fn csv_text<R>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<f64>>,
{
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(v));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Writes a CSV file atomically.
pub fn write_csv<R>(path: &Path, header: &[&str], rows: R) -> io::Result<()>
where
    R: IntoIterator<Item = Vec<f64>>,
{
    atomic_write(path, csv_text(header, rows).as_bytes())
}

/// CSV with preformatted cells, for tables mixing numbers and identifiers.
pub fn csv_records(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv_records(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    atomic_write(path, csv_records(header, rows).as_bytes())
}

/// Parses CSV text produced by [`csv_text`]: returns (header, rows).
pub fn parse_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: Option<Vec<f64>> = line.split(',').map(|s| s.parse::<f64>().ok()).collect();
        rows.push(row?);
    }
    Some((header, rows))
}
