//! Minimal CSV reading/writing.
//!
//! All file formats in this crate are plain comma-separated tables whose
//! fields never contain commas or quotes, so a hand-rolled reader/writer
//! keeps output bytes fully under our control.

use crate::error::{Error, Result};

/// Format a real with 17 significant digits so the value round-trips.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    format!("{:.16e}", v)
}

/// Parse a float field; empty fields mean "missing".
pub fn parse_f64_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::parse(format!("bad float field {field:?}")))
}

pub fn parse_f64(field: &str) -> Result<f64> {
    parse_f64_opt(field)?.ok_or_else(|| Error::parse("unexpected empty float field"))
}

pub fn parse_usize(field: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| Error::parse(format!("bad integer field {field:?}")))
}

/// A parsed CSV table: header plus rows of string fields.
#[derive(Debug, Clone)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn parse(text: &str) -> Result<Csv> {
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::parse("empty CSV"))?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            if fields.len() != header.len() {
                return Err(Error::parse(format!(
                    "row {} has {} fields, header has {}",
                    i + 2,
                    fields.len(),
                    header.len()
                )));
            }
            rows.push(fields);
        }
        Ok(Csv { header, rows })
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(format!("missing column {name:?}")))
    }
}

/// Serialize header + rows; one trailing newline.
pub fn write_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
