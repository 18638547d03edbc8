//! Plain-text interchange helpers shared by every file format.
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! `parse(format(x)) == x` for every finite `x`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_err(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

fn parse_row(path: &Path, line: u64, record: &csv::StringRecord, width: usize) -> Result<Vec<f64>> {
    if record.len() != width {
        return Err(parse_err(path, line, format!("expected {width} fields, found {}", record.len())));
    }
    record
        .iter()
        .map(|field| {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: `{field}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(path, line, format!("non-finite value `{field}`")))
            }
        })
        .collect()
}

/// Rows of a headed CSV whose columns must be exactly `header`. Returned rows
/// are paired with their 1-based file line numbers.
pub(crate) fn read_numeric_csv_lines(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if found != header {
        return Err(parse_err(path, 1, format!("expected header `{}`, found `{}`", header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, parse_row(path, line, &record, header.len())?));
    }
    Ok(rows)
}

pub(crate) fn read_numeric_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    Ok(read_numeric_csv_lines(path, header)?.into_iter().map(|(_, r)| r).collect())
}

pub(crate) fn numeric_csv_string<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        push_row(&mut out, &row);
    }
    out
}

fn push_row(out: &mut String, row: &[f64]) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
    }
    out.push('\n');
}

pub(crate) fn write_numeric_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    write_string(path, &numeric_csv_string(header, rows))
}

/// A matrix file: `# key=value` metadata lines followed by headerless rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, path: &Path, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| parse_err(path, 1, format!("missing metadata `{key}`")))
    }

    pub fn require_f64(&self, path: &Path, key: &str) -> Result<f64> {
        let raw = self.require(path, key)?;
        raw.parse()
            .map_err(|_| parse_err(path, 1, format!("metadata `{key}` is not a number: `{raw}`")))
    }

    pub fn require_usize(&self, path: &Path, key: &str) -> Result<usize> {
        let raw = self.require(path, key)?;
        raw.parse()
            .map_err(|_| parse_err(path, 1, format!("metadata `{key}` is not a count: `{raw}`")))
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        for row in &self.rows {
            push_row(&mut out, row);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_string())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut meta = Vec::new();
        let mut body_start = 0usize;
        let mut line_no = 0u64;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                line_no += 1;
                body_start += line.len();
                let (k, v) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| parse_err(path, line_no, "metadata line must be `# key=value`"))?;
                meta.push((k.trim().to_string(), v.trim().to_string()));
            } else {
                break;
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text[body_start..].as_bytes());
        let mut rows = Vec::new();
        let mut width = None;
        for record in reader.records() {
            let record = record?;
            let line = line_no + record.position().map_or(0, |p| p.line());
            let w = *width.get_or_insert(record.len());
            rows.push(parse_row(path, line, &record, w)?);
        }
        Ok(MatrixFile { meta, rows })
    }
}
