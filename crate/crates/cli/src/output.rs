//! Deterministic CSV and JSON artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// `x` in C `%.12e` notation: twelve mantissa digits and a signed exponent
/// of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent notation");
    let e: i32 = exponent.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", e.abs())
}

pub fn sci_opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(io_error(dir))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(io_error(&path))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let to_io = |e: csv::Error| CliError::Io { path: path.clone(), source: e.into() };
        w.write_record(&table.header).map_err(to_io)?;
        for row in &table.rows {
            w.write_record(row).map_err(to_io)?;
        }
        w.flush().map_err(io_error(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(io_error(&path))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io { path: path.clone(), source: e.into() })?;
        w.write_all(b"\n").map_err(io_error(&path))?;
        w.flush().map_err(io_error(&path))?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(150.0), "1.500000000000e+02");
        assert_eq!(sci(-6.7e-7), "-6.700000000000e-07");
        assert_eq!(sci(1.0e123), "1.000000000000e+123");
        assert_eq!(sci(f64::NAN), "nan");
        assert_eq!(sci_opt(None), "");
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(&dir.path().join("nested")).unwrap();
        let mut t = Table::new(["a", "b"]);
        t.push(vec![sci(1.0), "x,y".into()]);
        a.csv("t.csv", &t).unwrap();
        a.json("v.json", &serde_json::json!({"k": 1.5})).unwrap();
        let text = std::fs::read_to_string(dir.path().join("nested/t.csv")).unwrap();
        assert_eq!(text, "a,b\n1.000000000000e+00,\"x,y\"\n");
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("nested/v.json")).unwrap()).unwrap();
        assert_eq!(v["k"], 1.5);
        assert_eq!(a.written().len(), 2);
    }
}
