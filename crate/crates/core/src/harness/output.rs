use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ensemble::EnsembleSummary;
use crate::error::Result;

/// Column order of every ensemble CSV.
pub const SUMMARY_HEADER: [&str; 8] = [
    "nu",
    "holevo_var",
    "holevo_stderr",
    "cum_time",
    "total_qubits",
    "bound_fixed_qcrb",
    "bound_ideal",
    "bound_eq31",
];

/// A numeric table. Cells use the shortest text that parses back to the same
/// `f64`, with integral values written without a fractional part.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn to_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(std::io::Error::from)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_cell(v))).map_err(std::io::Error::from)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_csv(fs::File::create(path)?)
    }
}

impl From<&EnsembleSummary> for Table {
    fn from(summary: &EnsembleSummary) -> Self {
        let mut t = Table::new(SUMMARY_HEADER);
        for r in &summary.rows {
            t.push(vec![
                f64::from(r.nu),
                r.holevo_var,
                r.holevo_stderr,
                r.cum_time,
                r.total_qubits as f64,
                r.bound_fixed_qcrb,
                r.bound_ideal,
                r.bound_eq31,
            ]);
        }
        t
    }
}

fn format_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `<dir>/<stem>_<tag>.<ext>`.
pub fn artifact_path(dir: &Path, stem: &str, tag: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}_{tag}.{ext}"))
}
