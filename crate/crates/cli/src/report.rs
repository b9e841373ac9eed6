//! CSV reports with round-trip exact floating point output.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::Result;

/// Formats a real with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an optional real, empty when absent.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Tabular output of one subcommand plus a human summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines written to stderr, not to the CSV.
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn new(header: Vec<&'static str>) -> Self {
        Report { header, rows: Vec::new(), notes: Vec::new(), passed: true }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// Marks the report failed unless `ok`, returning `ok`.
    pub fn check(&mut self, ok: bool) -> bool {
        self.passed &= ok;
        ok
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    /// Writes to `path`, or to stdout for `-`.
    pub fn save(&self, path: &str) -> Result<()> {
        write_to(path, |w| self.write_csv(w))
    }
}

/// Opens `path` (stdout for `-`) and hands the writer to `f`.
pub fn write_to(path: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if path == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        f(&mut lock)
    } else {
        let mut file = io::BufWriter::new(File::create(Path::new(path))?);
        f(&mut file)?;
        file.flush()?;
        Ok(())
    }
}
