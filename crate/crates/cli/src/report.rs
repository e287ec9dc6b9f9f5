//! Exit codes, failures and the three output renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use iia_core::Error;
use serde_json::Value;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn guard(message: impl Into<String>) -> Self {
        Self { code: EXIT_GUARD, message: message.into() }
    }

    /// Prefixes the message with a file path, keeping the code.
    pub fn at(self, path: &Path) -> Self {
        Self { code: self.code, message: format!("{}: {}", path.display(), self.message) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCollection(_)
            | Error::Parse { .. }
            | Error::DimensionMismatch { .. }
            | Error::CollectionMismatch
            | Error::InvalidDistribution(_)
            | Error::InvalidParameter(_)
            | Error::Io(_) => EXIT_INPUT,
            _ => EXIT_GUARD,
        };
        Self { code, message: e.to_string() }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// A command's result in every output format. `passed` is false only for
/// verification failures.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub csv: Csv,
    pub passed: bool,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.to_string(),
        }
    }
}

/// Minimal CSV table; fields containing separators are quoted.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.header.len());
        self.rows.push(fields);
    }
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl std::fmt::Display for Csv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let line = |cells: &[String]| cells.iter().map(|c| field(c)).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "{}", line(&self.header));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        f.write_str(&out)
    }
}

/// `Some(x)` as a number, `None` as an empty field.
pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}
