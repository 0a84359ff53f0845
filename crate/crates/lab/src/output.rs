//! CSV and JSON artifacts, written after the computation and listed in the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LabError;

/// Round-trip decimal formatting with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(&'static str),
    Owned(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(if x { "true" } else { "false" })
    }
}

impl From<&'static str> for Cell {
    fn from(x: &'static str) -> Self {
        Cell::S(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Owned(x)
    }
}

/// CSV table built in memory.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n", columns: header.len() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&num(x)),
                Cell::I(x) => write!(self.text, "{x}").expect("string write"),
                Cell::U(x) => write!(self.text, "{x}").expect("string write"),
                Cell::S(s) => self.text.push_str(s),
                Cell::Owned(s) => self.text.push_str(&s),
            }
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// A named output file body.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn csv(name: &str, table: Table) -> Self {
        Self { name: name.to_owned(), bytes: table.into_bytes() }
    }

    pub fn json(name: &str, value: &impl Serialize) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("results serialise");
        bytes.push(b'\n');
        Self { name: name.to_owned(), bytes }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("string write");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes every artifact into `dir` and returns their manifest records.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<OutputRecord>, LabError> {
    fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            fs::write(dir.join(&a.name), &a.bytes)?;
            Ok(OutputRecord { file: a.name.clone(), bytes: a.bytes.len(), sha256: sha256_hex(&a.bytes) })
        })
        .collect()
}
