//! Tabular output with a fixed column set per command. CSV and JSON carry
//! the same strings cell for cell, so golden files can diff either format.

use std::fs;
use std::io;
use std::path::Path;

use clap::ValueEnum;
use ordlab_core::rational::{to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Rows of strings under a fixed header. Cells never contain commas,
/// quotes, or newlines; list-valued cells join their parts with `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        for cell in &cells {
            assert!(
                !cell.contains([',', '"', '\n']),
                "cell {cell:?} breaks the csv contract"
            );
        }
        self.rows.push(cells);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Cell at (row, column name); panics on an unknown column.
    pub fn cell(&self, row: usize, column: &str) -> &str {
        let c = self
            .columns
            .iter()
            .position(|&x| x == column)
            .unwrap_or_else(|| panic!("no column {column}"));
        &self.rows[row][c]
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(col).expect("plain string"));
                out.push(':');
                out.push_str(&serde_json::to_string(cell).expect("plain string"));
            }
            out.push('}');
        }
        out.push_str("\n]\n");
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Writes through a sibling temp file and renames, so readers never observe
/// a half-written table.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents)?;
    fs::rename(tmp, path)
}

/// The three renderings of an exact value: numerator, denominator, and a
/// float that agrees with num/den to double precision.
pub fn exact_cells(r: &Rational) -> [String; 3] {
    [
        r.numer().to_string(),
        r.denom().to_string(),
        format!("{}", to_f64(r)),
    ]
}

pub fn join_list<I: IntoIterator<Item = S>, S: ToString>(items: I) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
