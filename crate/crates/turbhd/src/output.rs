//! CSV tables with `#`-prefixed provenance headers.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key = value` lines for the header.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// First non-finite entry as `(row, column)`.
    pub fn first_non_finite(&self) -> Option<(usize, &'static str)> {
        self.rows.iter().enumerate().find_map(|(i, row)| {
            row.iter()
                .position(|c| matches!(c, Cell::Float(v) if !v.is_finite()))
                .map(|j| (i, self.columns[j]))
        })
    }

    pub fn write<W: Write>(&self, header: &[String], out: W) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(out);
        for line in header.iter().chain(&self.notes) {
            writeln!(out, "# {line}")?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(self.columns)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::render))?;
        }
        csv.flush()?;
        Ok(())
    }
}
