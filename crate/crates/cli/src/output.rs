//! Report emission: JSON documents and flat CSV tables.

use std::io::Write;

/// One CSV field. Reals are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell(String);

impl Cell {
    pub fn text(s: &str) -> Self {
        Cell(s.to_string())
    }

    pub fn int(v: usize) -> Self {
        Cell(v.to_string())
    }

    pub fn signed(v: i64) -> Self {
        Cell(v.to_string())
    }

    pub fn bool(v: bool) -> Self {
        Cell(v.to_string())
    }

    pub fn real(v: f64) -> Self {
        Cell(format!("{v:.16e}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.0.as_str()))?;
        }
        w.flush()?;
        Ok(())
    }
}
