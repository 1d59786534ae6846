//! Plain CSV tables with round-trip precision.

use std::io::Write;

use crate::error::Result;

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A numeric table with a header, optional notes, and a metadata trailer.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `#` lines written after the data.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self {
            header,
            rows,
            notes: vec![],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Writes header, rows, notes, then `# <metadata>` as the last line.
    pub fn write_csv(&self, mut w: impl Write, metadata: &str) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        writeln!(w, "# {metadata}")?;
        Ok(())
    }

    pub fn to_csv_string(&self, metadata: &str) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, metadata)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }
}
