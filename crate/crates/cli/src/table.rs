use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// A CSV table with a header row; floats use the shortest round-trip representation so
/// identical runs give identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write `<dir>/<name>.csv`, or to stdout when `dir` is `None`.
    pub fn emit(&self, dir: Option<&Path>) -> Result<()> {
        match dir {
            Some(d) => {
                let path = d.join(format!("{}.csv", self.name));
                let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                self.write_to(std::io::BufWriter::new(file))
            }
            None => self.write_to(std::io::stdout().lock()),
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
