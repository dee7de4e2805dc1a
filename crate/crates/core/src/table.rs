//! Headered CSV tables: one numeric series per column.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::fmt_num;
use crate::types::TimeSeries;

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column; its length must match the existing columns.
    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if let Some(first) = self.columns.first() {
            if first.len() != values.len() {
                return Err(Error::LengthMismatch {
                    what: "table column".into(),
                    expected: first.len(),
                    found: values.len(),
                });
            }
        }
        self.names.push(name.into());
        self.columns.push(values);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// A validated series from one column, labelled with the column name.
    pub fn series(&self, name: &str) -> Result<TimeSeries> {
        let values = self.column(name)?.to_vec();
        TimeSeries::labeled(values, name).map_err(|e| e.context(format!("column `{name}`")))
    }

    /// Parses a headered CSV. Row numbers in errors count the header as row 1.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(Error::EmptyInput);
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 2;
            for ((cell, name), col) in record.iter().zip(&names).zip(columns.iter_mut()) {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                col.push(v);
            }
        }
        Ok(Table { names, columns })
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
        Self::read(std::io::BufReader::new(file))
            .map_err(|e| e.context(format!("reading {}", path.display())))
    }

    /// Writes the table with 12 significant digits per cell.
    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| fmt_num(c[r])))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
