//! Tabular records with missing cells, and coordinate transforms to `[0, 1]`.

mod schema;
mod transform;

pub use schema::{ColumnKind, ColumnSpec, Schema, TransformChoice};
pub use transform::{EmpiricalCdf, Transform};

use std::io::Read;
use std::path::Path;

use crate::basis1d::FamilyKind;
use crate::error::{HcrError, Result};
use crate::Scalar;

pub const DEFAULT_MISSING_TOKENS: [&str; 4] = ["", "NA", "nan", "?"];

/// One data point; `None` marks a missing coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<T> {
    values: Vec<Option<T>>,
}

impl<T: Scalar> Record<T> {
    pub fn new(values: Vec<Option<T>>) -> Self {
        Self { values }
    }

    pub fn complete(values: &[T]) -> Self {
        Self {
            values: values.iter().map(|&v| Some(v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<T> {
        self.values.get(i).copied().flatten()
    }

    /// The known-coordinate set `C_k`.
    pub fn known(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn missing(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn knows_all(&self, subset: &[usize]) -> bool {
        subset.iter().all(|&i| self.get(i).is_some())
    }

    /// All coordinates, when complete.
    pub fn full(&self) -> Option<Vec<T>> {
        self.values.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    names: Vec<String>,
    records: Vec<Record<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(names: Vec<String>, records: Vec<Record<T>>) -> Result<Self> {
        let d = names.len();
        for r in &records {
            if r.dim() != d {
                return Err(HcrError::DimensionMismatch {
                    expected: d,
                    found: r.dim(),
                });
            }
        }
        Ok(Self { names, records })
    }

    /// Columns named `x1, x2, ...`.
    pub fn from_rows(rows: Vec<Vec<Option<T>>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let names = (1..=d).map(|i| format!("x{i}")).collect();
        Self::new(names, rows.into_iter().map(Record::new).collect())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn records(&self) -> &[Record<T>] {
        &self.records
    }

    pub fn push(&mut self, record: Record<T>) -> Result<()> {
        if record.dim() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: record.dim(),
            });
        }
        self.records.push(record);
        Ok(())
    }

    /// Number of present values per coordinate.
    pub fn presence_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim()];
        for r in &self.records {
            for (c, v) in counts.iter_mut().zip(r.values()) {
                *c += usize::from(v.is_some());
            }
        }
        counts
    }

    /// `|K_C|`: records knowing every coordinate of `subset`.
    pub fn evidence_count(&self, subset: &[usize]) -> usize {
        self.records.iter().filter(|r| r.knows_all(subset)).count()
    }

    pub fn complete_records(&self) -> impl Iterator<Item = (usize, Vec<T>)> + '_ {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.full().map(|x| (k, x)))
    }

    /// Present values of coordinate `i`.
    pub fn column(&self, i: usize) -> Vec<T> {
        self.records.iter().filter_map(|r| r.get(i)).collect()
    }

    /// Applies per-coordinate transforms; missing cells stay missing.
    pub fn transformed(&self, transforms: &[Transform<T>]) -> Result<Self> {
        self.map_values(transforms, |t, v| t.apply(v))
    }

    pub fn inverted(&self, transforms: &[Transform<T>]) -> Result<Self> {
        self.map_values(transforms, |t, v| t.invert(v))
    }

    fn map_values(
        &self,
        transforms: &[Transform<T>],
        f: impl Fn(&Transform<T>, T) -> Result<T>,
    ) -> Result<Self> {
        if transforms.len() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: transforms.len(),
            });
        }
        let records = self
            .records
            .iter()
            .map(|r| {
                r.values()
                    .iter()
                    .zip(transforms)
                    .map(|(v, t)| v.map(|v| f(t, v)).transpose())
                    .collect::<Result<Vec<_>>>()
                    .map(Record::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            names: self.names.clone(),
            records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableOptions {
    pub delimiter: u8,
    pub missing_tokens: Vec<String>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            missing_tokens: DEFAULT_MISSING_TOKENS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl TableOptions {
    pub fn is_missing(&self, cell: &str) -> bool {
        let cell = cell.trim();
        cell.is_empty() || self.missing_tokens.iter().any(|t| t == cell)
    }
}

/// Header plus cell strings, kept verbatim so outputs can reproduce inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read<R: Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| HcrError::Table(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(HcrError::EmptyTable);
        }
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| HcrError::Table(e.to_string()))?;
            if rec.len() != headers.len() {
                return Err(HcrError::RaggedRow {
                    row: k + 1,
                    found: rec.len(),
                    expected: headers.len(),
                });
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(HcrError::EmptyTable);
        }
        Ok(Self { headers, rows })
    }

    pub fn read_path(path: &Path, delimiter: u8) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| HcrError::Io(format!("{}: {e}", path.display())))?;
        Self::read(std::io::BufReader::new(f), delimiter)
    }

    /// Parses cells; missing tokens and NaN become `None`.
    pub fn to_dataset<T: Scalar>(&self, options: &TableOptions) -> Result<Dataset<T>> {
        let records = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .map(|(i, cell)| {
                        parse_cell(cell, options).ok_or_else(|| HcrError::NonNumeric {
                            row: k + 1,
                            column: self.headers[i].clone(),
                            cell: cell.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Record::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.headers.clone(), records)
    }

    pub fn write<W: std::io::Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        let io = |e: csv::Error| HcrError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `Some(None)` for missing, `Some(Some(v))` for a number, `None` if unparseable.
fn parse_cell<T: Scalar>(cell: &str, options: &TableOptions) -> Option<Option<T>> {
    if options.is_missing(cell) {
        return Some(None);
    }
    let v: T = cell.trim().parse().ok()?;
    if v.is_nan() {
        Some(None)
    } else if v.is_infinite() {
        None
    } else {
        Some(Some(v))
    }
}

/// Reads a character-separated table with a header row.
pub fn load_table<T: Scalar, R: Read>(reader: R, options: &TableOptions) -> Result<Dataset<T>> {
    RawTable::read(reader, options.delimiter)?.to_dataset(options)
}

/// Formats a value with 17 significant digits, enough to round-trip an `f64`.
pub fn format_value<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

/// Family chosen for a column kind when no explicit family is given.
pub(crate) fn default_family<T>(kind: &ColumnKind<T>, levels: usize) -> FamilyKind {
    match kind {
        ColumnKind::Discrete { .. } => FamilyKind::DiscreteOrthonormal { levels },
        ColumnKind::Continuous => FamilyKind::LegendreRescaled,
    }
}
