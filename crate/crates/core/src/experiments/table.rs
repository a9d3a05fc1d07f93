use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Columns whose name ends with this suffix hold wall-clock timings and are
/// dropped from determinism comparisons.
pub const TIME_SUFFIX: &str = "cpu_s";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Cell::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Str(s) => f.write_str(s),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_nan() => f.write_str("nan"),
            Cell::Float(v) if v.is_infinite() => f.write_str(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Float(v) if *v == 0.0 => f.write_str("0"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Missing => Ok(()),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.into())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        i64::try_from(v).map_or_else(|_| Cell::Str(v.to_string()), Cell::Int)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// A named table with a fixed column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    /// Written as `# ` lines above the header.
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidInput(format!("table {} has no column `{name}`", self.name)))
    }

    pub fn cell(&self, row: usize, name: &str) -> Result<&Cell> {
        Ok(&self.rows[row][self.column(name)?])
    }

    /// Numeric values of a column, skipping missing cells.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().filter_map(|r| r[c].as_f64()).collect())
    }

    /// Rows whose column `name` displays as `value`.
    pub fn filter(&self, name: &str, value: &str) -> Result<Table> {
        let c = self.column(name)?;
        let mut out = Table { rows: Vec::new(), ..self.clone() };
        out.rows = self.rows.iter().filter(|r| r[c].to_string() == value).cloned().collect();
        Ok(out)
    }

    pub fn is_time_column(name: &str) -> bool {
        name.ends_with(TIME_SUFFIX)
    }

    /// CSV text with `# ` comment lines; timing columns are omitted unless
    /// `with_time` is set.
    pub fn to_csv(&self, with_time: bool) -> String {
        let keep: Vec<usize> =
            (0..self.columns.len()).filter(|&c| with_time || !Self::is_time_column(&self.columns[c])).collect();
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(keep.iter().map(|&c| self.columns[c].as_str())).expect("in-memory write");
        for r in &self.rows {
            w.write_record(keep.iter().map(|&c| r[c].to_string())).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("utf-8 cells"));
        out
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_drops_time_columns_on_request() {
        let mut t = Table::new("t", &["rule", "objective", "cpu_s"]).comment("hit rate: fraction at the oracle");
        t.push(vec!["ra".into(), (-0.5).into(), 0.01.into()]);
        t.push(vec!["a,b".into(), Cell::Missing, 0.02.into()]);
        assert_eq!(t.to_csv(false), "# hit rate: fraction at the oracle\nrule,objective\nra,-0.5\n\"a,b\",\n");
        assert!(t.to_csv(true).contains("cpu_s"));
        assert_eq!(t.filter("rule", "ra").unwrap().rows.len(), 1);
    }
}
