//! Result tables and their CSV form: comment lines carrying provenance,
//! a header row, then one record per row with 17 significant digits.

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(k) => k as f64,
            Cell::Num(x) => x,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(k: i64) -> Self {
        Cell::Int(k)
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    /// NaN allowed (the quantity may not exist for a row)
    pub diagnostic: bool,
}

pub fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit, diagnostic: false }
}

pub fn diag(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit, diagnostic: true }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// extra `# key value` lines
    pub notes: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn check(&self) -> Result<(), CliError> {
        let err = |message: String| CliError::Table { table: self.name.clone(), message };
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.columns.len() {
                return Err(err(format!("row {i} has {} cells, expected {}", r.len(), self.columns.len())));
            }
            for (c, cell) in self.columns.iter().zip(r) {
                if !c.diagnostic && !cell.as_f64().is_finite() {
                    return Err(err(format!("row {i}: {} is not finite", c.name)));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self, config_hash: &str) -> Result<String, CliError> {
        self.check()?;
        let mut out = String::new();
        out.push_str(&format!("# flipline {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# table {}\n", self.name));
        out.push_str(&format!("# config_hash {config_hash}\n"));
        let diagnostic: Vec<&str> = self.columns.iter().filter(|c| c.diagnostic).map(|c| c.name).collect();
        if !diagnostic.is_empty() {
            out.push_str(&format!("# diagnostic_columns {}\n", diagnostic.join(" ")));
        }
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k} {v}\n"));
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| if c.unit.is_empty() { c.name.to_string() } else { format!("{} [{}]", c.name, c.unit) })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.render()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Reads `# config_hash` back from CSV text.
pub fn hash_of_csv(text: &str) -> Option<&str> {
    text.lines().find_map(|l| l.strip_prefix("# config_hash "))
}
