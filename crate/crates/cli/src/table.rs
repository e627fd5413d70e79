//! Tabular results and their CSV / JSON encodings.

use std::fmt::Write as _;

use aptqfi_core::Complex64;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Complex,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: &'static str,
    pub kind: Kind,
}

impl Column {
    pub fn real(name: impl Into<String>, unit: &'static str) -> Self {
        Self { name: name.into(), unit, kind: Kind::Real }
    }

    pub fn complex(name: impl Into<String>, unit: &'static str) -> Self {
        Self { name: name.into(), unit, kind: Kind::Complex }
    }

    pub fn text(name: impl Into<String>) -> Self {
        Self { name: name.into(), unit: "1", kind: Kind::Text }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Text(String),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: Vec<Column>) -> Self {
        Self { command: command.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Real values of one column, `None` for missing cells.
    pub fn real_column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Real(x) => Some(x),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header = Vec::new();
        for c in &self.columns {
            match c.kind {
                Kind::Complex => {
                    header.push(format!("{}_re [{}]", c.name, c.unit));
                    header.push(format!("{}_im [{}]", c.name, c.unit));
                }
                _ => header.push(format!("{} [{}]", c.name, c.unit)),
            }
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields = Vec::with_capacity(header.len());
            for (cell, col) in row.iter().zip(&self.columns) {
                match (cell, col.kind) {
                    (Cell::Real(x), _) => fields.push(fmt_float(*x)),
                    (Cell::Complex(z), _) => {
                        fields.push(fmt_float(z.re));
                        fields.push(fmt_float(z.im));
                    }
                    (Cell::Text(s), _) => fields.push(csv_escape(s)),
                    (Cell::Missing, Kind::Complex) => fields.extend([String::new(), String::new()]),
                    (Cell::Missing, _) => fields.push(String::new()),
                }
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let cell = |c: &Cell| match c {
            Cell::Real(x) => json_float(*x),
            Cell::Complex(z) => json!([json_float(z.re), json_float(z.im)]),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        };
        let doc = json!({
            "command": self.command,
            "columns": self.columns.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(),
            "units": self.columns.iter().map(|c| c.unit).collect::<Vec<_>>(),
            "rows": self.rows.iter().map(|r| r.iter().map(cell).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

/// 17 significant digits in scientific notation, independent of locale.
pub fn fmt_float(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x:.16e}").expect("write to string");
    s
}

fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec![Column::real("x", "Gamma"), Column::complex("z", "1"), Column::text("status")]);
        t.push(vec![Cell::Real(0.1), Cell::Complex(Complex64::new(1.0, -2.0)), Cell::Text("ok".into())]);
        t.push(vec![Cell::Real(1.0), Cell::Missing, Cell::Text("a,b".into())]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x [Gamma],z_re [1],z_im [1],status [1]");
        assert_eq!(
            lines[1],
            "1.0000000000000001e-1,1.0000000000000000e0,-2.0000000000000000e0,ok"
        );
        assert_eq!(lines[2], "1.0000000000000000e0,,,\"a,b\"");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["columns"], json!(["x", "z", "status"]));
        assert_eq!(v["units"], json!(["Gamma", "1", "1"]));
        assert_eq!(v["rows"][0][1], json!([1.0, -2.0]));
        assert_eq!(v["rows"][1][1], Value::Null);
    }
}
