//! Output tables: a metadata preamble, a header row and typed cells, written
//! as CSV or JSON and parsed back from either.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i128),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// CSV form: reals with 17 significant digits, `.` as separator.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(text: &str) -> Cell {
        if let Ok(i) = text.parse::<i128>() {
            Cell::Int(i)
        } else if let Ok(b) = text.parse::<bool>() {
            Cell::Bool(b)
        } else if let Ok(x) = text.parse::<f64>() {
            Cell::Real(x)
        } else {
            Cell::Text(text.to_string())
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => i64::try_from(*i).map_or_else(|_| json!(i.to_string()), |v| json!(v)),
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => json!(format!("{x}")),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    fn from_json(v: &Value) -> Result<Cell> {
        Ok(match v {
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i as i128),
                _ => Cell::Real(n.as_f64().ok_or_else(|| Error::parse(0, format!("bad number {n}")))?),
            },
            Value::String(s) => match s.as_str() {
                "NaN" | "inf" | "-inf" => Cell::Real(s.parse().expect("non-finite literal")),
                _ if s.parse::<i128>().is_ok() => Cell::Int(s.parse().expect("checked")),
                _ => Cell::Text(s.clone()),
            },
            other => return Err(Error::parse(0, format!("unsupported cell {other}"))),
        })
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(i: $t) -> Self {
                Cell::Int(i as i128)
            }
        }
    )*};
}
int_cell!(i32, i64, u32, u64, usize, u128);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").expect("string write");
        }
        writeln!(out, "{}", self.columns.join(",")).expect("string write");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(",")).expect("string write");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Table> {
        let mut table = Table::default();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix("# ") {
                if header {
                    return Err(Error::parse(i + 1, "metadata after the header"));
                }
                let (k, v) = m
                    .split_once('=')
                    .ok_or_else(|| Error::parse(i + 1, "metadata needs key=value"))?;
                table.meta.push((k.to_string(), v.to_string()));
            } else if !header {
                table.columns = line.split(',').map(str::to_string).collect();
                header = true;
            } else {
                let row: Vec<Cell> = line.split(',').map(Cell::parse).collect();
                if row.len() != table.columns.len() {
                    return Err(Error::parse(i + 1, format!("expected {} cells", table.columns.len())));
                }
                table.rows.push(row);
            }
        }
        if !header {
            return Err(Error::parse(0, "missing header row"));
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let meta: Vec<Value> = self.meta.iter().map(|(k, v)| json!([k, v])).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({ "meta": meta, "columns": self.columns, "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Table> {
        let bad = |m: &str| Error::parse(0, m.to_string());
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        let meta = doc["meta"]
            .as_array()
            .ok_or_else(|| bad("missing meta"))?
            .iter()
            .map(|kv| match (kv[0].as_str(), kv[1].as_str()) {
                (Some(k), Some(v)) => Ok((k.to_string(), v.to_string())),
                _ => Err(bad("meta entries are [key, value]")),
            })
            .collect::<Result<_>>()?;
        let columns = doc["columns"]
            .as_array()
            .ok_or_else(|| bad("missing columns"))?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("column names are strings")))
            .collect::<Result<Vec<_>>>()?;
        let rows = doc["rows"]
            .as_array()
            .ok_or_else(|| bad("missing rows"))?
            .iter()
            .map(|r| {
                let cells = r.as_array().ok_or_else(|| bad("rows are arrays"))?;
                if cells.len() != columns.len() {
                    return Err(bad("row width differs from header"));
                }
                cells.iter().map(Cell::from_json).collect()
            })
            .collect::<Result<_>>()?;
        Ok(Table { meta, columns, rows })
    }
}
