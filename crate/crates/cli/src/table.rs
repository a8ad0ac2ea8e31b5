use std::fmt::Write as _;

use serde_json::{Map, Value};

/// Column-ordered rows rendered as JSON objects or CSV.
#[derive(Debug, Default)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        if !v.is_null() {
                            m.insert(c.clone(), v.clone());
                        }
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        writeln!(out, "{}", header.join(",")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(csv_value).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Floats in 17-significant-digit scientific notation.
fn csv_value(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap()),
        Value::Number(n) => n.to_string(),
        Value::String(s) => csv_field(s),
        Value::Bool(b) => b.to_string(),
        other => csv_field(&other.to_string()),
    }
}
