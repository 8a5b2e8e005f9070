// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::CliError;

/// Significant digits for every printed number.
pub const DIGITS: usize = 12;

/// Rounds to [`DIGITS`] significant digits. The `Display` form of the
/// result is the shortest string that reads back to it.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().expect("formatted float parses")
}

pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // Avoid "-0".
        format!("{}", round_sig(x) + 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => num_json(*v),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

fn num_json(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x) + 0.0).map_or_else(|| Value::from(format_num(x)), Value::Number)
}

/// Rounds every float inside `v`.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num_json(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

macro_rules! cell_from {
    ($($t:ty => $v:ident $(as $c:ty)?),*) => {
        $(impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell::$v(x $(as $c)?)
            }
        })*
    };
}

cell_from!(i64 => Int, u64 => Int as i64, u32 => Int as i64, usize => Int as i64, f64 => Num, bool => Bool, String => Text);

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Jsonl,
}

/// Rows of equal width plus free-form details shown only in JSON.
#[derive(Clone, Debug, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub details: BTreeMap<String, Value>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        ResultTable { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    pub fn detail(&mut self, key: &str, value: impl serde::Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
        self.details.insert(key.into(), round_value(v));
        Ok(())
    }

    /// Renders the table. `metadata` is embedded in JSON output only.
    pub fn render(&self, format: Format, metadata: &Value) -> Result<String, CliError> {
        let internal = |e: &dyn std::fmt::Display| CliError::Internal(e.to_string());
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(vec![]);
                w.write_record(&self.columns).map_err(|e| internal(&e))?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text)).map_err(|e| internal(&e))?;
                }
                let bytes = w.into_inner().map_err(|e| internal(&e))?;
                String::from_utf8(bytes).map_err(|e| internal(&e))
            }
            Format::Json => {
                let mut top = Map::new();
                top.insert("columns".into(), Value::from(self.columns.clone()));
                top.insert(
                    "rows".into(),
                    Value::Array(self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect()),
                );
                top.insert("details".into(), Value::Object(self.details.clone().into_iter().collect()));
                top.insert("metadata".into(), metadata.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).map_err(|e| internal(&e))?;
                s.push('\n');
                Ok(s)
            }
            Format::Jsonl => {
                let mut s = String::new();
                for row in &self.rows {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    s.push_str(&serde_json::to_string(&obj).map_err(|e| internal(&e))?);
                    s.push('\n');
                }
                Ok(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_num(0.1 + 0.2), "0.3");
        assert_eq!(format_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_num(2.0 / 3.0 * 1e6), "666666.666667");
        assert_eq!(format_num(-0.0), "0");
        assert_eq!(format_num(0.25), "0.25");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.push(vec!["x,y".into(), 1.5.into()]);
        assert_eq!(t.render(Format::Csv, &Value::Null).unwrap(), "a,b\r\n\"x,y\",1.5\r\n");
    }

    #[test]
    fn json_keys_sorted() {
        let mut t = ResultTable::new(&["v"]);
        t.push(vec![(1.0 / 3.0).into()]);
        let s = t.render(Format::Json, &Value::Null).unwrap();
        let keys: Vec<usize> = ["columns", "details", "metadata", "rows"].iter().map(|k| s.find(k).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(s.contains("0.333333333333"));
    }

    #[test]
    fn jsonl_one_object_per_row() {
        let mut t = ResultTable::new(&["round", "player", "message"]);
        t.push(vec![1usize.into(), 2usize.into(), "1f".into()]);
        t.push(vec![2usize.into(), 1usize.into(), "0".into()]);
        let s = t.render(Format::Jsonl, &Value::Null).unwrap();
        assert_eq!(s.lines().next().unwrap(), r#"{"message":"1f","player":2,"round":1}"#);
        assert_eq!(s.lines().count(), 2);
    }
}
