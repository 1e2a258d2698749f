//! Deterministic CSV and JSON output.
//!
//! Floats are written with 17 significant digits so values round-trip;
//! lines end in `\n`; JSON object keys are sorted.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// A rectangular numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| format_f64(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits in scientific notation; non-finite values as
/// `nan`, `inf`, `-inf`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // Round-tripping through Value sorts object keys.
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_csv(table: &Table, path: &Path) -> io::Result<()> {
    std::fs::write(path, table.to_csv())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let s = to_json_string(value).map_err(io::Error::other)?;
    std::fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_has_header_and_round_trips() {
        let mut t = Table::new(["x", "density"]);
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push(vec![-2.5e-300, f64::NAN]);
        let s = t.to_csv();
        assert!(s.starts_with("x,density\n"));
        assert!(s.ends_with('\n'));
        let second = s.lines().nth(1).unwrap();
        let back: f64 = second.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
        assert_eq!(s, t.to_csv());
        let empty = Table::new(["a"]);
        assert_eq!(empty.to_csv(), "a\n");
    }

    #[test]
    fn json_keys_sorted() {
        let s = to_json_string(&json!({"b": 1, "a": [1.5, 2]})).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.ends_with("}\n"));
    }
}
