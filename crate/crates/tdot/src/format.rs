//! Fixed number formatting and the table writers.

use serde_json::{json, Map, Value};

use crate::config::{RunConfig, RESULT_MARKER};

/// Significant digits of every emitted number.
pub const DIGITS: usize = 12;

/// `%.12g`: fixed notation for moderate exponents, scientific otherwise,
/// trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to [`DIGITS`] significant digits, for JSON output.
pub fn round(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_num(x).parse::<f64>().expect("formatted number parses"))
    } else {
        Value::Null
    }
}

/// A flat result table plus free-form notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Result of one command in both output shapes.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    /// Command-specific JSON body (nested per-sideband data and the like).
    pub body: Value,
}

impl Report {
    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut out = format!("{RESULT_MARKER}\n#@ command: {}\n", self.command);
        for (k, v) in cfg.entries() {
            out.push_str(&format!("#@ {k} = {v}\n"));
        }
        for n in &self.table.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out.push_str(&self.table.columns.join(","));
        out.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let mut config = Map::new();
        for (k, v) in cfg.entries() {
            config.insert(k.to_string(), Value::String(v));
        }
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("config".into(), Value::Object(config));
        doc.insert("notes".into(), json!(self.table.notes));
        if let Value::Object(body) = &self.body {
            for (k, v) in body {
                doc.insert(k.clone(), v.clone());
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serialisable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-1.0), "-1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(1e-12), "1e-12");
        assert_eq!(fmt_num(3.09159265359), "3.09159265359");
        assert_eq!(fmt_num(0.0001234), "0.0001234");
        assert_eq!(fmt_num(0.00001234), "1.234e-5");
    }

    #[test]
    fn rounding_is_stable() {
        let v = round(std::f64::consts::PI);
        assert_eq!(v.as_f64().unwrap(), 3.14159265359);
    }
}
