//! Run reports: command, parameters, outputs, an optional table and
//! verification verdicts. Maps are ordered, so output is byte-stable for
//! a given seed once timing is left out.

use std::collections::BTreeMap;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub outputs: BTreeMap<String, Value>,
    /// Column names of `rows`; kept even when the table is empty.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub verdicts: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), v.into());
        self
    }

    pub fn out(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.outputs.insert(key.to_string(), v.into());
        self
    }

    pub fn verdict(&mut self, key: &str, ok: bool) -> &mut Self {
        self.verdicts.insert(key.to_string(), ok);
        self
    }

    pub fn table(&mut self, columns: &[&str]) -> &mut Self {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn all_verdicts_pass(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON, or CSV of the table (or of `key,value` pairs when there is none).
pub fn emit_report(report: &RunReport, format: Format, include_timing: bool) -> Result<String> {
    let mut r = report.clone();
    if !include_timing {
        r.wall_clock_ms = None;
    }
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&r)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if r.columns.is_empty() {
                w.write_record(["key", "value"])?;
                w.write_record(["command", r.command.as_str()])?;
                for (k, v) in r.parameters.iter().chain(&r.outputs) {
                    w.write_record([k.as_str(), cell(v).as_str()])?;
                }
                for (k, v) in &r.verdicts {
                    w.write_record([format!("verdict.{k}"), v.to_string()])?;
                }
            } else {
                w.write_record(&r.columns)?;
                for row in &r.rows {
                    w.write_record(row)?;
                }
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let mut r = RunReport::new("proto cost");
        r.table(&["n", "advice_bits"]);
        assert_eq!(
            emit_report(&r, Format::Csv, false).unwrap(),
            "n,advice_bits\n"
        );
    }

    #[test]
    fn timing_is_optional_and_json_stable() {
        let mut r = RunReport::new("x");
        r.param("b", 2).param("a", "1").verdict("ok", true);
        r.wall_clock_ms = Some(1.5);
        let with = emit_report(&r, Format::Json, true).unwrap();
        assert!(with.contains("wall_clock_ms"));
        let without = emit_report(&r, Format::Json, false).unwrap();
        assert!(!without.contains("wall_clock_ms"));
        assert!(without.find("\"a\"").unwrap() < without.find("\"b\"").unwrap());
        let csv = emit_report(&r, Format::Csv, false).unwrap();
        assert!(csv.starts_with("key,value\ncommand,x\n"));
        assert!(csv.contains("verdict.ok,true"));
    }
}
