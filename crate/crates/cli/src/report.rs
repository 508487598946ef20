//! Run reports: verdicts with numeric witnesses, text and canonical JSON.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Kind, Sampling, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Unreliable,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unreliable => "UNRELIABLE",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Numeric evidence backing the verdict; never empty.
    pub witness: Map<String, Value>,
}

impl Verdict {
    pub fn new(name: &str, status: Status, detail: String, witness: &[(&str, Value)]) -> Self {
        assert!(!witness.is_empty(), "every verdict carries a numeric witness");
        Self {
            name: name.into(),
            status,
            detail,
            witness: witness.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub tolerances: Tolerances,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub kind: Kind,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    /// Module-level report of the experiment.
    pub evidence: Value,
    /// Lines for the text report only.
    #[serde(skip)]
    pub table: Vec<String>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn new(kind: Kind, verdicts: Vec<Verdict>, evidence: Value, table: Vec<String>, provenance: Provenance) -> Self {
        let passed = verdicts.iter().all(|v| v.status == Status::Pass);
        Self { kind, passed, verdicts, evidence, table, provenance }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Text report. Wall time appears here only, so JSON stays reproducible.
pub fn emit_text(report: &RunReport, wall_seconds: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("experiment: {}\n", report.kind.name()));
    out.push_str(&format!("config sha256: {}\n", report.provenance.config_sha256));
    for line in &report.table {
        out.push_str(line);
        out.push('\n');
    }
    for v in &report.verdicts {
        out.push_str(&format!("[{}] {}: {}\n", v.status.label(), v.name, v.detail));
    }
    out.push_str(&format!(
        "result: {} ({:.3}s)\n",
        if report.passed { "PASS" } else { "FAIL" },
        wall_seconds
    ));
    out
}

/// Canonical JSON: object keys sorted, floats with 17 significant digits,
/// non-finite floats as null, two-space indentation, trailing newline.
pub fn emit_json(report: &RunReport) -> Vec<u8> {
    let value = canonical(serde_json::to_value(report).expect("report serializes"));
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical::default());
    value.serialize(&mut ser).expect("writing to memory");
    buf.push(b'\n');
    buf
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

#[derive(Default)]
struct Canonical<'a> {
    pretty: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical::default());
        serde_json::json!({"b": 0.1, "a": [1, 2.5]}).serialize(&mut ser).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("2.5000000000000000e0"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn keys_are_sorted() {
        let v = canonical(serde_json::json!({"z": 1, "a": {"y": 1, "b": 2}}));
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["a", "z"]);
    }
}
