//! Check records, reports and their canonical JSON form.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

/// How a record's pass flag is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `measured ≤ bound · (1 + tol)`.
    Bound,
    /// `measured ≤ tol`.
    Residual,
    /// `measured = 1`.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub kind: CheckKind,
    pub bound: Option<f64>,
    /// Closed form of the bound, with its inputs in `bound_inputs`.
    pub formula: Option<String>,
    pub bound_inputs: BTreeMap<String, f64>,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Value>,
}

impl CheckRecord {
    pub fn bound(id: impl Into<String>, measured: f64, bound: f64, tol: f64, formula: &str) -> Self {
        CheckRecord {
            id: id.into(),
            kind: CheckKind::Bound,
            bound: Some(bound),
            formula: Some(formula.to_string()),
            bound_inputs: BTreeMap::new(),
            measured,
            tolerance: tol,
            pass: measured <= bound * (1.0 + tol),
            witness: None,
        }
    }

    pub fn residual(id: impl Into<String>, measured: f64, tol: f64) -> Self {
        CheckRecord {
            id: id.into(),
            kind: CheckKind::Residual,
            bound: None,
            formula: None,
            bound_inputs: BTreeMap::new(),
            measured,
            tolerance: tol,
            pass: measured <= tol,
            witness: None,
        }
    }

    pub fn flag(id: impl Into<String>, ok: bool) -> Self {
        CheckRecord {
            id: id.into(),
            kind: CheckKind::Flag,
            bound: None,
            formula: None,
            bound_inputs: BTreeMap::new(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 0.0,
            pass: ok,
            witness: None,
        }
    }

    pub fn input(mut self, key: &str, v: f64) -> Self {
        self.bound_inputs.insert(key.to_string(), v);
        self
    }

    pub fn witness(mut self, w: impl Serialize) -> Self {
        self.witness = serde_json::to_value(w).ok();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub p: Vec<f64>,
    pub exact_limit: usize,
    pub tol_overrides: BTreeMap<String, f64>,
    pub params: BTreeMap<String, String>,
    /// Wall time in milliseconds, only when requested.
    pub timing_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub space: String,
    pub points: usize,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    /// Checks that did not apply to this input, with the reason.
    pub skipped: Vec<String>,
    pub environment: Environment,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&sorted(v)).expect("value serializes");
        s.push('\n');
        s
    }
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let b: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(b.into_iter().collect::<Map<String, Value>>())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}
