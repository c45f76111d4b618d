//! Comparison of two persisted reports of the same suite.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, Result};

/// Relative growth of a measured constant that counts as a regression.
pub const REGRESSION_REL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub id: String,
    pub old: Option<f64>,
    pub new: Option<f64>,
    pub old_pass: Option<bool>,
    pub new_pass: Option<bool>,
    /// Still passing but measured grew by more than [`REGRESSION_REL`].
    pub regression: bool,
}

pub fn load_report(path: &Path) -> Result<Value> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: name, msg: format!("line {}: {e}", e.line()) })
}

type Entry = (Option<f64>, Option<bool>);

fn checks(report: &Value) -> Result<BTreeMap<String, Entry>> {
    let list = report["checks"].as_array().ok_or_else(|| CliError::Usage("report has no checks array".into()))?;
    Ok(list
        .iter()
        .filter_map(|c| Some((c["id"].as_str()?.to_string(), (c["measured"].as_f64(), c["pass"].as_bool()))))
        .collect())
}

/// Rows for every check whose measured value or pass flag changed; empty for identical reports.
pub fn report_diff(old: &Value, new: &Value) -> Result<Vec<DiffRow>> {
    let (a, b) = (old["suite"].as_str().unwrap_or(""), new["suite"].as_str().unwrap_or(""));
    if a != b {
        return Err(CliError::Mismatch(a.to_string(), b.to_string()));
    }
    let (old, new) = (checks(old)?, checks(new)?);
    let mut ids: Vec<&String> = old.keys().chain(new.keys()).collect();
    ids.sort();
    ids.dedup();
    let mut rows = Vec::new();
    for id in ids {
        let (o, n) = (old.get(id).copied().unwrap_or_default(), new.get(id).copied().unwrap_or_default());
        if o == n {
            continue;
        }
        let regression = match (o.0, n.0, n.1) {
            (Some(x), Some(y), Some(true)) => y > x + REGRESSION_REL * x.abs(),
            _ => false,
        };
        rows.push(DiffRow { id: id.clone(), old: o.0, new: n.0, old_pass: o.1, new_pass: n.1, regression });
    }
    Ok(rows)
}

/// Delta table, one line per row.
pub fn render(rows: &[DiffRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
    let flag = |v: Option<bool>| match v {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "-",
    };
    let mut out = String::new();
    for r in rows {
        let delta = match (r.old, r.new) {
            (Some(a), Some(b)) => format!("{:+.3e}", b - a),
            _ => "-".into(),
        };
        out.push_str(&format!(
            "{:<48} {:>14} -> {:>14}  delta {:>11}  {} -> {}{}\n",
            r.id,
            fmt(r.old),
            fmt(r.new),
            delta,
            flag(r.old_pass),
            flag(r.new_pass),
            if r.regression { "  REGRESSION" } else { "" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rep(suite: &str, checks: Value) -> Value {
        json!({"suite": suite, "checks": checks})
    }

    #[test]
    fn identical_reports_have_empty_diff() {
        let a = rep("sphere", json!([{"id": "x", "measured": 1.0, "pass": true}]));
        assert!(report_diff(&a, &a).unwrap().is_empty());
    }

    #[test]
    fn growth_beyond_one_percent_is_a_regression() {
        let a = rep("s", json!([{"id": "x", "measured": 1.0, "pass": true}, {"id": "y", "measured": 1.0, "pass": true}]));
        let b = rep("s", json!([{"id": "x", "measured": 1.02, "pass": true}, {"id": "y", "measured": 1.005, "pass": true}]));
        let rows = report_diff(&a, &b).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].regression && !rows[1].regression);
        assert!(render(&rows).contains("REGRESSION"));
    }

    #[test]
    fn suite_mismatch() {
        let a = rep("sphere", json!([]));
        let b = rep("whitney", json!([]));
        assert!(matches!(report_diff(&a, &b), Err(CliError::Mismatch(..))));
    }
}
