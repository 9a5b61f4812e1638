//! Experiment reports: JSON for machines, aligned text for people.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version of the report layout documented in `docs/report.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Demonstrations without pass/fail semantics.
    Info,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

/// The value an estimate is confronted with and where it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub value: f64,
    /// Exact rational form, when known.
    pub exact: Option<String>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    /// `"z"`, `"ks"` or `"exact"`.
    pub kind: String,
    pub value: f64,
    pub p_value: Option<f64>,
}

/// One named pass/fail condition; the verdict is the conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    /// The identity or property under test.
    pub anchor: String,
    pub parameters: BTreeMap<String, Value>,
    pub estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub target: Option<Target>,
    pub statistic: Option<Statistic>,
    /// Human-readable acceptance rule with its numeric threshold.
    pub threshold: Option<String>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub diagnostics: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn new(name: &str, anchor: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            anchor: anchor.into(),
            parameters: BTreeMap::new(),
            estimate: None,
            standard_error: None,
            target: None,
            statistic: None,
            threshold: None,
            checks: Vec::new(),
            verdict: Verdict::Info,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.diagnostics.insert(key.into(), serde_json::to_value(value).expect("serializable diagnostic"));
        self
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    /// Verdict from the checks: pass iff every check passes.
    pub fn conclude(&mut self) -> &mut Self {
        self.verdict = if self.checks.iter().all(|c| c.passed) { Verdict::Pass } else { Verdict::Fail };
        self
    }

    /// Marks the report as a demonstration without pass/fail semantics.
    pub fn informational(&mut self) -> &mut Self {
        self.verdict = Verdict::Info;
        self
    }

    /// Copy with the runtime zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self { runtime_seconds: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Aligned `key  value` listing.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("experiment".into(), self.name.clone()),
            ("anchor".into(), self.anchor.clone()),
        ];
        for (k, v) in &self.parameters {
            rows.push((format!("param.{k}"), compact(v)));
        }
        if let Some(e) = self.estimate {
            rows.push(("estimate".into(), format!("{e:.6}")));
        }
        if let Some(se) = self.standard_error {
            rows.push(("standard_error".into(), format!("{se:.6}")));
        }
        if let Some(t) = &self.target {
            let exact = t.exact.as_ref().map(|e| format!(" (= {e})")).unwrap_or_default();
            rows.push(("target".into(), format!("{:.6}{exact} [{}]", t.value, t.provenance)));
        }
        if let Some(s) = &self.statistic {
            let p = s.p_value.map(|p| format!(", p = {p:.4}")).unwrap_or_default();
            rows.push(("statistic".into(), format!("{} = {:.4}{p}", s.kind, s.value)));
        }
        if let Some(t) = &self.threshold {
            rows.push(("threshold".into(), t.clone()));
        }
        for c in &self.checks {
            let mark = if c.passed { "ok" } else { "FAILED" };
            rows.push((format!("check.{}", c.name), format!("{mark}  {}", c.detail)));
        }
        for (k, v) in &self.diagnostics {
            rows.push((format!("diag.{k}"), compact(v)));
        }
        for n in &self.notes {
            rows.push(("note".into(), n.clone()));
        }
        rows.push(("runtime_seconds".into(), format!("{:.3}", self.runtime_seconds)));
        rows.push(("verdict".into(), format!("{:?}", self.verdict).to_uppercase()));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_checks() {
        let mut r = ExperimentReport::new("demo", "anchor");
        r.check("a", true, "").conclude();
        assert_eq!(r.verdict, Verdict::Pass);
        r.check("b", false, "").conclude();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn json_round_trip_and_text() {
        let mut r = ExperimentReport::new("demo", "anchor");
        r.param("walks", 10).diagnostic("ladder", vec![1, 2]);
        r.estimate = Some(0.5);
        r.target = Some(Target { value: 0.5, exact: Some("1/2".into()), provenance: "exact".into() });
        r.runtime_seconds = 1.5;
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.without_runtime().runtime_seconds, 0.0);
        let text = r.to_text();
        assert!(text.contains("param.walks"));
        assert!(text.contains("(= 1/2)"));
    }
}
