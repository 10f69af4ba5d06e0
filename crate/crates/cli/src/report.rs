//! Report model shared by every subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use lieforge::catalog::{Manifest, Status};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    DocumentedDiscrepancy,
    Unexpected,
}

/// What a check produced, before it is compared with the manifest.
#[derive(Clone, Debug, Default)]
pub struct Observation {
    pub passed: bool,
    pub residual: Option<String>,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    pub data: Option<Value>,
}

impl Observation {
    pub fn pass(detail: impl Into<String>) -> Self {
        Observation { passed: true, detail: detail.into(), ..Default::default() }
    }

    pub fn fail(detail: impl Into<String>, residual: Option<String>) -> Self {
        Observation { passed: false, residual, detail: detail.into(), ..Default::default() }
    }

    pub fn from_bool(passed: bool, detail: impl Into<String>, residual: Option<String>) -> Self {
        Observation { passed, residual: if passed { None } else { residual }, detail: detail.into(), ..Default::default() }
    }

    pub fn error(e: impl std::fmt::Display) -> Self {
        Observation::fail(format!("error: {e}"), Some(format!("error: {e}")))
    }

    pub fn metric(mut self, k: &str, v: f64) -> Self {
        self.metrics.insert(k.to_string(), v);
        self
    }

    pub fn with_data(mut self, v: Value) -> Self {
        self.data = Some(v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub category: String,
    pub verdict: Verdict,
    pub expected: Status,
    pub observed: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recorded_residual: Option<String>,
    pub detail: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

/// Compares an observation with its manifest entry. Recorded residuals are
/// only compared when `exact_residuals` is set, i.e. under the manifest's
/// own parameters.
pub fn judge(id: &str, category: &str, obs: Observation, manifest: &Manifest, exact_residuals: bool) -> Item {
    let expected = manifest.expected(id);
    let status = expected.map_or(Status::Pass, |e| e.status);
    let recorded = expected.and_then(|e| e.residual.clone());
    let verdict = match (status, obs.passed) {
        (Status::Pass, true) => Verdict::Pass,
        (Status::DocumentedDiscrepancy, false) => {
            let same = !exact_residuals || recorded.is_none() || recorded == obs.residual;
            if same {
                Verdict::DocumentedDiscrepancy
            } else {
                Verdict::Unexpected
            }
        }
        _ => Verdict::Unexpected,
    };
    Item {
        id: id.to_string(),
        category: category.to_string(),
        verdict,
        expected: status,
        observed: if obs.passed { Outcome::Pass } else { Outcome::Fail },
        residual: obs.residual,
        recorded_residual: recorded,
        detail: obs.detail,
        metrics: obs.metrics,
        data: obs.data,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub documented_discrepancy: usize,
    pub unexpected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub params: String,
    pub spec: String,
    pub seed: u64,
    pub items: Vec<Item>,
    pub summary: Summary,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str, params: String, spec: String, seed: u64, items: Vec<Item>) -> Self {
        let mut summary = Summary::default();
        for it in &items {
            match it.verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::DocumentedDiscrepancy => summary.documented_discrepancy += 1,
                Verdict::Unexpected => summary.unexpected += 1,
            }
        }
        let exit_code = if summary.unexpected == 0 { 0 } else { 1 };
        Report { schema_version: SCHEMA_VERSION, command: command.into(), params, spec, seed, items, summary, exit_code }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lieforge {}  params {}  spec {}  seed {}", self.command, self.params, self.spec, self.seed);
        for it in &self.items {
            let tag = match it.verdict {
                Verdict::Pass => "pass",
                Verdict::DocumentedDiscrepancy => "documented-discrepancy",
                Verdict::Unexpected => "UNEXPECTED",
            };
            let _ = writeln!(s, "[{tag}] {}: {}", it.id, it.detail);
            if let Some(r) = &it.residual {
                let _ = writeln!(s, "    residual: {r}");
            }
            if it.verdict == Verdict::Unexpected {
                if let Some(r) = &it.recorded_residual {
                    let _ = writeln!(s, "    recorded: {r}");
                }
            }
        }
        let _ = writeln!(
            s,
            "{} pass, {} documented discrepancies, {} unexpected",
            self.summary.pass, self.summary.documented_discrepancy, self.summary.unexpected
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lieforge::catalog::Expected;

    fn manifest() -> Manifest {
        let mut m = lieforge::catalog::Catalog::embedded().unwrap().manifest;
        m.expected.clear();
        m.expected.insert(
            "x".into(),
            Expected { status: Status::DocumentedDiscrepancy, residual: Some("r".into()), note: None },
        );
        m
    }

    #[test]
    fn verdict_matrix() {
        let m = manifest();
        let v = |id: &str, o: Observation, exact| judge(id, "t", o, &m, exact).verdict;
        assert_eq!(v("y", Observation::pass(""), true), Verdict::Pass);
        assert_eq!(v("y", Observation::fail("", None), true), Verdict::Unexpected);
        assert_eq!(v("x", Observation::pass(""), true), Verdict::Unexpected);
        assert_eq!(v("x", Observation::fail("", Some("r".into())), true), Verdict::DocumentedDiscrepancy);
        assert_eq!(v("x", Observation::fail("", Some("s".into())), true), Verdict::Unexpected);
        assert_eq!(v("x", Observation::fail("", Some("s".into())), false), Verdict::DocumentedDiscrepancy);
    }

    #[test]
    fn summary_and_exit_code() {
        let m = manifest();
        let items = vec![
            judge("a", "t", Observation::pass(""), &m, true),
            judge("x", "t", Observation::fail("", Some("r".into())), &m, true),
        ];
        let r = Report::new("audit", "p".into(), "s".into(), 1, items.clone());
        assert_eq!((r.summary.pass, r.summary.documented_discrepancy, r.exit_code), (1, 1, 0));
        let mut items = items;
        items.push(judge("b", "t", Observation::error("boom"), &m, true));
        let r = Report::new("audit", "p".into(), "s".into(), 1, items);
        assert_eq!(r.exit_code, 1);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_text().contains("[UNEXPECTED] b: error: boom"));
    }
}
