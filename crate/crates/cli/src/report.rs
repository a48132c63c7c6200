//! Report document and plot data.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use nslab_core::ExtReal;

use crate::config::{CheckName, CheckSpec, RunConfig};
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// The check's precondition does not hold, and no expectation said so.
    Inapplicable,
    SearchFailure,
    Violation,
    /// Parameters the check could not work with.
    Error,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inapplicable => "inapplicable",
            Verdict::SearchFailure => "search_failure",
            Verdict::Violation => "violation",
            Verdict::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub scale: f64,
    pub value: Option<ExtReal>,
}

/// A sampled limit: values at shrinking scales and the classified limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub quantity: String,
    pub points: Vec<TracePoint>,
    pub value: Option<ExtReal>,
}

impl Trace {
    pub fn new(quantity: impl Into<String>, points: impl IntoIterator<Item = (f64, Option<ExtReal>)>, value: Option<ExtReal>) -> Trace {
        Trace {
            quantity: quantity.into(),
            points: points.into_iter().map(|(scale, value)| TracePoint { scale, value }).collect(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub index: usize,
    pub name: CheckName,
    /// The check as requested.
    pub params: CheckSpec,
    pub verdict: Verdict,
    /// Short machine-readable finding, e.g. `agree`, `not_accessible`, `+inf`.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub traces: Vec<Trace>,
    /// Full result of the underlying computation.
    pub details: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_id: Option<String>,
    pub source: String,
    pub dim: usize,
    pub convex: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub inapplicable: usize,
    pub search_failure: usize,
    pub violation: usize,
    pub error: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: RunConfig,
    pub function: FunctionInfo,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
    pub exit_code: i32,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_SEARCH_FAILURE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Violations take precedence over search failures, which take precedence
/// over parameter errors.
pub fn exit_code(checks: &[CheckResult]) -> i32 {
    let has = |v: Verdict| checks.iter().any(|c| c.verdict == v);
    if has(Verdict::Violation) {
        EXIT_VIOLATION
    } else if has(Verdict::SearchFailure) {
        EXIT_SEARCH_FAILURE
    } else if has(Verdict::Error) {
        EXIT_CONFIG
    } else {
        EXIT_PASS
    }
}

pub fn summarize(checks: &[CheckResult]) -> Summary {
    let mut s = Summary::default();
    for c in checks {
        match c.verdict {
            Verdict::Pass => s.pass += 1,
            Verdict::Inapplicable => s.inapplicable += 1,
            Verdict::SearchFailure => s.search_failure += 1,
            Verdict::Violation => s.violation += 1,
            Verdict::Error => s.error += 1,
        }
    }
    s
}

impl ReportDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<ReportDocument> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::io(path, e))
    }

    /// Every trace named `quantity`, with the index of its check.
    pub fn traces(&self, quantity: &str) -> Vec<(usize, &Trace)> {
        self.checks
            .iter()
            .flat_map(|c| c.traces.iter().filter(|t| t.quantity == quantity).map(move |t| (c.index, t)))
            .collect()
    }
}

fn cell(v: Option<ExtReal>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// CSV `check,scale,value` of every trace named `quantity`; unresolved
/// values are left empty and infinities are written as `+inf`/`-inf`.
pub fn plot_csv(report: &ReportDocument, quantity: &str) -> Result<String> {
    let traces = report.traces(quantity);
    if traces.is_empty() {
        let known: Vec<&str> = report
            .checks
            .iter()
            .flat_map(|c| c.traces.iter().map(|t| t.quantity.as_str()))
            .collect();
        return Err(CliError::Config(format!(
            "quantity '{}' is not in the report (available: {})",
            quantity,
            if known.is_empty() { "none".to_string() } else { known.join(", ") }
        )));
    }
    let mut out = String::from("check,scale,value\n");
    for (i, t) in traces {
        for p in &t.points {
            let _ = writeln!(out, "{},{:e},{}", i, p.scale, cell(p.value));
        }
    }
    Ok(out)
}

pub fn emit_plot_data(report: &ReportDocument, quantity: &str, path: &Path) -> Result<()> {
    let csv = plot_csv(report, quantity)?;
    std::fs::write(path, csv).map_err(|e| CliError::io(path, e))
}
