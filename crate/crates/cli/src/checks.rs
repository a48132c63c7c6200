//! Execution of single checks.

use serde::Serialize;

use nslab_core::duality::{
    convex_radial_formula, default_alpha_grid, duality_check, lower_bound_check, treiman_check, FormulaReport,
    LimsupTrace, Verdict as DualVerdict,
};
use nslab_core::subderiv::{check_diagram, radial_access_check, DiagramReport, Kind, SubderivEstimate};
use nslab_core::variational::checker::{check_link, check_sequence};
use nslab_core::variational::{
    directional_density_search, ekeland, mean_value_point, radial_stability_check, subgradient_link_search, GridDomain,
    GridShape, SearchOptions, MVI_TOL,
};
use nslab_core::{Error as CoreError, ExtReal, FunctionSpec};

use crate::config::{CheckName, CheckSpec, Overrides, ResolvedFunction};
use crate::report::{CheckResult, Trace, Verdict};

const TREIMAN_EPS: [f64; 3] = [0.1, 0.01, 0.001];
const DEFAULT_EKELAND_EPS: f64 = 0.05;
const DEFAULT_EKELAND_LAMBDA: f64 = 0.25;
/// Grid points per axis for Ekeland grids in two or three dimensions.
const MULTI_DIM_RESOLUTION: usize = 101;

/// What a check found, before any declared expectation is applied.
struct Finding {
    verdict: Verdict,
    outcome: String,
    traces: Vec<Trace>,
    details: serde_json::Value,
    message: Option<String>,
}

impl Finding {
    fn new(verdict: Verdict, outcome: impl Into<String>, details: impl Serialize) -> Finding {
        Finding {
            verdict,
            outcome: outcome.into(),
            traces: Vec::new(),
            details: serde_json::to_value(details).unwrap_or(serde_json::Value::Null),
            message: None,
        }
    }

    fn traces(mut self, traces: Vec<Trace>) -> Finding {
        self.traces = traces;
        self
    }

    fn from_error(e: CoreError) -> Finding {
        let (verdict, outcome) = match e {
            CoreError::Precondition(_) => (Verdict::Inapplicable, "precondition_rejected"),
            CoreError::SearchFailure { .. } | CoreError::NoSamples(_) => (Verdict::SearchFailure, "search_failed"),
            _ => (Verdict::Error, "error"),
        };
        let mut f = Finding::new(verdict, outcome, serde_json::Value::Null);
        f.message = Some(e.to_string());
        f
    }

    fn not_accessible(gap: ExtReal) -> Finding {
        let mut f = Finding::new(Verdict::Inapplicable, "not_accessible", serde_json::json!({ "gap": gap }));
        f.message = Some(format!("f is not radially accessible here (gap {})", gap));
        f
    }
}

fn value_text(v: Option<ExtReal>) -> String {
    v.map_or_else(|| "unresolved".to_string(), |v| v.to_string())
}

fn kind_of(name: CheckName) -> Option<Kind> {
    match name {
        CheckName::RadialLower => Some(Kind::RadialLower),
        CheckName::RadialUpper => Some(Kind::RadialUpper),
        CheckName::DiniHadamard => Some(Kind::DiniHadamard),
        CheckName::Clarke => Some(Kind::Clarke),
        CheckName::ClarkeRockafellar => Some(Kind::ClarkeRockafellar),
        _ => None,
    }
}

/// Trace name of a subderivative kind.
pub fn kind_trace_name(kind: Kind) -> &'static str {
    match kind {
        Kind::RadialLower => "f_r",
        Kind::RadialUpper => "f_r_plus",
        Kind::DiniHadamard => "f_d",
        Kind::Clarke => "f_0",
        Kind::ClarkeRockafellar => "f_up",
    }
}

fn estimate_trace(e: &SubderivEstimate) -> Trace {
    Trace::new(
        kind_trace_name(e.kind),
        e.scales.iter().cloned().zip(e.band_values.iter().cloned()),
        e.value,
    )
}

fn limsup_trace(name: impl Into<String>, t: &LimsupTrace) -> Trace {
    Trace::new(name, t.levels.iter().cloned(), t.value)
}

fn formula_traces(r: &FormulaReport) -> Vec<Trace> {
    r.per_alpha
        .iter()
        .map(|a| limsup_trace(format!("alpha_{}", a.alpha), &a.trace))
        .collect()
}

fn formula_finding(r: FormulaReport, need_monotone: bool) -> Finding {
    let (verdict, outcome) = match r.holds {
        Some(true) if !need_monotone || r.nonincreasing => (Verdict::Pass, "holds"),
        Some(true) => (Verdict::Violation, "not_monotone"),
        Some(false) => (Verdict::Violation, "fails"),
        None => (Verdict::SearchFailure, "unresolved"),
    };
    let traces = formula_traces(&r);
    Finding::new(verdict, outcome, &r).traces(traces)
}

fn holds_finding(holds: Option<bool>, details: impl Serialize) -> Finding {
    match holds {
        Some(true) => Finding::new(Verdict::Pass, "holds", details),
        Some(false) => Finding::new(Verdict::Violation, "fails", details),
        None => Finding::new(Verdict::SearchFailure, "unresolved", details),
    }
}

struct Ctx<'a> {
    f: &'a FunctionSpec,
    func: &'a ResolvedFunction,
    spec: &'a CheckSpec,
    ov: &'a Overrides,
}

impl Ctx<'_> {
    fn point(&self) -> Vec<f64> {
        self.spec.point.clone().unwrap_or_else(|| vec![0.0; self.f.dim])
    }

    fn u(&self) -> Vec<f64> {
        self.spec.u.clone().unwrap_or_else(|| {
            let mut e = vec![0.0; self.f.dim];
            e[0] = 1.0;
            e
        })
    }

    fn alphas(&self) -> Vec<f64> {
        self.spec.alphas.clone().unwrap_or_else(default_alpha_grid)
    }

    fn levels(&self) -> usize {
        self.spec.levels.unwrap_or(self.ov.levels)
    }

    fn search(&self) -> SearchOptions {
        SearchOptions {
            radial_only: self.spec.radial_only.unwrap_or(false),
            ..self.ov.search.clone()
        }
    }

    fn resolution(&self) -> usize {
        self.spec.resolution.unwrap_or(if self.f.dim == 1 {
            self.ov.resolution
        } else {
            self.ov.resolution.min(MULTI_DIM_RESOLUTION)
        })
    }

    /// `Some(finding)` when `f` is not radially accessible at the point.
    fn require_access(&self, x: &[f64], u: &[f64]) -> Result<Option<Finding>, CoreError> {
        let a = radial_access_check(self.f, x, u, &self.ov.estimators.schedule)?;
        Ok((!a.accessible).then(|| Finding::not_accessible(a.gap)))
    }
}

fn diagram_cases(cx: &Ctx) -> Vec<(Vec<f64>, Vec<f64>)> {
    let s = cx.spec;
    if s.points.is_none() && s.directions.is_none() && !cx.func.cases.is_empty() {
        return cx.func.cases.clone();
    }
    let points = s.points.clone().unwrap_or_else(|| vec![cx.point()]);
    let dirs = s.directions.clone().unwrap_or_else(|| {
        (0..cx.f.dim)
            .flat_map(|i| {
                [1.0, -1.0].map(|sign| {
                    let mut e = vec![0.0; cx.f.dim];
                    e[i] = sign;
                    e
                })
            })
            .collect()
    });
    points
        .iter()
        .flat_map(|p| dirs.iter().map(move |d| (p.clone(), d.clone())))
        .collect()
}

fn run_diagram(cx: &Ctx) -> Result<Finding, CoreError> {
    let mut report = DiagramReport { cases: Vec::new() };
    for (p, d) in diagram_cases(cx) {
        let r = check_diagram(cx.f, &[p], &[d], &cx.ov.estimators)?;
        report.cases.extend(r.cases);
    }
    let n = report.violation_count();
    Ok(if n == 0 {
        Finding::new(Verdict::Pass, "ordered", &report)
    } else {
        Finding::new(Verdict::Violation, format!("violations:{}", n), &report)
    })
}

fn run_finding(cx: &Ctx) -> Result<Finding, CoreError> {
    let f = cx.f;
    let ov = cx.ov;
    let sched = &ov.estimators.schedule;
    let (x, u) = (cx.point(), cx.u());
    if let Some(kind) = kind_of(cx.spec.name) {
        let e = ov.estimators.estimate(kind, f, &x, &u)?;
        let verdict = if e.value.is_some() { Verdict::Pass } else { Verdict::SearchFailure };
        let trace = estimate_trace(&e);
        return Ok(Finding::new(verdict, value_text(e.value), &e).traces(vec![trace]));
    }
    Ok(match cx.spec.name {
        CheckName::Diagram => run_diagram(cx)?,
        CheckName::Duality => {
            let v = cx.spec.v.clone().unwrap_or_else(|| u.clone());
            let alpha = cx.spec.alpha.unwrap_or(0.0);
            let r = duality_check(f, &x, &u, &v, alpha, &ov.drop, &ov.inner)?;
            let (verdict, outcome) = match r.verdict {
                DualVerdict::Agree => (Verdict::Pass, "agree"),
                DualVerdict::Disagree => (Verdict::Violation, "disagree"),
                DualVerdict::Unresolved => (Verdict::SearchFailure, "unresolved"),
            };
            let traces = r.quantities.iter().map(|q| limsup_trace(q.quantity.name(), &q.trace)).collect();
            Finding::new(verdict, outcome, &r).traces(traces)
        }
        CheckName::Treiman => {
            let eps = cx.spec.eps_grid.clone().unwrap_or_else(|| TREIMAN_EPS.to_vec());
            let r = treiman_check(f, &x, &u, &ov.estimators, &eps, &ov.drop, &ov.inner)?;
            let traces = r
                .per_eps
                .iter()
                .map(|(e, t)| limsup_trace(format!("treiman_eps_{}", e), t))
                .collect();
            holds_finding(r.holds, &r).traces(traces)
        }
        CheckName::ConvexFormula => {
            if !f.convex {
                let mut fd = Finding::new(Verdict::Inapplicable, "not_convex", serde_json::Value::Null);
                fd.message = Some("the function is not flagged convex".into());
                return Ok(fd);
            }
            let r = convex_radial_formula(f, &x, &u, &cx.alphas(), &ov.drop, sched, &ov.inner)?;
            formula_finding(r, true)
        }
        CheckName::LowerBound => {
            if let Some(fd) = cx.require_access(&x, &u)? {
                return Ok(fd);
            }
            let r = lower_bound_check(f, &x, &u, &cx.alphas(), &ov.drop, sched, &ov.inner)?;
            formula_finding(r, false)
        }
        CheckName::Accessibility => {
            let a = radial_access_check(f, &x, &u, sched)?;
            let outcome = if a.accessible { "accessible" } else { "not_accessible" };
            let trace = Trace::new(
                "f_ray",
                sched.scales().into_iter().zip(a.band_values.iter().cloned()),
                None,
            );
            Finding::new(Verdict::Pass, outcome, &a).traces(vec![trace])
        }
        CheckName::Density => {
            if let Some(fd) = cx.require_access(&x, &u)? {
                return Ok(fd);
            }
            let seq = directional_density_search(f, &x, &u, cx.levels(), &cx.search())?;
            let check = check_sequence(f, &seq);
            let details = serde_json::json!({ "sequence": seq, "checker": check });
            if !seq.complete() {
                Finding::new(Verdict::SearchFailure, "failed", details)
            } else if !check.ok() {
                Finding::new(Verdict::Violation, "checker_rejected", details)
            } else {
                Finding::new(Verdict::Pass, "complete", details)
            }
        }
        CheckName::Ekeland => {
            let grid = cx.spec.grid.clone().unwrap_or_else(|| f.bbox.clone());
            let s = GridDomain {
                shape: GridShape::Box(grid),
                resolution: cx.resolution(),
            };
            let eps = cx.spec.eps.unwrap_or(DEFAULT_EKELAND_EPS);
            let lambda = cx.spec.lambda.unwrap_or(DEFAULT_EKELAND_LAMBDA);
            let r = ekeland(f, &s, &x, eps, lambda)?;
            let verdict = if r.verification.all() { Verdict::Pass } else { Verdict::Violation };
            let outcome = if r.verification.all() { "verified" } else { "fails" };
            Finding::new(verdict, outcome, &r)
        }
        CheckName::Mvi => {
            let xbar = cx.spec.target.clone().unwrap_or_default();
            let fx = f.evaluate(&x)?;
            let fbar = f.evaluate(&xbar)?;
            let lambda = match cx.spec.lambda {
                Some(l) => l,
                None => match fbar.checked_sub(fx)? {
                    ExtReal::Finite(d) => d,
                    _ => 1.0,
                },
            };
            let r = mean_value_point(f, &x, &xbar, lambda, cx.resolution(), sched)?;
            // recheck the two inequalities from the returned data
            let fx = fx.finite().unwrap_or(f64::INFINITY);
            let value_ok = r.f_x0 <= fx + r.t0 * lambda + MVI_TOL;
            let slope_ok = ExtReal::Finite(lambda).le_within(r.radial, MVI_TOL);
            if value_ok && slope_ok {
                Finding::new(Verdict::Pass, "found", &r)
            } else {
                Finding::new(Verdict::Violation, "fails", &r)
            }
        }
        CheckName::Stability => {
            if let Some(fd) = cx.require_access(&x, &u)? {
                return Ok(fd);
            }
            let r = radial_stability_check(f, &x, &u, sched)?;
            let trace = Trace::new("stability_f_r", r.witnesses.iter().map(|w| (w.mu, w.radial)), r.rhs);
            holds_finding(r.holds, &r).traces(vec![trace])
        }
        CheckName::Link => {
            let refined = cx.spec.refined.unwrap_or(false);
            if refined {
                if let Some(fd) = cx.require_access(&x, &u)? {
                    return Ok(fd);
                }
            }
            let alphas = if refined { cx.alphas() } else { vec![0.0] };
            let r = subgradient_link_search(f, &x, &u, &alphas, cx.levels(), refined, &cx.search())?;
            let seq_check = check_sequence(f, &r.sequence);
            let link_check = r.lhs.map(|l| check_link(&r.sequence, l, &alphas));
            let details = serde_json::json!({ "link": r, "checker": seq_check, "link_checker": link_check });
            if !r.sequence.complete() {
                Finding::new(Verdict::SearchFailure, "failed", details)
            } else if !seq_check.ok() {
                Finding::new(Verdict::Violation, "checker_rejected", details)
            } else {
                match r.holds {
                    Some(true) if link_check.as_ref().map_or(false, |c| c.ok()) => {
                        Finding::new(Verdict::Pass, "holds", details)
                    }
                    Some(true) => Finding::new(Verdict::Violation, "checker_rejected", details),
                    Some(false) => Finding::new(Verdict::Violation, "fails", details),
                    None => Finding::new(Verdict::SearchFailure, "unresolved", details),
                }
            }
        }
        _ => unreachable!("subderivative kinds are handled above"),
    })
}

/// Whether an outcome matches a declared expectation: numerically within
/// `tol` when both read as extended reals, literally otherwise.
pub fn matches_expectation(outcome: &str, expect: &str, tol: f64) -> bool {
    match (outcome.parse::<ExtReal>(), expect.parse::<ExtReal>()) {
        (Ok(a), Ok(b)) => a.close_to(b, tol),
        _ => outcome == expect,
    }
}

/// Runs one check. Errors of the underlying computation become verdicts.
pub fn run_check(index: usize, func: &ResolvedFunction, spec: &CheckSpec, ov: &Overrides) -> CheckResult {
    let cx = Ctx {
        f: &func.spec,
        func,
        spec,
        ov,
    };
    let mut fd = run_finding(&cx).unwrap_or_else(Finding::from_error);
    if let Some(expect) = &spec.expect {
        if fd.verdict != Verdict::Error {
            let ok = matches_expectation(&fd.outcome, expect, ov.tolerance);
            fd.verdict = if ok { Verdict::Pass } else { Verdict::Violation };
        }
    }
    CheckResult {
        index,
        name: spec.name,
        params: spec.clone(),
        verdict: fd.verdict,
        outcome: fd.outcome,
        expected: spec.expect.clone(),
        traces: fd.traces,
        details: fd.details,
        message: fd.message,
        wall_time_ms: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations() {
        assert!(matches_expectation("+inf", "inf", 1e-3));
        assert!(matches_expectation("-0.9995", "-1", 1e-3));
        assert!(!matches_expectation("-0.99", "-1", 1e-3));
        assert!(matches_expectation("not_accessible", "not_accessible", 1e-3));
        assert!(!matches_expectation("accessible", "not_accessible", 1e-3));
    }
}
