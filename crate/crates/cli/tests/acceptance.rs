//! Acceptance suite. Prints one line per criterion and fails if any
//! criterion fails. Run with `cargo test -p nslab-cli --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nslab_cli::config::{CheckName, CheckSpec, FunctionSource, OutputConfig, Overrides};
use nslab_cli::report::CheckResult;
use nslab_cli::{run, ReportDocument, RunConfig, Verdict};
use nslab_core::corpus::{corpus_entry, load_corpus, CorpusEntry};
use nslab_core::subdiff::{covector_grid, membership_grid, mr_membership, sample_subgradients, COVECTOR_BOUND, COVECTOR_STEP, FD_STEP};
use nslab_core::variational::{GridDomain, GridShape};
use nslab_core::ExtReal;

const DIAGRAM_TOL: f64 = 1e-3;
const POINT_TOL: f64 = 1e-6;
const LIMSUP_TOL: f64 = 1e-3;
const DUAL_TOL: f64 = 5e-3;
const DIAGRAM_BUDGET: Duration = Duration::from_secs(60);
const ALPHAS: [f64; 3] = [0.0, 1.0, 4.0];
/// Leading corpus cases per function that get the duality checks.
const DUALITY_CASES: usize = 2;
/// Functions rerun on a different worker count for the determinism check.
const RERUN: [&str; 3] = ["neg_abs", "step_up", "neg_sqrt_halfplane"];
const SEEDS: u64 = 10;
const LIPSCHITZ_1D: [&str; 3] = ["neg_abs", "abs", "square"];
const CONVEX: [&str; 3] = ["abs", "square", "indicator"];

fn config(id: &str, checks: Vec<CheckSpec>) -> RunConfig {
    RunConfig {
        function: FunctionSource {
            corpus: Some(id.into()),
            file: None,
        },
        checks,
        overrides: Overrides::default(),
        output: OutputConfig {
            plots: Vec::new(),
            ..OutputConfig::default()
        },
    }
}

fn check(name: CheckName, x: &[f64], u: &[f64]) -> CheckSpec {
    let mut c = CheckSpec::new(name);
    c.point = Some(x.to_vec());
    c.u = Some(u.to_vec());
    c
}

fn cases(e: &CorpusEntry) -> Vec<(Vec<f64>, Vec<f64>)> {
    e.cases.iter().map(|c| (c.point.clone(), c.direction.clone())).collect()
}

/// A point of `dom f` drawn uniformly from the box, or one of its special
/// points when the box draws keep missing the domain.
fn dom_point(e: &CorpusEntry, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..1000 {
        let x: Vec<f64> = e.spec.bbox.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
        if e.spec.dom_value(&x).is_some() {
            return x;
        }
    }
    let (lo, hi) = e.spec.bbox[0];
    let specials: Vec<Vec<f64>> = e
        .spec
        .special_points(lo, hi, 64)
        .into_iter()
        .filter(|p| e.spec.dom_value(p).is_some())
        .collect();
    assert!(!specials.is_empty(), "{} has no sampled domain points", e.id);
    specials[rng.gen_range(0..specials.len())].clone()
}

fn ekeland_resolution(dim: usize) -> usize {
    if dim == 1 {
        2001
    } else {
        101
    }
}

/// Ten seeded Ekeland and mean value configurations over the corpus.
fn variational_checks() -> Vec<(String, CheckSpec)> {
    let entries = load_corpus();
    let mut out = Vec::new();
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = &entries[seed as usize % entries.len()];
        let f = &e.spec;

        let x0 = dom_point(e, &mut rng);
        let res = ekeland_resolution(f.dim);
        let grid = GridDomain {
            shape: GridShape::Box(f.bbox.clone()),
            resolution: res,
        };
        let fmin = grid
            .points(f)
            .unwrap()
            .iter()
            .filter_map(|p| f.dom_value(p))
            .fold(f64::INFINITY, f64::min);
        let mut ek = check(CheckName::Ekeland, &x0, &x0);
        ek.u = None;
        ek.eps = Some(f.dom_value(&x0).unwrap() - fmin.min(f.dom_value(&x0).unwrap()) + rng.gen_range(0.01..0.5));
        ek.lambda = Some(rng.gen_range(0.1..1.0));
        ek.resolution = Some(res);
        out.push((e.id.clone(), ek));

        let x = dom_point(e, &mut rng);
        let xbar = dom_point(e, &mut rng);
        let mut mvi = CheckSpec::new(CheckName::Mvi);
        mvi.point = Some(x);
        mvi.target = Some(xbar);
        out.push((e.id.clone(), mvi));
    }
    out
}

/// Every check of the suite, grouped into one run per corpus function.
fn suite() -> Vec<RunConfig> {
    let variational = variational_checks();
    load_corpus()
        .iter()
        .map(|e| {
            let mut checks = vec![CheckSpec::new(CheckName::Diagram)];
            for (i, (x, u)) in cases(e).into_iter().enumerate() {
                if i < DUALITY_CASES {
                    for v in [vec![0.0; u.len()], u.clone()] {
                        for alpha in ALPHAS {
                            let mut c = check(CheckName::Duality, &x, &u);
                            c.v = Some(v.clone());
                            c.alpha = Some(alpha);
                            checks.push(c);
                        }
                    }
                }
                checks.push(check(CheckName::Treiman, &x, &u));
                checks.push(check(CheckName::LowerBound, &x, &u));
                if e.spec.convex {
                    checks.push(check(CheckName::ConvexFormula, &x, &u));
                }
            }
            checks.extend(variational.iter().filter(|(id, _)| *id == e.id).map(|(_, c)| c.clone()));
            match e.id.as_str() {
                "step_up" => {
                    checks.push(check(CheckName::RadialLower, &[0.0], &[1.0]));
                    checks.push(check(CheckName::RadialLower, &[0.5], &[1.0]));
                    checks.push(check(CheckName::Accessibility, &[0.0], &[1.0]));
                }
                "sqrt_abs" => checks.push(check(CheckName::RadialLower, &[0.0], &[1.0])),
                "neg_sqrt_halfplane" => {
                    checks.push(check(CheckName::Density, &[0.0, 0.0], &[0.0, 1.0]));
                    let mut radial = check(CheckName::Density, &[0.0, 0.0], &[0.0, 1.0]);
                    radial.radial_only = Some(true);
                    checks.push(radial);
                }
                _ => {}
            }
            config(&e.id, checks)
        })
        .collect()
}

struct Suite {
    reports: Vec<ReportDocument>,
}

impl Suite {
    fn results<'a>(&'a self, id: &'a str, name: CheckName) -> impl Iterator<Item = &'a CheckResult> + 'a {
        self.reports
            .iter()
            .filter(move |r| r.function.corpus_id.as_deref() == Some(id))
            .flat_map(|r| r.checks.iter())
            .filter(move |c| c.name == name)
    }

    fn all(&self, name: CheckName) -> impl Iterator<Item = (&str, &CheckResult)> + '_ {
        self.reports.iter().flat_map(move |r| {
            let id = id_of(r);
            r.checks.iter().filter(move |c| c.name == name).map(move |c| (id, c))
        })
    }

    fn find<'a>(&'a self, id: &'a str, name: CheckName, x: &[f64], radial_only: Option<bool>) -> &'a CheckResult {
        self.results(id, name)
            .find(|c| c.params.point.as_deref() == Some(x) && c.params.radial_only == radial_only)
            .unwrap_or_else(|| panic!("{} {} at {:?} is not in the suite", id, name, x))
    }
}

fn run_suite(jobs: Option<usize>) -> Suite {
    Suite {
        reports: suite().iter().map(|c| run(c, jobs).unwrap()).collect(),
    }
}

fn id_of(r: &ReportDocument) -> &str {
    r.function.corpus_id.as_deref().unwrap_or("")
}

fn ext(v: &serde_json::Value) -> Option<ExtReal> {
    serde_json::from_value(v.clone()).ok().flatten()
}

fn describe(id: &str, c: &CheckResult) -> String {
    format!(
        "{} {} x={:?} u={:?} v={:?} alpha={:?}: {} ({})",
        id,
        c.name,
        c.params.point,
        c.params.u,
        c.params.v,
        c.params.alpha,
        c.outcome,
        c.message.as_deref().unwrap_or("")
    )
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn failures_line(total: usize, failures: Vec<String>, minimum: usize) -> Line {
    let mut detail = format!("{} configurations, {} failures", total, failures.len());
    if total < minimum {
        detail.push_str(&format!(", fewer than {}", minimum));
    }
    for f in failures.iter().take(5) {
        detail.push_str(&format!("\n      {}", f));
    }
    line(failures.is_empty() && total >= minimum, detail)
}

/// Violations and errors fail; checks that did not classify are counted
/// but do not. At least `minimum` checks must pass.
fn verdict_line(all: &[(&str, &CheckResult)], minimum: usize) -> Line {
    let count = |v: Verdict| all.iter().filter(|(_, c)| c.verdict == v).count();
    let passed = count(Verdict::Pass);
    let failures: Vec<String> = all
        .iter()
        .filter(|(_, c)| matches!(c.verdict, Verdict::Violation | Verdict::Error))
        .map(|(id, c)| describe(id, c))
        .collect();
    let mut detail = format!(
        "{} configurations, {} pass, {} violations, {} unresolved, {} inapplicable",
        all.len(),
        passed,
        failures.len(),
        count(Verdict::SearchFailure),
        count(Verdict::Inapplicable)
    );
    if passed < minimum {
        detail.push_str(&format!(", fewer than {} pass", minimum));
    }
    for f in failures.iter().take(5) {
        detail.push_str(&format!("\n      {}", f));
    }
    line(failures.is_empty() && passed >= minimum, detail)
}

fn criterion_1() -> Line {
    let configs: Vec<RunConfig> = load_corpus()
        .iter()
        .map(|e| config(&e.id, vec![CheckSpec::new(CheckName::Diagram)]))
        .collect();
    let start = Instant::now();
    let reports: Vec<ReportDocument> = configs.iter().map(|c| run(c, Some(1)).unwrap()).collect();
    let elapsed = start.elapsed();
    let mut total = 0;
    let mut failures = Vec::new();
    for r in &reports {
        let c = &r.checks[0];
        let cases = c.details["cases"].as_array().map_or(0, Vec::len);
        total += cases;
        if c.verdict != Verdict::Pass {
            failures.push(describe(id_of(r), c));
        }
    }
    let mut l = failures_line(total, failures, 60);
    l.ok &= elapsed < DIAGRAM_BUDGET;
    l.detail.push_str(&format!(", {:.1} s single-threaded (tol {})", elapsed.as_secs_f64(), DIAGRAM_TOL));
    l
}

fn outcome(c: &CheckResult) -> Option<ExtReal> {
    c.outcome.parse().ok()
}

fn limsup(s: &Suite, v: &[f64]) -> Option<ExtReal> {
    s.results("neg_abs", CheckName::Duality)
        .find(|c| {
            c.params.point.as_deref() == Some(&[0.0][..])
                && c.params.u.as_deref() == Some(&[1.0][..])
                && c.params.v.as_deref() == Some(v)
                && c.params.alpha == Some(0.0)
        })
        .and_then(|c| c.traces.iter().find(|t| t.quantity == "lhs_fr"))
        .and_then(|t| t.value)
}

fn criterion_2(s: &Suite) -> Line {
    let step0 = outcome(s.find("step_up", CheckName::RadialLower, &[0.0], None));
    let step_half = outcome(s.find("step_up", CheckName::RadialLower, &[0.5], None));
    let sqrt0 = outcome(s.find("sqrt_abs", CheckName::RadialLower, &[0.0], None));
    let drop = limsup(s, &[1.0]);
    let ball = limsup(s, &[0.0]);
    let ok = step0 == Some(ExtReal::PosInf)
        && step_half.map_or(false, |v| v.close_to(ExtReal::Finite(0.0), POINT_TOL))
        && sqrt0 == Some(ExtReal::PosInf)
        && drop.map_or(false, |v| v.close_to(ExtReal::Finite(-1.0), LIMSUP_TOL))
        && ball.map_or(false, |v| v.close_to(ExtReal::Finite(1.0), LIMSUP_TOL));
    let show = |v: Option<ExtReal>| v.map_or("unresolved".to_string(), |v| v.to_string());
    line(
        ok,
        format!(
            "step_up f_r(0;1)={} f_r(0.5;1)={}, sqrt_abs f_r(0;1)={}, neg_abs drop limsup {} vs ball limsup {}",
            show(step0),
            show(step_half),
            show(sqrt0),
            show(drop),
            show(ball)
        ),
    )
}

fn criterion_3(s: &Suite) -> Line {
    let all: Vec<_> = s.all(CheckName::Duality).collect();
    let mut l = verdict_line(&all, 30);
    l.detail.push_str(&format!(" (tol {})", DUAL_TOL));
    l
}

fn criterion_4(s: &Suite) -> Line {
    let all: Vec<_> = s.all(CheckName::Treiman).collect();
    let mut l = verdict_line(&all, 1);
    let mut failures = Vec::new();
    let mut equalities = 0;
    for (id, c) in all.iter().filter(|(_, c)| c.verdict == Verdict::Pass) {
        if LIPSCHITZ_1D.contains(id) {
            equalities += 1;
            let (lhs, rhs) = (ext(&c.details["lhs"]), ext(&c.details["rhs"]));
            let equal = matches!((lhs, rhs), (Some(a), Some(b)) if a.close_to(b, DUAL_TOL));
            if !equal {
                failures.push(format!("{} not an equality: lhs {:?} rhs {:?}", describe(id, c), lhs, rhs));
            }
        }
    }
    l.ok &= failures.is_empty() && equalities > 0;
    l.detail.push_str(&format!(", {} equality checks (tol {})", equalities, DUAL_TOL));
    for f in failures.iter().take(5) {
        l.detail.push_str(&format!("\n      {}", f));
    }
    l
}

fn criterion_5(s: &Suite) -> Line {
    let mut total = 0;
    let mut failures = Vec::new();
    for id in CONVEX {
        for c in s.results(id, CheckName::ConvexFormula) {
            total += 1;
            let (lhs, rhs) = (ext(&c.details["lhs"]), ext(&c.details["rhs"]));
            let close = matches!((lhs, rhs), (Some(a), Some(b)) if a.close_to(b, DUAL_TOL));
            let monotone = c.details["nonincreasing"].as_bool() == Some(true);
            if c.verdict != Verdict::Pass || !close || !monotone {
                failures.push(format!("{} lhs {:?} rhs {:?}", describe(id, c), lhs, rhs));
            }
        }
    }
    let convex_ids: Vec<String> = load_corpus().into_iter().filter(|e| e.spec.convex).map(|e| e.id).collect();
    let mut l = failures_line(total, failures, 3);
    l.ok &= convex_ids == CONVEX;
    l.detail.push_str(&format!(", convex entries {:?}", convex_ids));
    l
}

fn criterion_6(s: &Suite) -> Line {
    let all: Vec<_> = s.all(CheckName::LowerBound).collect();
    let accessible: Vec<_> = all.iter().filter(|(_, c)| c.outcome != "not_accessible").copied().collect();
    let rejected = s.find("step_up", CheckName::Accessibility, &[0.0], None).outcome == "not_accessible"
        && s.results("step_up", CheckName::LowerBound)
            .filter(|c| c.params.point.as_deref() == Some(&[0.0][..]) && c.params.u.as_deref() == Some(&[1.0][..]))
            .all(|c| c.outcome == "not_accessible");
    let mut l = verdict_line(&accessible, 1);
    l.ok &= rejected;
    l.detail.push_str(&format!(
        " ({} rejected as not accessible), step_up (0;1) rejected: {}",
        all.len() - accessible.len(),
        rejected
    ));
    l
}

fn criterion_7(s: &Suite) -> Line {
    let half = corpus_entry("neg_sqrt_halfplane").unwrap();
    let x = [0.0, 0.5];
    let tests = membership_grid(&half.spec, &x, 41);
    let grid = covector_grid(2, COVECTOR_BOUND, COVECTOR_STEP);
    let accepted = grid
        .iter()
        .filter(|xs| mr_membership(&half.spec, &x, xs, &tests).unwrap())
        .count();

    let zeros = corpus_entry("countable_zeros_inf").unwrap();
    let c = [1.0 / 3.0];
    let cloud = sample_subgradients(&zeros.spec, &c, 0.05, 256, FD_STEP).unwrap();
    let off_center = cloud.pairs.iter().filter(|p| p.x.as_slice() != c).count();

    let full = s.find("neg_sqrt_halfplane", CheckName::Density, &[0.0, 0.0], None);
    let radial = s.find("neg_sqrt_halfplane", CheckName::Density, &[0.0, 0.0], Some(true));
    let ok = accepted == 0 && off_center == 0 && full.verdict == Verdict::Pass && radial.outcome == "failed";
    line(
        ok,
        format!(
            "{} of {} grid covectors accepted at (0,0.5); {} subgradient pairs near 1/3 off the centre; density search {}, radial-only {}",
            accepted,
            grid.len(),
            off_center,
            full.outcome,
            radial.outcome
        ),
    )
}

fn criterion_8(s: &Suite) -> Line {
    let mut total = 0;
    let mut failures = Vec::new();
    for name in [CheckName::Ekeland, CheckName::Mvi] {
        for (id, c) in s.all(name) {
            total += 1;
            if c.verdict != Verdict::Pass {
                failures.push(describe(id, c));
            }
        }
    }
    failures_line(total, failures, 2 * SEEDS as usize)
}

fn criterion_9(first: &Suite) -> Line {
    let again: Vec<RunConfig> = suite().into_iter().filter(|c| RERUN.contains(&c.function.corpus.as_deref().unwrap_or(""))).collect();
    let b: Vec<String> = again.iter().map(|c| run(c, Some(3)).unwrap().to_json().unwrap()).collect();
    let a: Vec<String> = first
        .reports
        .iter()
        .filter(|r| RERUN.contains(&id_of(r)))
        .map(|r| r.to_json().unwrap())
        .collect();
    let bytes: usize = a.iter().map(String::len).sum();
    line(
        a.len() == RERUN.len() && a == b,
        format!("{:?} rerun on 3 workers, {} bytes, identical: {}", RERUN, bytes, a == b),
    )
}

#[test]
fn acceptance() {
    let mut lines = vec![("diagram ordering", criterion_1())];
    let suite = run_suite(None);
    lines.push(("point values", criterion_2(&suite)));
    lines.push(("duality formula", criterion_3(&suite)));
    lines.push(("Treiman inequality", criterion_4(&suite)));
    lines.push(("convex radial formula", criterion_5(&suite)));
    lines.push(("lower bound", criterion_6(&suite)));
    lines.push(("counterexamples", criterion_7(&suite)));
    lines.push(("Ekeland and mean value", criterion_8(&suite)));
    lines.push(("determinism", criterion_9(&suite)));
    for (i, (label, l)) in lines.iter().enumerate() {
        println!("criterion {} {}: {}: {}", i + 1, if l.ok { "PASS" } else { "FAIL" }, label, l.detail);
    }
    let failed: Vec<usize> = lines.iter().enumerate().filter(|(_, (_, l))| !l.ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {:?}", failed);
}
