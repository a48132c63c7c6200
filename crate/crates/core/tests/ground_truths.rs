//! Every corpus ground truth is checked against the library; the derived
//! ones are first recomputed from closed-form definitions written here,
//! independently of the DSL.

use nslab_core::corpus::{load_corpus, CorpusEntry, GroundTruth, Tag};
use nslab_core::duality::{directional_limsup, inner_value, DropSchedule, InnerConfig, Quantity};
use nslab_core::subderiv::{radial_access_check, EstimatorConfig, Kind, LimitSchedule, DIAGRAM_TOL};
use nslab_core::subdiff::{certified_covectors, membership_grid, sample_subgradients, support_function, FD_STEP};
use nslab_core::variational::{directional_density_search, SearchOptions};
use nslab_core::ExtReal;

const INF: f64 = f64::INFINITY;

/// Exact membership in `{1/n}`, no cutoff on `n` below 2^53.
fn is_recip(x: f64) -> bool {
    if x <= 0.0 || x > 1.0 {
        return false;
    }
    let n = (1.0 / x).round();
    n < 9007199254740992.0 && x == 1.0 / n
}

/// Closed forms, `+inf` outside the domain.
fn closed_form(id: &str, x: &[f64]) -> f64 {
    match id {
        "neg_abs" => -x[0].abs(),
        "sqrt_abs" => x[0].abs().sqrt(),
        "countable_zeros" => {
            if x[0] == 0.0 || is_recip(x[0]) {
                0.0
            } else {
                1.0
            }
        }
        "step_up" => {
            if x[0] > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        "countable_zeros_inf" => {
            if x[0] == 0.0 || is_recip(x[0]) {
                0.0
            } else {
                INF
            }
        }
        "neg_sqrt_halfplane" => {
            if x[0] >= 0.0 {
                -x[0].sqrt()
            } else {
                INF
            }
        }
        "abs" => x[0].abs(),
        "square" => x[0] * x[0],
        "indicator" => {
            if x[0] >= 0.0 {
                0.0
            } else {
                INF
            }
        }
        _ => panic!("no closed form for {}", id),
    }
}

fn at(x: &[f64], t: f64, u: &[f64]) -> Vec<f64> {
    x.iter().zip(u).map(|(a, b)| a + t * b).collect()
}

/// Small steps on two interleaved geometric families, so that both the
/// reciprocal points `2^-k` and points off them are visited. Deep enough
/// that `t^-1/2` passes 1e6, but resolvable against `|x|`.
fn steps(x: &[f64]) -> Vec<f64> {
    let floor = x.iter().fold(0.0f64, |m, c| m.max(c.abs())) * 0.5f64.powi(40);
    (30..63)
        .flat_map(|k| [0.5f64.powi(k), 0.7 * 0.5f64.powi(k)])
        .filter(|&t| if floor == 0.0 { t <= 0.5f64.powi(40) } else { t >= floor })
        .collect()
}

fn quotient(id: &str, y: &[f64], t: f64, u: &[f64]) -> f64 {
    let fy = closed_form(id, y);
    (closed_form(id, &at(y, t, u)) - fy) / t
}

/// Reads a limit off a set of quotients at small steps.
fn settle(q: &[f64], lower: bool) -> ExtReal {
    let v = if lower {
        q.iter().cloned().fold(INF, f64::min)
    } else {
        q.iter().cloned().fold(-INF, f64::max)
    };
    if v > 1e6 {
        ExtReal::PosInf
    } else if v < -1e6 {
        ExtReal::NegInf
    } else {
        ExtReal::Finite(v)
    }
}

fn oracle(id: &str, g: &GroundTruth) -> ExtReal {
    let (x, u) = (&g.point, &g.direction);
    let ts = steps(x);
    match g.quantity.as_str() {
        "radial_lower" | "radial_upper" => {
            let q: Vec<f64> = ts.iter().map(|&t| quotient(id, x, t, u)).collect();
            settle(&q, g.quantity == "radial_lower")
        }
        "dini_hadamard" => {
            let q: Vec<f64> = ts
                .iter()
                .flat_map(|&t| (-4..=4).map(move |j| (t, 1.0 + j as f64 * t.powf(0.75) / 4.0)))
                .map(|(t, s)| quotient(id, x, t, &u.iter().map(|c| c * s).collect::<Vec<_>>()))
                .collect();
            settle(&q, true)
        }
        "clarke" => {
            // base points y within t of x, quotients taken at scale t
            let q: Vec<f64> = ts
                .iter()
                .flat_map(|&t| (-8..=8).map(move |j| (t, j as f64 * t / 8.0)))
                .map(|(t, s)| quotient(id, &at(x, s, u), t, u))
                .collect();
            settle(&q, false)
        }
        other => panic!("no oracle for quantity {}", other),
    }
}

fn bool_value(b: bool) -> ExtReal {
    ExtReal::Finite(if b { 1.0 } else { 0.0 })
}

fn measure(e: &CorpusEntry, g: &GroundTruth) -> ExtReal {
    let f = &e.spec;
    let (x, u) = (g.point.as_slice(), g.direction.as_slice());
    let cfg = EstimatorConfig::default();
    match g.quantity.as_str() {
        "value" => f.evaluate(x).unwrap(),
        "drop_limsup_radial_lower" | "ball_limsup_radial_lower" => {
            let v = if g.quantity.starts_with("drop") { u.to_vec() } else { vec![0.0; f.dim] };
            let inner = InnerConfig::default();
            let trace = directional_limsup(
                |y, eps| inner_value(Quantity::LhsFr, f, x, u, 0.0, &inner, y, eps),
                f,
                x,
                &v,
                &DropSchedule::default(),
            )
            .unwrap();
            trace.value.expect("limsup did not classify")
        }
        "radially_accessible" => bool_value(radial_access_check(f, x, u, &LimitSchedule::default()).unwrap().accessible),
        "subgradient_count" => {
            let cloud = sample_subgradients(f, x, 0.05, 256, FD_STEP).unwrap();
            ExtReal::Finite(cloud.pairs.iter().filter(|p| p.x.as_slice() != x).count() as f64)
        }
        "support_mr" => {
            let cs = certified_covectors(f, x, &membership_grid(f, x, 41), 0.25).unwrap();
            support_function(&cs, u)
        }
        "radial_witness" | "density_witness" => {
            let opts = SearchOptions {
                radial_only: g.quantity == "radial_witness",
                ..SearchOptions::default()
            };
            bool_value(directional_density_search(f, x, u, 5, &opts).unwrap().complete())
        }
        name => {
            let kind = Kind::from_name(name).unwrap_or_else(|| panic!("unknown quantity {}", name));
            cfg.estimate(kind, f, x, u).unwrap().value.expect("estimate did not classify")
        }
    }
}

#[test]
fn derived_truths_match_closed_form_oracles() {
    let mut checked = 0;
    for e in load_corpus() {
        for g in e.ground_truths.iter().filter(|g| g.tag == Tag::Derived) {
            let o = oracle(&e.id, g);
            assert!(
                o.close_to(g.expected, 1e-3),
                "{} {} at {:?} along {:?}: oracle {} vs data {}",
                e.id,
                g.quantity,
                g.point,
                g.direction,
                o,
                g.expected
            );
            checked += 1;
        }
    }
    assert!(checked >= 10);
}

#[test]
fn closed_forms_match_the_dsl() {
    for e in load_corpus() {
        let pts: Vec<Vec<f64>> = if e.spec.dim == 1 {
            (0..=400).map(|i| (i as f64 - 200.0) / 100.0).chain([1.0 / 3.0, 0.5, 1e-7]).map(|x| vec![x]).collect()
        } else {
            (0..=40).flat_map(|i| (0..=40).map(move |j| vec![(i as f64 - 20.0) / 10.0, (j as f64 - 20.0) / 10.0])).collect()
        };
        for p in pts {
            let want = closed_form(&e.id, &p);
            let got = e.spec.evaluate(&p).unwrap();
            let want = if want.is_infinite() { ExtReal::PosInf } else { ExtReal::Finite(want) };
            assert_eq!(got, want, "{} at {:?}", e.id, p);
        }
    }
}

#[test]
fn every_truth_is_reproduced_by_the_library() {
    for e in load_corpus() {
        for g in &e.ground_truths {
            let got = measure(&e, g);
            assert!(
                got.close_to(g.expected, DIAGRAM_TOL),
                "{} {} at {:?} along {:?}: got {} want {}",
                e.id,
                g.quantity,
                g.point,
                g.direction,
                got,
                g.expected
            );
        }
    }
}
