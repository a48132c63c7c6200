use nslab_core::corpus::corpus_entry;
use nslab_core::duality::{drop_contains, drop_samples, DropSchedule};
use nslab_core::subderiv::{check_diagram, radial_lower, EstimatorConfig, LimitSchedule};
use nslab_core::subdiff::support_function;
use nslab_core::variational::checker::check_sequence;
use nslab_core::variational::{directional_density_search, SearchOptions};
use nslab_core::{ExtReal, FunctionSpec};
use proptest::prelude::*;

fn spec(id: &str) -> FunctionSpec {
    corpus_entry(id).unwrap().spec
}

fn finite(v: Option<ExtReal>) -> f64 {
    v.and_then(|v| v.finite()).expect("finite classified value")
}

fn smooth_or_kinked() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["abs", "neg_abs", "square"])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn diagram_ordering_holds(
        id in prop::sample::select(vec!["abs", "neg_abs", "square", "step_up", "sqrt_abs"]),
        x in -1.0f64..1.0,
        u in prop::sample::select(vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
    ) {
        let f = spec(id);
        let r = check_diagram(&f, &[vec![x]], &[vec![u]], &EstimatorConfig::default()).unwrap();
        prop_assert_eq!(r.violation_count(), 0, "{:?}", r.cases);
    }

    #[test]
    fn radial_is_positively_homogeneous(id in smooth_or_kinked(), x in -1.0f64..1.0, u in -1.0f64..1.0, s in 0.25f64..4.0) {
        prop_assume!(u.abs() > 0.05);
        let f = spec(id);
        let sched = LimitSchedule::default();
        let a = finite(radial_lower(&f, &[x], &[u], &sched).unwrap().value);
        let b = finite(radial_lower(&f, &[x], &[s * u], &sched).unwrap().value);
        prop_assert!((b - s * a).abs() <= 1e-3 * (1.0 + b.abs()), "{} vs {}", b, s * a);
    }

    #[test]
    fn convex_radial_bounds(id in prop::sample::select(vec!["abs", "square"]), x in -1.0f64..1.0, u in -1.0f64..1.0) {
        prop_assume!(u.abs() > 0.05);
        let f = spec(id);
        let sched = LimitSchedule::default();
        let plus = finite(radial_lower(&f, &[x], &[u], &sched).unwrap().value);
        let minus = finite(radial_lower(&f, &[x], &[-u], &sched).unwrap().value);
        prop_assert!(plus + minus >= -1e-3);
        // difference quotients of a convex function decrease as t shrinks
        let chord = f.evaluate(&[x + u]).unwrap().finite().unwrap() - f.evaluate(&[x]).unwrap().finite().unwrap();
        prop_assert!(plus <= chord + 1e-3);
    }

    #[test]
    fn support_function_is_sublinear(
        cs in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 1..12),
        u in prop::collection::vec(-3.0f64..3.0, 2),
        w in prop::collection::vec(-3.0f64..3.0, 2),
        s in 0.0f64..5.0,
    ) {
        let su = support_function(&cs, &u).finite().unwrap();
        let sw = support_function(&cs, &w).finite().unwrap();
        let sum: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        prop_assert!(support_function(&cs, &sum).finite().unwrap() <= su + sw + 1e-9);
        let scaled: Vec<f64> = u.iter().map(|a| s * a).collect();
        prop_assert!((support_function(&cs, &scaled).finite().unwrap() - s * su).abs() <= 1e-9 * (1.0 + su.abs()));
        prop_assert_eq!(support_function(&[], &u), ExtReal::NegInf);
    }

    #[test]
    fn drop_samples_stay_in_the_drop(x in -1.0f64..1.0, y in -1.0f64..1.0, v in prop::collection::vec(-2.0f64..2.0, 2), eps in 0.001f64..0.1, seed in 0u64..50) {
        let f = spec("neg_sqrt_halfplane");
        let drop = DropSchedule { seed, ..DropSchedule::default() };
        for p in drop_samples(&f, &[x, y], &v, eps, &drop) {
            prop_assert!(drop_contains(&[x, y], &v, eps, &p), "{:?}", p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn density_sequences_pass_the_checker(id in smooth_or_kinked(), x in -0.5f64..0.5, u in prop::sample::select(vec![-1.0, 1.0, 0.0]), seed in 0u64..20) {
        let f = spec(id);
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        let seq = directional_density_search(&f, &[x], &[u], 5, &opts).unwrap();
        prop_assert!(seq.complete(), "{:?}", seq.status);
        let report = check_sequence(&f, &seq);
        prop_assert!(report.ok(), "{:?}", report.problems);
    }
}
