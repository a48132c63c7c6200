use std::path::PathBuf;
use std::process::Command;

use nslab_cli::config::{CheckName, CheckSpec, FunctionSource, OutputConfig, Overrides};
use nslab_cli::report::{plot_csv, Summary};
use nslab_cli::{run, write_outputs, ReportDocument, RunConfig, Verdict};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nslab"))
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn corpus_config(id: &str, checks: &[&str]) -> RunConfig {
    RunConfig {
        function: FunctionSource {
            corpus: Some(id.into()),
            file: None,
        },
        checks: checks.iter().map(|c| CheckSpec::parse(c).unwrap()).collect(),
        overrides: Overrides::default(),
        output: OutputConfig::default(),
    }
}

/// Validates `v` against the subset of JSON Schema used by the shipped
/// report schema.
fn validate(schema: &Value, root: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let schema = match schema.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let name = r.trim_start_matches("#/$defs/");
            &root["$defs"][name]
        }
        None => schema,
    };
    if let Some(c) = schema.get("const") {
        if c != v {
            errors.push(format!("{}: expected {}", path, c));
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            errors.push(format!("{}: {} not in enum", path, v));
        }
    }
    if let Some(alts) = schema.get("oneOf").and_then(Value::as_array) {
        let ok = alts
            .iter()
            .filter(|a| {
                let mut e = Vec::new();
                validate(a, root, v, path, &mut e);
                e.is_empty()
            })
            .count();
        if ok != 1 {
            errors.push(format!("{}: matches {} alternatives", path, ok));
        }
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_i64() || v.is_u64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        };
        if !ok {
            errors.push(format!("{}: not of type {}", path, t));
            return;
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if v.as_f64().map_or(false, |x| x < min) {
            errors.push(format!("{}: below minimum", path));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(r.as_str().unwrap()) {
                errors.push(format!("{}: missing {}", path, r));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, val) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => validate(s, root, val, &format!("{}.{}", path, k), errors),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{}: unexpected key {}", path, k))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(items, root, x, &format!("{}[{}]", path, i), errors);
        }
    }
}

fn schema_errors(report: &ReportDocument) -> Vec<String> {
    let text = std::fs::read_to_string(manifest_dir().join("../../docs/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let v: Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    let mut errors = Vec::new();
    validate(&schema, &schema, &v, "$", &mut errors);
    errors
}

#[test]
fn neg_abs_duality_agrees_at_minus_one() {
    let r = run(&corpus_config("neg_abs", &["duality:point=0;u=1;v=1;alpha=0"]), None).unwrap();
    let c = &r.checks[0];
    assert_eq!((c.verdict, c.outcome.as_str()), (Verdict::Pass, "agree"));
    assert_eq!(c.traces.len(), 4);
    for t in &c.traces {
        assert!(t.value.unwrap().close_to(nslab_core::ExtReal::Finite(-1.0), 5e-3), "{:?}", t);
    }
    assert_eq!(r.exit_code, 0);
    assert!(schema_errors(&r).is_empty(), "{:?}", schema_errors(&r));

    let csv = plot_csv(&r, "lhs_fr").unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "check,scale,value");
    let last: f64 = rows.last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((last + 1.0).abs() < 1e-6);
}

#[test]
fn step_up_radial_trace_diverges() {
    let r = run(&corpus_config("step_up", &["radial_lower:point=0;u=1"]), None).unwrap();
    assert_eq!(r.checks[0].outcome, "+inf");
    let csv = plot_csv(&r, "f_r").unwrap();
    let values: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(2).and_then(|v| v.parse().ok()))
        .collect();
    assert!(values.first().unwrap() < &1e6);
    assert!(values.last().unwrap() > &1e6);
}

#[test]
fn plot_of_missing_quantity_is_an_error() {
    let mut r = run(&corpus_config("abs", &["accessibility"]), None).unwrap();
    assert!(plot_csv(&r, "lhs_fr").is_err());
    r.checks.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(nslab_cli::emit_plot_data(&r, "f_ray", &dir.path().join("x.csv")).is_err());
}

#[test]
fn expectations_decide_the_verdict() {
    let r = run(
        &corpus_config(
            "step_up",
            &[
                "accessibility:point=0;u=1;expect=not_accessible",
                "lower_bound:point=0;u=1",
                "radial_lower:point=0.5;u=1;expect=0",
            ],
        ),
        None,
    )
    .unwrap();
    let v: Vec<(Verdict, &str)> = r.checks.iter().map(|c| (c.verdict, c.outcome.as_str())).collect();
    assert_eq!(
        v,
        vec![
            (Verdict::Pass, "not_accessible"),
            (Verdict::Inapplicable, "not_accessible"),
            (Verdict::Pass, "0"),
        ]
    );
    assert_eq!(r.exit_code, 0);
    assert_eq!(
        r.summary,
        Summary {
            pass: 2,
            inapplicable: 1,
            ..Summary::default()
        }
    );
}

#[test]
fn user_file_polynomial_diagram_passes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("user.fn"), "dim 1;\nbox -2 2;\npiece true : x^3 - 2*x + 1;\n").unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "[function]\nfile = \"user.fn\"\n\n[[checks]]\nname = \"diagram\"\npoints = [[-1.0], [0.0], [0.5]]\n\n[output]\nplots = []\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin().arg("run").arg(&cfg_path).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let r = ReportDocument::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r.checks[0].outcome, "ordered");
    assert_eq!(r.checks[0].details["cases"].as_array().unwrap().len(), 6);
    assert!(r.function.corpus_id.is_none());
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["--corpus", "abs", "--check", "accessibility"]), Some(0));
    // a declared expectation that does not hold is a violation
    assert_eq!(code(&["--corpus", "abs", "--check", "radial_lower:point=0;u=1;expect=2"]), Some(2));
    // the radial-only search cannot find a sequence
    assert_eq!(
        code(&["--corpus", "neg_sqrt_halfplane", "--check", "density:point=0,0;u=0,1;radial_only=true"]),
        Some(3)
    );
    assert_eq!(code(&["--corpus", "nope", "--check", "accessibility"]), Some(4));
    assert_eq!(code(&["--corpus", "abs", "--check", "duality:u=1,2"]), Some(4));
    assert_eq!(code(&["--corpus", "abs"]), Some(4));
    assert_eq!(code(&["--bogus-flag"]), Some(4));
    assert_eq!(code(&["run", "/nonexistent/config.toml"]), Some(4));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn out_dir_gets_report_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = corpus_config("neg_abs", &["duality:point=0;u=1;v=0;alpha=1"]);
    cfg.output.plots = vec!["lhs_fr".into(), "rhs_fdel".into()];
    let r = run(&cfg, Some(2)).unwrap();
    write_outputs(&r, dir.path()).unwrap();
    for f in ["report.json", "lhs_fr.csv", "rhs_fdel.csv"] {
        assert!(dir.path().join(f).exists(), "{}", f);
    }
    let back = ReportDocument::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn reports_are_byte_identical_across_runs_and_pools() {
    let cfg = corpus_config(
        "countable_zeros",
        &["radial_upper:point=0;u=1", "link:point=0;u=1;refined=true;alphas=0,1,4", "density:point=0;u=1"],
    );
    let a = run(&cfg, Some(1)).unwrap().to_json().unwrap();
    let b = run(&cfg, Some(4)).unwrap().to_json().unwrap();
    let c = run(&cfg, None).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn timings_only_when_asked() {
    let mut cfg = corpus_config("abs", &["accessibility"]);
    assert!(run(&cfg, None).unwrap().checks[0].wall_time_ms.is_none());
    cfg.output.timings = true;
    assert!(run(&cfg, None).unwrap().checks[0].wall_time_ms.is_some());
}

#[test]
fn seed_flag_reaches_every_schedule() {
    let mut cfg = corpus_config("abs", &["accessibility"]);
    cfg.overrides.seed = Some(7);
    let r = run(&cfg, None).unwrap();
    let o = &r.config.overrides;
    assert_eq!(
        (o.estimators.schedule.seed, o.drop.seed, o.inner.estimators.schedule.seed, o.search.seed),
        (7, 7, 7, 7)
    );
}

fn golden(name: &str) -> (PathBuf, PathBuf) {
    let d = manifest_dir().join("tests/golden");
    (d.join(format!("{}.toml", name)), d.join(format!("{}.json", name)))
}

fn check_golden(name: &str) {
    let (cfg_path, json_path) = golden(name);
    let cfg = RunConfig::from_path(&cfg_path).unwrap();
    let got = run(&cfg, None).unwrap().to_json().unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&json_path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&json_path).unwrap_or_default();
    assert!(got == want, "{} differs from {}", name, json_path.display());
}

#[test]
fn golden_neg_abs() {
    check_golden("neg_abs");
}

#[test]
fn golden_step_up() {
    check_golden("step_up");
}

#[test]
fn every_check_name_runs() {
    let specs = [
        "radial_lower",
        "radial_upper",
        "dini_hadamard",
        "clarke",
        "clarke_rockafellar",
        "diagram:points=0.5",
        "duality",
        "treiman",
        "convex_formula:alphas=0,1",
        "lower_bound:alphas=0,1",
        "accessibility",
        "density",
        "ekeland:point=0.02;resolution=201",
        "mvi:point=-1;target=1;lambda=0",
        "stability",
        "link",
    ];
    let r = run(&corpus_config("abs", &specs), None).unwrap();
    let names: Vec<CheckName> = r.checks.iter().map(|c| c.name).collect();
    assert_eq!(names, CheckName::ALL.to_vec());
    for c in &r.checks {
        assert_eq!(c.verdict, Verdict::Pass, "{} {} {:?}", c.name, c.outcome, c.message);
    }
    assert!(schema_errors(&r).is_empty(), "{:?}", schema_errors(&r));
}
