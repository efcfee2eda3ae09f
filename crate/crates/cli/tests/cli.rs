use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn specweight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specweight"))
        .args(args)
        .env_remove("SPECWEIGHT_THREADS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn negative_degree_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = specweight(&["basis", "--builtin", "legendre1d", "--degree", "-1", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_builtin_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = specweight(&["basis", "--builtin", "hermite", "--degree", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown builtin weight"));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.json");
    // The domain is too short for the weight to carry any mass.
    fs::write(
        &cfg,
        r#"{"weight": {"kind": {"type": "constant", "value": 1.0}, "normalization": 1.0},
            "domain": {"type": "interval", "a": 0.0, "b": 1e-200}}"#,
    )
    .unwrap();
    let o = specweight(&[
        "basis",
        "--config",
        p(&cfg),
        "--degree",
        "2",
        "--out",
        p(&dir.path().join("b.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn basis_file_reloads_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    let o = specweight(&["basis", "--builtin", "parabolic1d", "--degree", "8", "--out", p(&b)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let direct = dir.path().join("direct.csv");
    let loaded = dir.path().join("loaded.csv");
    let o = specweight(&[
        "project",
        "--builtin",
        "parabolic1d",
        "--degree",
        "8",
        "--fn",
        "kink1d",
        "--out",
        p(&direct),
    ]);
    assert!(o.status.success());
    let o = specweight(&["project", "--basis", p(&b), "--fn", "kink1d", "--out", p(&loaded)]);
    assert!(o.status.success());
    assert_eq!(fs::read(&direct).unwrap(), fs::read(&loaded).unwrap());

    let text = fs::read_to_string(&b).unwrap();
    let again: specweight::orthogonalization::OrthonormalBasis =
        specweight::orthogonalization::OrthonormalBasis::from_json(&text).unwrap();
    assert_eq!(again.to_json().unwrap(), text);
}

#[test]
fn project_writes_the_coefficient_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = specweight(&[
        "project",
        "--builtin",
        "legendre1d",
        "--degree",
        "6",
        "--fn",
        "exp1d",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["k", "multi_index", "coeff", "log10_abs"]
    );
    assert_eq!(r.records().count(), 7);
}

#[test]
fn compare_table_passes_for_example_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lemma.csv");
    let o = specweight(&[
        "compare",
        "--weight1",
        "legendre1d",
        "--weight2",
        "parabolic1d",
        "--fn",
        "c3kink1d",
        "--degree",
        "12",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 13);
    assert!(rows.iter().all(|x| &x[3] == "true"));
}

#[test]
fn cubature_build_is_deterministic_and_usable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = specweight(&[
            "--threads",
            "2",
            "cubature",
            "build",
            "--builtin",
            "triangle2d",
            "--degree",
            "3",
            "--seed",
            "7",
            "--out",
            p(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let rule = specweight::cubature::CubatureRule::from_json(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(rule.len(), 10);
    assert!(rule.exactness_residual <= 1e-8);

    let o = specweight(&["cubature", "apply", "--rule", p(&a), "--fn", "gpc2d"]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!(v.is_finite());

    let o = specweight(&[
        "cubature",
        "verify-theta",
        "--rule",
        p(&a),
        "--builtin",
        "triangle2d",
        "--degree",
        "3",
        "--fn",
        "trig2d",
        "--theta",
        "0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = String::from_utf8_lossy(&o.stdout).lines().count();
    assert_eq!(lines, 11);
}

#[test]
fn apply_rejects_a_function_of_the_wrong_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    let o = specweight(&[
        "cubature",
        "build",
        "--builtin",
        "step1d",
        "--degree",
        "3",
        "--out",
        p(&r),
    ]);
    assert!(o.status.success());
    let o = specweight(&["cubature", "apply", "--rule", p(&r), "--fn", "trig2d"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gpc_writes_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let opt = dir.path().join("opt.json");
    fs::write(&opt, r#"{"restarts": 2, "polish_iters": 2000}"#).unwrap();
    let out = dir.path().join("gpc");
    let o = specweight(&["exp", "gpc", "--nmax", "5", "--optimizer", p(&opt), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("H.csv")).unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    let points: Vec<usize> = rows.iter().map(|x| x[1].parse().unwrap()).collect();
    assert_eq!(points, [6, 15, 28, 45, 66]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("gpc.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn experiment_outputs_repeat_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [dir.path().join("one"), dir.path().join("two")];
    for out in &runs {
        let o = specweight(&["exp", "integrate", "--example", "1", "--seed", "3", "--out", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["integrate1_errors.csv", "integrate1_points.csv", "integrate1.json"] {
        assert_eq!(
            fs::read(runs[0].join(name)).unwrap(),
            fs::read(runs[1].join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn zero_threads_is_rejected() {
    let o = specweight(&["--threads", "0", "exp", "gfun", "--out", "unused"]);
    assert_eq!(o.status.code(), Some(2));
}
