use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn qecheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qecheck")).args(args).output().unwrap()
}

fn spec(name: &str) -> String {
    specs_dir().join(name).to_string_lossy().into_owned()
}

/// Writes `text` to a scratch spec file and returns its path.
fn scratch(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn entries(report: &Value) -> Vec<&Value> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c["report"]["entries"].as_array().unwrap())
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn s1_cross_einstein_passes() {
    let out = qecheck(&[&spec("s1_cross_einstein.qe")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["verdict"], "pass");
    let names: Vec<_> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["qe_residual", "theorem11", "killing_integral"]);
    for e in entries(&report) {
        assert_ne!(e["verdict"], "fail", "{e}");
    }
    // m = -2 is outside the equivalence statement
    let t11 = &report["checks"][1]["report"]["entries"][0];
    assert_eq!(t11["verdict"], "skipped");
    assert!(t11["reason"].as_str().unwrap().contains("m = -2"));
}

#[test]
fn parse_error_exits_2_with_location() {
    let out = qecheck(&[&spec("bad_expression.qe")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("[manifold] line 4"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn negative_control_exits_1() {
    let out = qecheck(&[&spec("negative_control.qe")]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["verdict"], "fail");
    let e = &report["checks"][0]["report"]["entries"][0];
    assert_eq!(e["check"], "quasi_einstein");
    assert!((e["linf"].as_f64().unwrap() - 4.0).abs() <= 1e-9);
    assert_eq!(e["verdict"], "fail");
    assert!(stderr(&out).contains("quasi_einstein"));
}

#[test]
fn input_errors_exit_2() {
    let cases = [
        ("zero_m.qe", "[manifold]\ngenerator = flat_torus\n[params]\nm = 0\nlambda = 0\n", "[params] line 4"),
        ("unknown_check.qe", "[manifold]\ngenerator = flat_torus\n[params]\nm = 1\nlambda = 0\n[checks]\nnope\n", "[checks] line 7"),
        (
            "both.qe",
            "[manifold]\ngenerator = flat_torus\n[algebra]\npreset = su2\n[params]\nm = 1\n",
            "exactly one",
        ),
        ("unknown_generator.qe", "[manifold]\ngenerator = klein_bottle\n", "[manifold] line 2"),
        (
            "bad_field.qe",
            "[manifold]\ngenerator = flat_torus\n[field]\nX3 = 1\n[params]\nm = 1\nlambda = 0\n",
            "[field] line 4",
        ),
        (
            "jacobi.qe",
            "[algebra]\ndim = 3\nbracket = 1 2 3 1\nbracket = 2 3 2 1\n[params]\nm = 1\n",
            "[algebra]",
        ),
    ];
    for (name, text, needle) in cases {
        let out = qecheck(&[&scratch(name, text)]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{name}: {}", stderr(&out));
    }
    let out = qecheck(&["/nonexistent/spec.qe"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unresolved_gamma_exits_3() {
    let path = scratch(
        "stiff_drift.qe",
        "[manifold]\ngenerator = flat_torus\n[field]\nX1 = 20*cos(u1)\nX2 = cos(u2)\n[params]\nm = 1\nlambda = 0\ngamma = solve\n[grid]\nresolution = 8\n[checks]\ngamma_solve\n",
    );
    let out = qecheck(&[&path]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("[params] line 9"));
}

#[test]
fn csv_has_one_row_per_check() {
    let out = qecheck(&[&spec("s1_cross_einstein.qe"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["check", "paper_tag", "linf", "l2", "lhs", "rhs", "tolerance", "verdict"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][0], "theorem11");
    assert_eq!(&rows[1][7], "skipped");

    let single = scratch("single.qe", "[manifold]\ngenerator = circle_qe\nc = 1\nm = 2\n[checks]\nqe_residual\n");
    let out = qecheck(&[&single, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn list_checks_names_the_registry() {
    let out = qecheck(&["--list-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "qe_residual",
        "lemma21",
        "section2",
        "theorem11",
        "structure",
        "gamma_solve",
        "section3",
        "lie_div_energy",
        "killing_integral",
        "homogeneous",
        "curvature",
    ] {
        assert!(text.lines().any(|l| l.trim_start().starts_with(name)), "{name}");
    }
}

#[test]
fn tolerance_and_grid_overrides() {
    let path = spec("negative_control.qe");
    let out = qecheck(&[&path, "--tol", "solution=10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["tolerances"]["solution"], 10.0);

    // per-check override inside the spec file
    let text = std::fs::read_to_string(&path).unwrap().replace("qe_residual = 1e-8", "qe_residual = solution:10, trace:10");
    let out = qecheck(&[&scratch("override.qe", &text)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["checks"][0]["tolerance_overrides"]["solution"], 10.0);

    let out = qecheck(&[&path, "--grid", "8"]);
    assert_eq!(json(&out)["problem"]["nodes"], 64);

    let out = qecheck(&[&path, "--tol", "solution"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qecheck(&[&path, "--tol", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn homogeneous_spec() {
    let out = qecheck(&[&spec("berger.qe")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["problem"]["kind"], "algebra");
    let hom = &report["checks"][0]["report"];
    assert_eq!(hom["scalars"]["solutions"], 2.0);
    // diag(2, 1, 1) with m = 2: X = ±e1, λ = 0
    let notes: Vec<&str> = entries(&report)
        .into_iter()
        .filter(|e| e["check"].as_str().unwrap().starts_with("qe_solution"))
        .map(|e| e["note"].as_str().unwrap())
        .collect();
    assert_eq!(notes.len(), 2);
    assert!(notes.iter().all(|n| n.ends_with("λ = 0.000000000000")));
    assert!(notes[0].starts_with("X = (1.0000000") && notes[1].starts_with("X = (-1.0000000"), "{notes:?}");

    // a non-solution left-invariant field is a tolerance failure
    let out = qecheck(&[&spec("heisenberg.qe")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_same_document() {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("sphere.json");
    let out = qecheck(&[&spec("sphere.qe"), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let stdout = qecheck(&[&spec("sphere.qe")]).stdout;
    assert_eq!(std::fs::read(&target).unwrap(), stdout);
}

#[test]
fn timings_are_opt_in() {
    let plain = json(&qecheck(&[&spec("sphere.qe")]));
    assert!(plain["checks"][0].get("wall_clock_s").is_none());
    let timed = json(&qecheck(&[&spec("sphere.qe"), "--timings"]));
    assert!(timed["checks"][0]["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

/// The documented example stays in step with the tool: same structure and
/// verdicts, numbers equal up to rounding noise.
#[test]
fn golden_example_matches() {
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/golden/sphere.json");
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(golden_path).unwrap()).unwrap();
    let fresh = json(&qecheck(&[&spec("sphere.qe")]));
    compare(&golden, &fresh, "$");
}

fn compare(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let (kx, ky): (Vec<_>, Vec<_>) = (x.keys().collect(), y.keys().collect());
            assert_eq!(kx, ky, "{path}");
            for k in x.keys() {
                compare(&x[k], &y[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{path}");
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                compare(p, q, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{path}: {x} vs {y}");
        }
        // notes carry formatted numbers
        (Value::String(_), Value::String(_)) if path.ends_with("note") => {}
        _ => assert_eq!(a, b, "{path}"),
    }
}
