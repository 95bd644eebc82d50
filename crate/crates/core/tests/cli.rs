use std::fs;
use std::path::Path;
use std::process::Command;

use simkernel::cli::{run_captured, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use simkernel::io::parse_matrix;

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

const K23: &str = "A,B\nA,C\nA,D\nE,B\nE,C\nE,D\n";

#[test]
fn gram_writes_csv_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "# three points\n1,0\n0,1\n-1,-1\n");
    let out = dir.path().join("g.csv");
    let (code, stdout, _) = run_captured(&[
        "gram",
        &pts,
        "--kernel",
        "fbm",
        "--a",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS);
    assert!(stdout.contains("PSD: true"));
    let m = parse_matrix(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(m.n(), 3);
    assert!((m.get(0, 0) - 2.0).abs() < 1e-15);

    let one = write(dir.path(), "one.csv", "2,3\n");
    let (code, stdout, _) = run_captured(&["gram", &one, "--kernel", "fbm", "--a", "0.5"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(stdout.lines().next().unwrap().split(',').count(), 1);
}

#[test]
fn gram_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    assert_eq!(
        run_captured(&["gram", &empty, "--kernel", "fbm", "--a", "0.5"]).0,
        EXIT_USAGE
    );
    let pts = write(dir.path(), "p.csv", "1,2\n");
    assert_eq!(
        run_captured(&["gram", &pts, "--kernel", "fbm", "--a", "1.5"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        run_captured(&["gram", &pts, "--kernel", "nope"]).0,
        EXIT_USAGE
    );
    assert_eq!(run_captured(&["gram", &pts]).0, EXIT_USAGE);
    assert_eq!(
        run_captured(&["gram", "/no/such/file", "--kernel", "fbm", "--a", "0.5"]).0,
        EXIT_USAGE
    );
    assert_eq!(run_captured(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn require_psd_fails_on_indefinite_gram() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "0\n1\n2\n3\n");
    // the constant -1 kernel has a negative eigenvalue
    let spec = write(
        dir.path(),
        "k.json",
        r#"{"kind":"sum","children":[{"kind":"scale","params":{"factor":1.0},"children":[{"kind":"constant","params":{"value":-1.0}}]}]}"#,
    );
    let (code, stdout, _) = run_captured(&["gram", &pts, "--spec", &spec, "--require-psd"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(stdout.contains("PSD: false"));
    assert_eq!(run_captured(&["gram", &pts, "--spec", &spec]).0, EXIT_PASS);
}

#[test]
fn inline_kernel_wins_over_spec_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "0,1\n1,1\n");
    let spec = write(
        dir.path(),
        "k.json",
        r#"{"kind":"sphere_similarity","params":{"a":0.5}}"#,
    );
    let (code, stdout, stderr) = run_captured(&[
        "gram", &pts, "--spec", &spec, "--kernel", "fbm", "--a", "0.5",
    ]);
    assert_eq!(code, EXIT_PASS);
    assert!(stderr.contains("warning"));
    assert!(stdout.contains("fbm(a=0.5)"));
}

#[test]
fn audit_examples() {
    let (code, _, _) = run_captured(&["audit", "--random", "12", "--transform", "exp_complement"]);
    assert_eq!(code, EXIT_PASS);

    let (code, stdout, _) =
        run_captured(&["audit", "--fixture", "paper-functions", "--cnd", "--json"]);
    assert_eq!(code, EXIT_FAIL);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let axioms = v["reports"][0]["axioms"].as_array().unwrap();
    let cnd = axioms
        .iter()
        .find(|a| a["name"] == "conditionally_negative_definite")
        .unwrap();
    assert_eq!(cnd["verdict"], "fail");
    assert_eq!(cnd["witness"]["vector"].as_array().unwrap().len(), 5);

    let (code, _, stderr) = run_captured(&["audit", "--random", "5", "--metric", "chebyshev"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(stderr.contains("chebyshev"));
    assert_eq!(
        run_captured(&["audit", "--fixture", "unknown"]).0,
        EXIT_USAGE
    );
}

#[test]
fn audit_reads_complex_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "c.csv", "1,1,0,0\n0,-1,2,0\n3,0,0,1\n");
    let (code, stdout, _) = run_captured(&["audit", &pts, "--complex", "--metric-axioms"]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    assert!(stdout.contains("n = 3"));
    assert_eq!(
        run_captured(&["audit", &pts, "--metric-axioms"]).0,
        EXIT_PASS
    );
    let odd = write(dir.path(), "odd.csv", "1,2,3\n");
    assert_eq!(run_captured(&["audit", &odd, "--complex"]).0, EXIT_USAGE);
}

#[test]
fn counterexample_command() {
    let (code, stdout, _) = run_captured(&["counterexample"]);
    assert_eq!(code, EXIT_PASS);
    assert!(stdout.contains("verdict: similarity metric 1-D is not positive definite"));

    let (code, stdout, _) = run_captured(&["counterexample", "--json"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 8);
    assert_eq!(v["delta"][0][4], 2.0);

    // at t = 2 the matrix e^{-2Δ} is positive definite; the failure shows at small scales
    let (code, stdout, _) = run_captured(&["counterexample", "--t", "2", "--json"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["exp_min_eigenvalue"].as_f64().unwrap() > 0.0);
    assert!(v["scaled_function_min_eigenvalue"].as_f64().unwrap() < -1e-6);

    assert_eq!(run_captured(&["counterexample", "--t", "-1"]).0, EXIT_USAGE);
}

#[test]
fn graph_command() {
    let dir = tempfile::tempdir().unwrap();
    let k23 = write(dir.path(), "k23.csv", K23);
    let (code, stdout, _) = run_captured(&["graph", &k23]);
    assert_eq!(code, EXIT_PASS);
    assert!(stdout.contains("A  0  1  1  1  2"));
    let (code, stdout, _) = run_captured(&["graph", &k23, "--negative-type"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(stdout.contains("positive eigenvalues: 2"));

    let path = write(dir.path(), "path.csv", "A,B\nB,C\nC,D\n");
    let (code, stdout, _) = run_captured(&["graph", &path, "--negative-type", "--json"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["negative_type"]["necessary_condition"], true);

    let split = write(dir.path(), "split.csv", "A,B\nC,D\n");
    let (code, _, stderr) = run_captured(&["graph", &split]);
    assert_eq!(code, EXIT_USAGE);
    assert!(stderr.contains("disconnected"));
}

#[test]
fn theorem5_command() {
    let (code, stdout, _) = run_captured(&[
        "theorem5", "--ramps", "5", "--b", "0.7", "--weight", "gaussian",
    ]);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    assert_eq!(
        run_captured(&["theorem5", "--ramps", "5", "--b", "1.5"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        run_captured(&["theorem5", "--random", "4", "--weight", "indicator:-1:1"]).0,
        EXIT_PASS
    );

    let dir = tempfile::tempdir().unwrap();
    let single = write(
        dir.path(),
        "f.json",
        r#"[{"kind":"linear","breakpoints":[0,1,2],"values":[0,1,0]}]"#,
    );
    assert_eq!(
        run_captured(&["theorem5", &single, "--b", "0.5"]).0,
        EXIT_PASS
    );
    let step = write(
        dir.path(),
        "s.json",
        r#"[{"kind":"constant","breakpoints":[0,1],"values":[1]},{"kind":"constant","breakpoints":[0,2],"values":[1]}]"#,
    );
    assert_eq!(run_captured(&["theorem5", &step]).0, EXIT_USAGE);
    assert_eq!(
        run_captured(&["theorem5", &step, "--allow-discontinuous"]).0,
        EXIT_PASS
    );
    let weight = write(dir.path(), "w.json", r#"{"kind":"gaussian","scale":2.0}"#);
    assert_eq!(
        run_captured(&["theorem5", "--ramps", "3", "--weight", &weight]).0,
        EXIT_PASS
    );
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "audit",
        "--random",
        "8",
        "--complex",
        "--seed",
        "42",
        "--json",
    ];
    let a = run_captured(&args);
    let b = run_captured(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["reports"][0]["seed"], 42);
    let c = run_captured(&[
        "audit",
        "--random",
        "8",
        "--complex",
        "--seed",
        "43",
        "--json",
    ]);
    assert_ne!(a.1, c.1);
}

#[test]
fn tol_is_recorded() {
    let (_, stdout, _) = run_captured(&[
        "audit",
        "--random",
        "4",
        "--metric-axioms",
        "--tol",
        "1e-6",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["tol"], 1e-6);
    assert_eq!(v["reports"][0]["tol"], 1e-6);
    assert_eq!(
        run_captured(&["audit", "--random", "4", "--tol", "-1"]).0,
        EXIT_USAGE
    );
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_simkernel");
    assert_eq!(
        Command::new(bin)
            .arg("counterexample")
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        Command::new(bin)
            .args(["audit", "--fixture", "paper-functions", "--cnd"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        Command::new(bin)
            .args(["gram", "--bogus"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        Command::new(bin)
            .arg("--help")
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn bare_random_flag_uses_default_sample_size() {
    let (code, stdout, _) = run_captured(&["audit", "--random", "--metric-axioms", "--json"]);
    assert_eq!(code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(
        v["reports"][0]["n"],
        simkernel::sampling::DEFAULT_SAMPLE_SIZE
    );
}
