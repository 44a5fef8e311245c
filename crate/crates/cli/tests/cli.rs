use std::path::PathBuf;
use std::process::{Command, Output};

const F: &str = "p*q*q[2]";
const G: &str = "p[1]*exp(q[1])";
const H: &str = "p[2]*cos(q)";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varschouten"))
        .args(args)
        .env_remove("VARSCHOUTEN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn context_file(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("varschouten-{}-{name}.ctx", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn reference_jacobi_is_zero() {
    let o = run(&["jacobi", "--F", F, "--G", G, "--H", H]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("defect: "));
    assert_eq!(out.lines().last(), Some("ZERO"));
}

#[test]
fn jacobi_json_and_zero_argument() {
    let o = run(&["--format", "json", "jacobi", "--F", F, "--G", G, "--H", "0"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "ZERO");
    assert!(v["defect"]["monomials"].is_array());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["jacobi", "--F", "q * x", "--G", G, "--H", H],
        vec!["jacobi", "--F", "p + q", "--G", G, "--H", H],
        vec!["bracket", "--F", "q $ p", "--G", G],
        vec!["euler", "--density", F, "--wrt", "r"],
        vec!["frobnicate"],
        vec!["fuzz", "--count", "0"],
        vec!["--ctx", "/nonexistent/ctx", "normalize", "--density", "q"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn bracket_and_euler_output() {
    let o = run(&["bracket", "--F", G, "--G", H]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("exp(q[1])"));
    let o = run(&["euler", "--density", F, "--wrt", "p", "--side", "left"]);
    assert_eq!(stdout(&o).trim(), "q*q[2]");
    let o = run(&["--format", "latex", "normalize", "--density", "p*q"]);
    assert!(stdout(&o).contains("q^{\\dagger}"));
}

#[test]
fn trace_reports_verified() {
    let o = run(&["trace", "--F", F, "--G", G, "--H", H]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("verdict: verified"));
    let o = run(&["--format", "json", "trace", "--F", F, "--G", G, "--H", H]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lhs_terms"].as_array().unwrap().len(), 8);
    assert_eq!(v["verdict"]["status"], "verified");
}

#[test]
fn fuzz_is_deterministic_and_seed_overridable() {
    let args = ["--format", "json", "fuzz", "--seed", "5", "--count", "6"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let with_env = Command::new(env!("CARGO_BIN_EXE_varschouten"))
        .args(["--format", "json", "fuzz", "--seed", "99", "--count", "6"])
        .env("VARSCHOUTEN_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(with_env.stdout, a.stdout);
    let plain = run(&["fuzz", "--seed", "5", "--count", "6"]);
    assert!(stdout(&plain).starts_with("6/6 verified"));
    let bad = Command::new(env!("CARGO_BIN_EXE_varschouten"))
        .args(["fuzz", "--count", "1"])
        .env("VARSCHOUTEN_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn custom_context_file() {
    let path = context_file(
        "two",
        "indep x y\nfield u odd antifield a\nfield v even antifield b\n",
    );
    let p = path.to_str().unwrap();
    let o = run(&[
        "--ctx",
        p,
        "jacobi",
        "--F",
        "a*u[1,0]",
        "--G",
        "b*v[0,1]*u",
        "--H",
        "a[1,1]*cos(v)",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().last(), Some("ZERO"));
    let o = run(&["--ctx", p, "normalize", "--density", "q"]);
    assert_eq!(code(&o), 2);
    std::fs::remove_file(path).unwrap();
}
