use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fyoung::Scalar;
use tempfile::TempDir;

const CANTOR3: &str = r#"{"interval": ["0", "1"], "maps": [{"r": "1/3", "t": "0"}, {"r": "1/3", "t": "2/3"}]}"#;
const BINARY: &str = r#"{"interval": ["0", "1"], "maps": [{"r": "1/2", "t": "0"}, {"r": "1/2", "t": "1/2"}]}"#;
const CANTOR5: &str = r#"{"interval": ["0", "1"], "maps": [
    {"r": "1/5", "t": "0"}, {"r": "1/5", "t": "2/5"}, {"r": "1/5", "t": "4/5"}]}"#;
const THIRDS3: &str = r#"{"interval": ["0", "1"], "maps": [
    {"r": "1/3", "t": "0"}, {"r": "1/3", "t": "1/3"}, {"r": "1/3", "t": "2/3"}]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [("cantor3.json", CANTOR3), ("binary.json", BINARY), ("cantor5.json", CANTOR5), ("thirds3.json", THIRDS3)] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        run_in(self.dir.path(), args, &[])
    }
}

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fyoung"));
    cmd.current_dir(dir).args(args).env_remove("FY_MAX_WORDS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn integrate(fx: &Fixture, f: &str, g: &str) -> Output {
    fx.run(&["integrate", "--ifs", "cantor3.json", "--f", f, "--g", g])
}

#[test]
fn integrate_cantor_function() {
    let fx = Fixture::new();
    let o = integrate(&fx, "const(1)", "cantor(1,1/2)");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("n,phi_n,psi_n,delta,tail_bound\n"));
    assert!(out.ends_with("# status=converged estimate=2/1\n"), "{out}");
}

#[test]
fn integrate_exit_codes() {
    let fx = Fixture::new();
    let o = integrate(&fx, "const(1)", "cantor(1,3/4)");
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status=diverged growth_ratio=3/2"));

    let o = integrate(&fx, "step(1/3)", "step(1/3)");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimate=1/1"));

    let o = run_in(
        fx.dir.path(),
        &["integrate", "--ifs", "cantor3.json", "--f", "x", "--g", "x*cantor(1,1/2)"],
        &[("FY_MAX_WORDS", "64")],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("status=budget_exhausted"));
}

#[test]
fn config_errors_exit_one() {
    let fx = Fixture::new();
    for args in [
        vec!["integrate", "--ifs", "missing.json", "--f", "x", "--g", "x"],
        vec!["integrate", "--ifs", "cantor3.json", "--f", "y", "--g", "x"],
        vec!["integrate", "--ifs", "cantor3.json", "--f", "x", "--g", "x", "--consecutive", "0"],
        vec!["integrate", "--ifs", "cantor3.json", "--f", "x", "--g", "cantor(2,1/2)"],
        vec!["no-such-command"],
    ] {
        let o = fx.run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    std::fs::write(fx.path("bad.json"), r#"{"interval": ["0", "1"], "maps": [{"r": "1/2", "t": "0"}, {"r": "1/2", "t": "1/4"}]}"#)
        .unwrap();
    assert_eq!(fx.run(&["dimension", "--ifs", "bad.json"]).status.code(), Some(1));
    let o = run_in(fx.dir.path(), &["dimension", "--ifs", "cantor3.json"], &[("FY_MAX_WORDS", "lots")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_output_round_trips() {
    let fx = Fixture::new();
    let out = fx.path("r.json");
    let o = fx.run(&[
        "integrate", "--ifs", "cantor3.json", "--f", "x^2", "--g", "cantor(1,1/2)", "--format", "json", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "converged");
    for phi in v["phi_seq"].as_array().unwrap() {
        let text = phi.as_str().unwrap();
        let parsed = Scalar::parse(text).unwrap();
        assert!(parsed.is_exact());
        assert_eq!(parsed.render(), text);
    }
}

#[test]
fn float_mode() {
    let fx = Fixture::new();
    let o = fx.run(&["integrate", "--ifs", "cantor3.json", "--f", "const(1)", "--g", "cantor(1,1/2)", "--float"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimate=2.0"), "{}", stdout(&o));
}

#[test]
fn holder_bounds_fill_the_last_column() {
    let fx = Fixture::new();
    let o = fx.run(&[
        "integrate", "--ifs", "cantor3.json", "--f", "x", "--g", "x", "--holder-f", "1,1,1", "--holder-g", "1,1,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(!row.ends_with(','), "{row}");
}

#[test]
fn moments_table() {
    let fx = Fixture::new();
    let o = fx.run(&["moments", "--max-m", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "m\tphi\tdecimal\toracle");
    assert_eq!(rows.len(), 8);
    assert!(rows[3].starts_with("2\t3/4\t0.75"));
    assert!(rows[7].starts_with("6\t10215/23296\t"));
}

#[test]
fn dimension_output() {
    let fx = Fixture::new();
    let o = fx.run(&["dimension", "--ifs", "cantor3.json"]);
    assert_eq!(stdout(&o), "log_3(2) ≈ 0.630930\n");
    let o = fx.run(&["dimension", "--ifs", "cantor5.json"]);
    assert_eq!(stdout(&o), "log_5(3) ≈ 0.682606\n");
}

#[test]
fn substitute_reports_both_sides() {
    let fx = Fixture::new();
    let o = fx.run(&["substitute", "--source", "cantor3.json", "--target", "binary.json", "--rho", "0,1", "--f", "const(1)", "--g", "x"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("phi1\tstatus=converged estimate=2/1\n"), "{out}");
    assert!(out.contains("phi2\tstatus=converged estimate=2/1\n"));
    assert!(out.contains("sign_class\tpreserves-ends\n"));
    assert!(out.contains("verdict\tverified"));
    assert!(out.contains("level_identity\tholds"));

    let o = fx.run(&["substitute", "--source", "cantor5.json", "--target", "thirds3.json", "--rho", "2,1,0", "--f", "const(1)", "--g", "x"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("phi1\tstatus=converged estimate=-2/1\n"), "{out}");
    assert!(out.contains("sign_class\tflips-ends"));

    let o = fx.run(&["substitute", "--source", "thirds3.json", "--target", "cantor5.json", "--rho", "0,2,1", "--f", "x", "--g", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("falsified"));
}

#[test]
fn verify_passes() {
    let fx = Fixture::new();
    let o = fx.run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("13/13 checks passed\n"));
}

#[test]
fn output_independent_of_threads() {
    let fx = Fixture::new();
    let args = ["integrate", "--ifs", "cantor3.json", "--f", "x^3", "--g", "cantor(1,1/2)", "--format", "json"];
    let one = fx.run(&[&["--threads", "1"], &args[..]].concat());
    let eight = fx.run(&[&["--threads", "8"], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, eight.stdout);
    let float_args = ["integrate", "--ifs", "cantor3.json", "--f", "x^3", "--g", "cantor(1,1/2)", "--float", "--depth", "14"];
    let one = fx.run(&[&["--threads", "1"], &float_args[..]].concat());
    let eight = fx.run(&[&["--threads", "8"], &float_args[..]].concat());
    assert_eq!(one.stdout, eight.stdout);
    let v1 = fx.run(&["--threads", "1", "verify"]);
    let v8 = fx.run(&["--threads", "8", "verify"]);
    assert_eq!(v1.stdout, v8.stdout);
}

#[test]
fn sweep_regions() {
    let fx = Fixture::new();
    let o = fx.run(&["sweep", "--k", "1", "--grid", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let expect = match r[3] {
            "integrable" => "converged",
            _ => "diverged",
        };
        assert_eq!(r[4], expect, "{r:?}");
    }
    assert!(rows.iter().any(|r| r[3] == "(i)") && rows.iter().any(|r| r[3] == "(ii)"));
}
