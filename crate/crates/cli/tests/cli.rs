use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracorlicz"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn ops_verify_passes_and_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&configs().join("ops-verify.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS identities")), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("PASS oracle")), "{stdout}");
    let s = summary(dir.path());
    assert_eq!(s["kind"], "ops-verify");
    assert_eq!(s["pass"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["phi-audit", "s-dependence"] {
        let cfg = configs().join(format!("{name}.toml"));
        let a = dir.path().join(format!("{name}-a"));
        let b = dir.path().join(format!("{name}-b"));
        assert_eq!(run(&cfg, &a, &["--quiet"]).status.code(), Some(0), "{name}");
        assert_eq!(run(&cfg, &b, &["--quiet"]).status.code(), Some(0), "{name}");
        for file in ["records.csv", "summary.json"] {
            assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{name}/{file}");
        }
    }
}

#[test]
fn overrides_reach_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&configs().join("ops-verify.toml"), dir.path(), &["--quiet", "--grid-n", "128", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(s["grid"]["n"], 128);
    assert_eq!(s["seed"], 3);
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    let identity_rows: Vec<&str> = csv.lines().skip(1).filter(|l| !l.starts_with("oracle")).collect();
    assert!(!identity_rows.is_empty());
    assert!(identity_rows.iter().all(|l| l.split(',').nth(3) == Some("128")));
}

#[test]
fn capture_is_reproducible_and_matches_the_shipped_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("ineq-sweep.toml");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &a, &["--quiet", "--capture-baselines"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--quiet", "--capture-baselines"]).status.code(), Some(0));
    let ja = std::fs::read(a.join("baselines.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("baselines.json")).unwrap());
    let shipped: Value = serde_json::from_slice(&std::fs::read(configs().join("baselines/ineq-sweep.json")).unwrap()).unwrap();
    assert_eq!(serde_json::from_slice::<Value>(&ja).unwrap(), shipped);
}

#[test]
fn failing_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&configs().join("cubic-dec2.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().lines().any(|l| l.starts_with("FAIL (Dec)_2")));
    assert!(String::from_utf8(o.stderr).unwrap().contains("failed:"));
    assert_eq!(summary(dir.path())["pass"], false);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&dir.path().join("nope.toml"), &dir.path().join("a"), &[]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8(missing.stderr).unwrap().starts_with("error:"));

    let cases = [
        "[grid]\ndim = 1\nn = 100\nlength = 8.0\n[phi]\nfamily = \"power\"\np = 2.0\n[experiment]\nkind = \"ops-verify\"\n",
        "[grid]\ndim = 1\nn = 64\nlength = 8.0\n[phi]\nfamily = \"power\"\np = 2.0\n[experiment]\nkind = \"solve\"\n",
        "[grid]\ndim = 1\nn = 64\nlength = 8.0\n[phi]\nfamily = \"cubic\"\n[experiment]\nkind = \"phi-audit\"\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{k}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let o = run(&cfg, &dir.path().join(format!("out{k}")), &[]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
