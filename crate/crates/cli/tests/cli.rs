use std::process::{Command, Output};

fn couplings(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_couplings")).args(args).output().unwrap()
}

#[test]
fn check_identities_exits_zero_and_prints_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = couplings(&["check", "--suite", "identities", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true);
    }
    assert!(dir.path().join("check.json").exists());
}

#[test]
fn enumerate_writes_both_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let out = couplings(&["enumerate", "--row", "sw", "--graph", "triangle", "--q", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["omega_marginal.csv", "sigma_marginal.csv", "report.json", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn stochastic_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = couplings(&["sample", "--row", "sw", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = couplings(&["enumerate", "--row", "sw", "--set", "colour=red", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decay_reports_containment() {
    let dir = tempfile::tempdir().unwrap();
    let out = couplings(&["decay", "--sizes", "3..4", "--steps", "500", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
