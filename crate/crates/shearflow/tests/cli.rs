use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shearflow-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn shearflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shearflow"))
}

#[test]
fn beta_identities_writes_artifacts_and_exits_zero() {
    let out = scratch_dir("beta");
    let status = shearflow()
        .args(["beta-identities", "--nu", "0.01", "--workers", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(out.join("beta_identities.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# shearflow 0.1.0 config-hash "));
    assert_eq!(lines.next().unwrap(), "nu,b,k,steps,worst_identity,worst_rate_change");
    assert!(!csv.contains('\r'));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["criteria"][0]["id"], 7);
    let _ = fs::remove_dir_all(out);
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = scratch_dir("det-a");
    let b = scratch_dir("det-b");
    for dir in [&a, &b] {
        let s = shearflow().args(["verify-operators", "--domain", "channel", "--out"]).arg(dir).output().unwrap();
        assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stdout));
    }
    for name in ["operator_bounds.csv", "plane_jk_equivalence.csv", "ghost_limit.csv"] {
        assert_eq!(fs::read_to_string(a.join(name)).unwrap(), fs::read_to_string(b.join(name)).unwrap(), "{name}");
    }
    let _ = fs::remove_dir_all(a);
    let _ = fs::remove_dir_all(b);
}

#[test]
fn malformed_config_fails_with_diagnostic() {
    let dir = scratch_dir("bad");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    fs::write(&cfg, "seed = 3\n[domain]\nkind = \"channel\"\nviscosity = 0.1\n").unwrap();
    let s = shearflow().args(["certify-linear", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    let err = String::from_utf8_lossy(&s.stderr);
    assert!(err.contains("viscosity") && err.contains("line 4"), "{err}");
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn unknown_domain_is_rejected() {
    let s = shearflow().args(["scan-regimes", "--domain", "torus"]).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&s.stderr).contains("torus"));
}
