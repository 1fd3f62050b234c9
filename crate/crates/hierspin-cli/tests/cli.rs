use std::fs;
use std::path::Path;
use std::process::Command;

fn hierspin(dir: &Path, args: &[&str], config: &str) -> (i32, String, String) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hierspin"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn outputs(dir: &Path, prefix: &str, ext: &str) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            name.starts_with(prefix) && name.ends_with(ext)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn critical_points_row() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hierspin(dir.path(), &["limits"], r#"{"kind":"limits","beta":[2],"op":"critical_points"}"#);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(&outputs(dir.path(), "limits_", ".csv")[0]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema: critical_points/v1");
    assert_eq!(lines[1], "beta,lambda_a,m_a,m_b");
    assert_eq!(lines[2], "2,0.440687,0.707107,-0.9868");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&outputs(dir.path(), "limits_", ".json")[0]).unwrap()).unwrap();
    assert!(manifest["defaults_applied"].as_array().unwrap().iter().any(|d| d == "sigma"));
}

#[test]
fn supercritical_converge_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hierspin(dir.path(), &["converge"], r#"{"kind":"converge","beta":[0.6,0.6]}"#);
    assert_eq!(code, 1);
    assert!(err.contains("subciticality violated"), "{err}");
}

#[test]
fn unknown_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hierspin(dir.path(), &["limits"], r#"{"kind":"limits","sigmaa":1}"#);
    assert_eq!(code, 1);
    assert!(err.contains("sigmaa"), "{err}");
}

#[test]
fn region_graph_regime() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hierspin(dir.path(), &["zerotemp"], r#"{"kind":"zerotemp","op":"region","sigma":3,"alpha":[1,1]}"#);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(&outputs(dir.path(), "zerotemp_", ".csv")[0]).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",graph")));
}

#[test]
fn simulate_is_reproducible_from_seed() {
    let cfg = r#"{"kind":"simulate","beta":[0.3,0.3],"block_size":4,"timescale":{"exponent":1,"horizon":1,"points":4}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(hierspin(a.path(), &["simulate", "--seed", "7"], cfg).0, 0);
    assert_eq!(hierspin(b.path(), &["simulate", "--seed", "7"], cfg).0, 0);
    let fa = outputs(a.path(), "simulate_", ".csv");
    let fb = outputs(b.path(), "simulate_", ".csv");
    assert_eq!(fa[0].file_name(), fb[0].file_name());
    assert_eq!(fs::read(&fa[0]).unwrap(), fs::read(&fb[0]).unwrap());
}

#[test]
fn accept_reports_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = hierspin(dir.path(), &["accept"], r#"{"kind":"accept","criteria":[1,2,10,12]}"#);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS]")).count(), 4, "{out}");
}

#[test]
fn accept_failure_exits_two() {
    // the jump-departure check does not pass at the stated size
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = hierspin(dir.path(), &["accept"], r#"{"kind":"accept","criteria":[8]}"#);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("[FAIL]"));
}

#[test]
fn bad_criterion_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hierspin(dir.path(), &["accept"], r#"{"kind":"accept","criteria":[13]}"#);
    assert_eq!(code, 1);
    assert!(err.contains("criteria"), "{err}");
}

#[test]
fn manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = hierspin(dir.path(), &["limits"], r#"{"kind":"limits","op":"invariant_curve","beta":[0.5,1,2]}"#);
    assert_eq!(code, 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&outputs(dir.path(), "limits_", ".json")[0]).unwrap()).unwrap();
    let text = manifest["config"].to_string();
    let parsed = hierspin_cli::parse_config(&text).unwrap();
    assert!(parsed.defaults.is_empty());
    assert_eq!(hierspin_cli::config_hash(&parsed.config), manifest["config_hash"].as_str().unwrap());
}
