use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sdrelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdrelax")).args(args).output().unwrap()
}

fn write_config(dir: &Path, v: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sequence_writes_csv_to_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({"command": "sequence", "example": "broken-ramp", "n": [1, 2, 4, 8, 16]}));
    let out = dir.path().join("br.csv");
    let o = sdrelax(&["--config", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(2).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let n = r[0];
        assert!((r[1] - 0.5 / n).abs() < 1e-10);
        assert!((r[2] - (n - 1.0) / n).abs() < 1e-10);
        assert!((r[3] - (n - 1.0) / n).abs() < 1e-10);
    }
}

#[test]
fn verify_expl_gaps_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({"command": "verify-expl", "dim": 2, "samples": 20, "seed": 7, "output_path": dir.path().join("s.csv")}),
    );
    let o = sdrelax(&["--config", &cfg, "--jobs", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        let mid_gap: f64 = cells[5].parse().unwrap();
        assert!(mid_gap.abs() <= 1e-6, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 60);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({"command": "vpm", "dim": 2, "samples": 3, "seed": 1}));
    let a = sdrelax(&["--config", &cfg]).stdout;
    let b = sdrelax(&["--config", &cfg, "--seed", "2"]).stdout;
    let c = sdrelax(&["--config", &cfg, "--seed", "1"]).stdout;
    assert_ne!(a, b);
    assert_eq!(a, c);
}

#[test]
fn validate_densities_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({"command": "validate-densities", "density": "abs_normal_jump"}));
    let o = sdrelax(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let verdict = |h: &str| {
        report["checks"].as_array().unwrap().iter().find(|c| c["hypothesis"] == h).unwrap()["verdict"].clone()
    };
    assert_eq!(verdict("H3"), "pass");
    assert_eq!(verdict("H4"), "pass");
    assert_eq!(verdict("H2-lower"), "warn");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({"command": "teleport"}));
    let o = sdrelax(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);

    let o = sdrelax(&["--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(dir.path(), &json!({"command": "sequence", "example": "broken-ramp", "n": [2]}));
    let o = sdrelax(&["--config", &cfg, "--output", dir.path().join("no/such/dir.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let cfg = write_config(dir.path(), &json!({"command": "verify-expl", "dim": 2, "samples": 2, "seed": 1, "tolerance": -1.0}));
    let o = sdrelax(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "sandwich_violation");
}
