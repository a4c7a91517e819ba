use std::fs;
use std::path::Path;
use std::process::Command;

use vcpower::harness::{self, RowStatus};

fn vcpower(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_vcpower")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "vcpower {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("scenario.json");
    fs::write(
        &path,
        r#"{
            "architecture": {"vehicles": 6, "fog_servers": 3},
            "workload": {"count": 12},
            "harness": {"replications": 2, "seed": 9}
        }"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    vcpower(&["run", "--config", &cfg, "--sweep", "traffic", "--out", out.to_str().unwrap()]);

    let rows = harness::read_results(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 10 * 2 * 5);
    assert_eq!(fs::read_to_string(out.join("results.csv")).unwrap().lines().count(), 101);
    assert!(rows.iter().all(|r| r.status != RowStatus::Failed));
    // row order: point, replication, strategy name
    let names: Vec<&str> = rows[..5].iter().map(|r| r.strategy.as_str()).collect();
    assert_eq!(names, ["cf_optimal", "cfv_distributed", "cfv_random", "cfv_single", "cloud"]);
    assert!(rows[..5].iter().all(|r| r.seed == rows[0].seed));
    assert!(rows.windows(2).all(|w| (w[0].point, w[0].replication) <= (w[1].point, w[1].replication)));

    for s in ["cloud", "cf_optimal", "cfv_single", "cfv_distributed", "cfv_random"] {
        let tsv = fs::read_to_string(out.join("plotdata").join(format!("{s}.tsv"))).unwrap();
        assert_eq!(tsv.lines().count(), 11, "{s}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["generator"].as_str().unwrap().contains("ChaCha8"));
    assert!(out.join("timings.csv").exists());
}

#[test]
fn savings_recomputed_from_csv_match_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    vcpower(&[
        "run",
        "--config",
        &cfg,
        "--sweep",
        "processing",
        "--replications",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = dir.path().join("table.csv");
    vcpower(&["savings", "--in", out.join("results.csv").to_str().unwrap(), "--out", table.to_str().unwrap()]);
    assert_eq!(fs::read(&table).unwrap(), fs::read(out.join("savings.csv")).unwrap());
    let rows = harness::read_savings(&table).unwrap();
    assert_eq!(rows.len(), 5);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        vcpower(&["run", "--config", &cfg, "--replications", "1", "--out", out.to_str().unwrap()]);
        files.push(fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);

    let out = dir.path().join("c");
    vcpower(&["run", "--config", &cfg, "--replications", "1", "--seed", "10", "--out", out.to_str().unwrap()]);
    assert_ne!(files[0], fs::read(out.join("results.csv")).unwrap());
}

#[test]
fn single_cloud_row_is_affine_predictable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.json");
    fs::write(
        &cfg,
        r#"{"workload": {"count": 1, "proc_sd_ghz": 0, "traffic_sd_mbps": 0}, "harness": {"replications": 1}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    vcpower(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "processing",
        "--strategies",
        "cloud",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = harness::read_results(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 10);
    // 1 GHz at 75 W/GHz plus 50 Mb/s over the cloud path and the RSU
    let last = rows.last().unwrap();
    assert!((last.total_w.unwrap() - 92.015).abs() < 1e-3, "{}", last.total_w.unwrap());
    assert!(!out.join("savings.csv").exists());
}

#[test]
fn lp_dump_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("m.lp");
    let out = vcpower(&["lp-dump", "--strategy", "cfv_distributed", "--out", lp.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1800 variables, 105 rows"));
    let text = fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\ Problem") && text.ends_with("End\n"));

    let bad = Command::new(env!("CARGO_BIN_EXE_vcpower"))
        .args(["lp-dump", "--strategy", "cloud", "--out", lp.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_vcpower"))
        .args(["run", "--strategies", "nope", "--out", "x"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
