use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cfran(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfran"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn smoke_config(dir: &Path) -> String {
    let path = dir.join("smoke.toml");
    fs::write(
        &path,
        r#"
num_oru = 9
antennas_per_oru = 2
num_ue = 4
num_edu = 3
mc_drops = 2
mc_realizations = 8
schemes = ["joint-mmse", "edu-mmse", "edu-pmmse"]

[ga]
population_size = 8
generations = 5

[ql]
episodes = 5
"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_config_is_usage_error() {
    let out = cfran(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn bogus_scheme_lists_valid_tags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path());
    let out = cfran(&["simulate", "--config", &cfg, "--schemes", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for tag in ["joint-mmse", "lp-mrc", "edu-pmmse"] {
        assert!(err.contains(tag), "{err}");
    }
}

#[test]
fn simulate_end_to_end_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path());
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = cfran(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--association",
            "ql",
            "--quant-bits",
            "8",
            "--phase-drift-deg",
            "10",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    let raw_a = fs::read_to_string(a.join("raw.csv")).unwrap();
    assert_eq!(raw_a, fs::read_to_string(b.join("raw.csv")).unwrap());
    assert!(raw_a.contains("# quantizer_bits = 8"));
    // 2 drops x 3 schemes x 2 links x (4 UEs + 1 sum row).
    let rows = raw_a.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 2 * 3 * 2 * 5);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["drops_completed"], 2);
    assert!(summary["results"][0]["median"].as_f64().unwrap() > 0.0);
}

#[test]
fn deploy_and_associate_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path());
    let out_dir = dir.path().join("ga");
    let out = cfran(&["deploy-ga", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let partition = cfran::deployment::Partition::from_file(&out_dir.join("partition.json")).unwrap();
    assert!(partition.satisfies_balance(3));
    assert_eq!(fs::read_to_string(out_dir.join("fitness.csv")).unwrap().lines().count(), 1 + 6);

    let ql_dir = dir.path().join("ql");
    let out = cfran(&["associate-ql", "--config", &cfg, "--out", ql_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(ql_dir.join("association.csv")).unwrap();
    cfran::association::EduAssociation::from_csv(text.as_bytes(), 4, 3).unwrap();
    assert!(ql_dir.join("rewards.csv").exists());
    assert!(ql_dir.join("qlearning.json").exists());

    // A partition file feeds back into a simulation.
    let sim_dir = dir.path().join("from-file");
    let out = cfran(&[
        "simulate",
        "--config",
        &cfg,
        "--deployment",
        "file",
        "--out",
        sim_dir.to_str().unwrap(),
    ]);
    // No partition_file in the config: a machine-readable error, not a panic.
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "invalid_config");
}

#[test]
fn sweep_over_edus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = cfran(&["sweep", "--config", &cfg, "--edus", "1,3", "--drops", "1", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("m1/summary.json").exists());
    assert!(out_dir.join("m3/raw.csv").exists());
}

#[test]
fn invalid_config_reports_every_issue() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "num_ue = 30\nnum_edu = 0\n").unwrap();
    let out = cfran(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "invalid_config");
    let issues = record["issues"].as_array().unwrap();
    assert!(issues.len() >= 2);
    assert!(issues.iter().any(|i| i.as_str().unwrap().contains("pilot shortage")));
}
