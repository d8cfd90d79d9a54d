use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/sample.csv")
}

fn discspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discspace"))
        .arg("--input")
        .arg(sample())
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = discspace(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn ingest_reports_shape() {
    let text = stdout(&["ingest"]);
    assert!(text.contains("observations,960\n"));
    assert!(text.contains("disciplines,8\n"));
    assert!(text.contains("years,1996-2019\n"));
}

#[test]
fn rca_and_proximity_tables_are_complete() {
    let rca = stdout(&["rca", "--year", "2019"]);
    assert_eq!(rca.lines().count(), 1 + 5 * 8);
    assert!(rca.starts_with("country,discipline,rca,has_rca\n"));
    let phi = stdout(&["proximity", "--metric", "citations"]);
    assert_eq!(phi.lines().count(), 1 + 8 * 8);
    for line in phi.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let v: f64 = f[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn regress_prints_named_coefficients() {
    let text = stdout(&["regress", "--table", "4a", "--column", "3", "--cluster", "country"]);
    for term in ["avg_proximity,", "rca,", "avg_proximity_x_rca,", "constant,", "cluster_level,country,"] {
        assert!(text.lines().any(|l| l.starts_with(term)), "{term} missing");
    }
}

#[test]
fn project_writes_blocks_and_figure_file() {
    let dir = tempfile::tempdir().unwrap();
    let fig = dir.path().join("fig3.csv");
    let text = stdout(&["project", "--country", "C2", "--top", "2", "--emit-figure3", fig.to_str().unwrap()]);
    let blocks: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(blocks, ["bottom", "bottom", "top", "top"]);
    assert!(std::fs::read_to_string(&fig).unwrap().starts_with("discipline,avg_proximity,projection\n"));
}

#[test]
fn run_matches_manifest_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&["run", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(text.lines().count(), 1 + 14);
    for line in text.lines().skip(1) {
        let name = line.split(',').next().unwrap();
        assert!(dir.path().join(name).is_file());
    }
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("input_path = {:?}\nmin_docs = 100000000\n", sample())).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_discspace"))
        .args(["--config", cfg.to_str().unwrap(), "ingest"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no country reaches"));
    let out = Command::new(env!("CARGO_BIN_EXE_discspace"))
        .args(["--config", cfg.to_str().unwrap(), "--min-docs", "0", "ingest"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn bad_arguments_fail_cleanly() {
    assert!(!discspace(&["regress", "--table", "5", "--column", "1"]).status.success());
    assert!(!discspace(&["density", "--country", "ZZ"]).status.success());
    assert!(!discspace(&["report", "kde", "--figure", "1", "--period", "1999-2001"]).status.success());
    assert!(!discspace(&["rca", "--year", "2040"]).status.success());
}
