use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use metric_dbscan_cli::io::load_clustering;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metric-dbscan"))
        .args(args)
        .env_remove("METRIC_DBSCAN_SEED")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "n=400,dim=8,k=4,radius=2,outliers=4,box=60";

#[test]
fn run_writes_clustering_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let stats = dir.path().join("s.txt");
    let o = bin(&[
        "run",
        "--synthetic",
        SMALL,
        "--epsilon",
        "10",
        "--min-pts",
        "4",
        "--seed",
        "3",
        "--out",
        path_str(&out),
        "--stats",
        path_str(&stats),
        "--no-timings",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = load_clustering(&out).unwrap();
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().enumerate().all(|(i, r)| r.index == i));
    let text = fs::read_to_string(&stats).unwrap();
    assert!(text.contains("n=400\n"));
    assert!(text.contains("part1_secs=NA\n"));
    assert_eq!(text, String::from_utf8(o.stdout).unwrap());
}

#[test]
fn verify_passes_and_reports_ok() {
    for variant in ["metric1", "metric2"] {
        let o = bin(&[
            "verify",
            "--synthetic",
            SMALL,
            "--epsilon",
            "10",
            "--min-pts",
            "4",
            "--variant",
            variant,
            "--z-tilde",
            "1",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("verify: ok"));
    }
}

#[test]
fn bad_configuration_exits_with_two() {
    let cases: [&[&str]; 5] = [
        &["run", "--synthetic", SMALL, "--epsilon", "-1"],
        &[
            "run",
            "--synthetic",
            SMALL,
            "--epsilon",
            "1",
            "--z-frac",
            "1.5",
        ],
        &["run", "--synthetic", "n=5,k=10", "--epsilon", "1"],
        &["run", "--epsilon", "1"],
        &[
            "sweep",
            "--synthetic",
            SMALL,
            "--epsilon",
            "1",
            "--ratios",
            "0.7",
        ],
    ];
    for args in cases {
        let o = bin(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn unreadable_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    let o = bin(&["run", "--input", path_str(&missing), "--epsilon", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3\n").unwrap();
    let o = bin(&["run", "--input", path_str(&bad), "--epsilon", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn gen_then_run_from_file_matches_synthetic_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let o = bin(&[
        "gen",
        "--synthetic",
        SMALL,
        "--seed",
        "9",
        "--out",
        path_str(&data),
    ]);
    assert!(o.status.success());
    let common = [
        "--epsilon",
        "10",
        "--min-pts",
        "4",
        "--seed",
        "9",
        "--no-timings",
    ];
    let from_file = bin(&[&["run", "--input", path_str(&data)][..], &common].concat());
    let direct = bin(&[&["run", "--synthetic", SMALL][..], &common].concat());
    assert!(from_file.status.success() && direct.status.success());
    assert_eq!(from_file.stdout, direct.stdout);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_metric-dbscan"));
        c.args([
            "gen",
            "--synthetic",
            "n=50,k=2,dim=2",
            "--out",
            "/dev/stdout",
        ]);
        c.env_remove("METRIC_DBSCAN_SEED");
        if let Some(v) = env {
            c.env("METRIC_DBSCAN_SEED", v);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_ne!(run(Some("5"), None), run(None, None));
}
