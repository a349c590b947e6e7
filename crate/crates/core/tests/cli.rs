use std::path::Path;
use std::process::{Command, Output};

use aloha_entropy::experiment::read_provenance;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aloha-entropy"))
        .args(args)
        .env("ALOHA_ENTROPY_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Header and data rows of a provenance-headed CSV.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{line}: {e}"))
}

#[test]
fn provenance_block_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let out = bin(&[
        "analyze",
        "--m",
        "12",
        "--alpha",
        "0.05",
        "--beta",
        "0.01",
        "--policy",
        "0.1,0.9,0.8,0",
        "--output",
        path_str(&first),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&first).unwrap();
    assert!(text.starts_with("# aloha-entropy "));
    let params = read_provenance(&text).unwrap();
    assert_eq!(params.m.unwrap().0, 12);
    assert_eq!(params.output, None);

    let out = bin(&[
        "analyze",
        "--config",
        path_str(&first),
        "--output",
        path_str(&second),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(text, std::fs::read_to_string(&second).unwrap());

    // flags override the file
    let out = bin(&["analyze", "--config", path_str(&first), "--m", "13"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[1][0], "13");
}

#[test]
fn toml_config_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "m = 1\nalpha = 0.02\nbeta = 0.02\npolicy = \"reactive\"\n",
    )
    .unwrap();
    let out = bin(&["analyze", "--config", path_str(&cfg)]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let h = rows[0].iter().position(|c| c == "entropy_bits").unwrap();
    assert_eq!(rows[1][h].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn every_row_matches_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &[
            "simulate", "--m", "5", "--alpha", "0.1", "--beta", "0.1", "--policy", "random",
            "--slots", "2e4", "--seed", "4",
        ],
        &[
            "timeline", "--m", "5", "--alpha", "0.1", "--beta", "0.1", "--policy", "reactive",
            "--slots", "300",
        ],
        &[
            "sweep-nodes",
            "--alpha",
            "0.02",
            "--beta",
            "0.02",
            "--m-values",
            "10,80",
            "--strategies",
            "random,load-one",
        ],
        &[
            "sweep-asymmetry",
            "--m",
            "10",
            "--budget",
            "0.2",
            "--etas",
            "1,4",
            "--strategies",
            "random,reactive",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let path = dir.path().join(format!("{i}.csv"));
        let mut args = args.to_vec();
        args.extend(["--output", path_str(&path)]);
        let out = bin(&args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let rows = csv_rows(&std::fs::read_to_string(&path).unwrap());
        assert!(rows.len() > 1, "{args:?}");
        assert!(rows.iter().all(|r| r.len() == rows[0].len()), "{args:?}");
    }

    // an infeasible strategy becomes an error row, not a failed run
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("2.csv")).unwrap());
    let kind = rows[0].iter().position(|c| c == "error_kind").unwrap();
    let flagged: Vec<_> = rows[1..].iter().filter(|r| !r[kind].is_empty()).collect();
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0][0], "80");
}

#[test]
fn simulation_is_reproducible_per_seed() {
    let args = [
        "simulate", "--m", "8", "--alpha", "0.05", "--beta", "0.05", "--policy", "reactive",
        "--slots", "5e4",
    ];
    let run = |seed: &str| bin(&[&args[..], &["--seed", seed]].concat()).stdout;
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn validate_reports_json() {
    let out = bin(&[
        "validate", "--m", "1", "--alpha", "0.02", "--beta", "0.02", "--policy", "reactive",
        "--slots", "2e5",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["mode"], "validate");
    assert_eq!(doc["result"]["passed"], true);
    assert_eq!(doc["config"]["m"], 1);
}

#[test]
fn errors_are_json_records_with_exit_codes() {
    let out = bin(&[
        "analyze", "--m", "0", "--alpha", "0.02", "--beta", "0.02", "--policy", "reactive",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"]["kind"], "InvalidParameter");

    let out = bin(&[
        "analyze", "--m", "4", "--alpha", "0.02", "--beta", "0.02", "--policy", "0,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        error_record(&out)["error"]["module"],
        "uncertainty-analysis"
    );

    let out = bin(&["analyze", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "ConfigError");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "m = 4\nalpha = 0.1\nbeta = 0.1\npolicy = \"reactive\"\nslots = 100\n",
    )
    .unwrap();
    let out = bin(&["analyze", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_worker_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_aloha-entropy"))
        .args(["figure", "fig4"])
        .env("ALOHA_ENTROPY_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
