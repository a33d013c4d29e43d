use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn irho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irho"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn partial_trace_entries_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pt.jsonl");
    let out = irho(&["partial-trace", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&path);
    assert_eq!(rows.len(), 5);
    for row in &rows[..4] {
        let want = if row["row_index"] == row["col_index"] {
            0.5
        } else {
            0.0
        };
        assert!((row["re"].as_f64().unwrap() - want).abs() <= 1e-12);
        assert_eq!(row["im"].as_f64().unwrap(), 0.0);
    }
    assert_eq!(rows[4]["record"], "summary");
    assert_eq!(rows[4]["assertions_passed"], true);
}

#[test]
fn every_row_carries_seed_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ftl.jsonl");
    let out = irho(&[
        "ftl-demo",
        "--device",
        "basis-oracle",
        "--message",
        "1011",
        "--n",
        "8",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&path);
    assert_eq!(rows.len(), 5);
    let hash = rows[0]["config_hash"].clone();
    for row in &rows {
        assert_eq!(row["seed"], 7);
        assert_eq!(row["config_hash"], hash);
    }
    let summary = rows.last().unwrap();
    assert_eq!(summary["bit_error_rate"], 0.0);
    assert_eq!(summary["decoded_message"], "1011");
}

#[test]
fn nosignal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ns.jsonl");
    let out = irho(&[
        "nosignal",
        "--n",
        "100000",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&path);
    assert_eq!(rows[0]["record"], "analytic");
    assert!(rows[0]["bob_density_trace_distance"].as_f64().unwrap() <= 1e-12);
    assert_eq!(rows[1]["record"], "empirical");
    assert!(rows[1]["test"]["p_value"].as_f64().unwrap() > 0.001);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# demo\ndevice = basis-oracle\nmessage = 0110\nn = 3\nseed = 5\nbasis1 = 1.5707963267948966,0\n").unwrap();
    let path = dir.path().join("out.jsonl");
    let out = irho(&[
        "ftl-demo",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = json_lines(&path);
    let summary = rows.last().unwrap();
    assert_eq!(summary["seed"], 6);
    assert_eq!(summary["decoded_message"], "0110");
    assert_eq!(summary["n_per_block"], 3);
}

#[test]
fn usage_errors_exit_2_with_field_name() {
    let out = irho(&["ftl-demo", "--basis0", "up-down", "--basis1", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("basis1"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "m_clones = lots\n").unwrap();
    let out = irho(&["flash-demo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m_clones"));

    assert_eq!(irho(&["teleport"]).status.code(), Some(2));
    assert_eq!(
        irho(&["ftl-demo", "--mode", "exact-half"]).status.code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing_dir = dir.path().join("nope").join("out.jsonl");
    assert_eq!(
        irho(&["chsh", "--n", "10", "--out", missing_dir.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let missing_cfg = dir.path().join("missing.cfg");
    assert_eq!(
        irho(&["chsh", "--config", missing_cfg.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn csv_output_is_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = irho(&[
        "tomography",
        "--trials",
        "5",
        "--n",
        "100",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec![
            "row",
            "record",
            "command",
            "seed",
            "config_hash",
            "key",
            "value"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(&rows.last().unwrap()[1], "summary");
}

#[test]
fn direct_exact_half_blocks_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eh.jsonl");
    let out = irho(&[
        "ftl-demo",
        "--device",
        "basis-oracle",
        "--source",
        "direct",
        "--mode",
        "exact-half",
        "--n",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for row in json_lines(&path).iter().filter(|r| r["record"] == "block") {
        assert_eq!(row["alice_plus_fraction"], 0.5);
    }
}
