use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use citevis::cli::REPORT_FILES;

fn citevis(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_citevis"));
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().unwrap()
}

fn simulate(root: &Path) -> PathBuf {
    let data = root.join("data");
    let out = citevis(
        &[
            "simulate",
            "--preset",
            "perplexity-like",
            "--n-queries",
            "40",
            "--n-samples",
            "3",
        ],
        &[("--out", &data)],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    data
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect()
}

#[test]
fn report_writes_every_listed_file() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path());
    let report = tmp.path().join("report");
    let out = citevis(
        &["report", "--B", "100"],
        &[("--in", &data), ("--out", &report)],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in REPORT_FILES {
        assert!(report.join(f).is_file(), "missing {f}");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(report.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], "citevis.report/v1");
    assert_eq!(json["files"].as_array().unwrap().len(), REPORT_FILES.len());
}

#[test]
fn ci_csv_has_the_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path());
    let out_dir = tmp.path().join("ci");
    let out = citevis(
        &["ci", "--metric", "share", "--B", "100"],
        &[("--in", &data), ("--out", &out_dir)],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv_path = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .expect("a csv output");
    let mut rdr = csv::Reader::from_path(csv_path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    for col in [
        "domain",
        "point",
        "lower",
        "upper",
        "width",
        "replicates",
        "alpha",
        "seed",
    ] {
        assert!(
            header.iter().any(|h| h == col),
            "no {col} column in {header:?}"
        );
    }
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    let idx = |c: &str| header.iter().position(|h| h == c).unwrap();
    for r in rows {
        let lo: f64 = r[idx("lower")].parse().unwrap();
        let hi: f64 = r[idx("upper")].parse().unwrap();
        let w: f64 = r[idx("width")].parse().unwrap();
        assert!(lo <= hi && (hi - lo - w).abs() < 1e-9);
        assert_eq!(&r[idx("replicates")], "100");
    }
}

#[test]
fn subcommands_leave_inputs_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path());
    let before = snapshot(&data);
    for (i, sub) in [
        "ingest",
        "metrics",
        "overlap",
        "dispersion",
        "drift",
        "content-status",
    ]
    .iter()
    .enumerate()
    {
        let out_dir = tmp.path().join(format!("out{i}"));
        let out = citevis(&[sub], &[("--in", &data), ("--out", &out_dir)]);
        assert!(
            out.status.success(),
            "{sub}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let record = if *sub == "ingest" {
            "ingest_report.json"
        } else {
            "provenance.json"
        };
        assert!(out_dir.join(record).is_file(), "{sub} wrote no {record}");
    }
    assert_eq!(snapshot(&data), before);
}

#[test]
fn refuses_to_write_over_its_input() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path());
    let before = snapshot(&data);
    let out = citevis(&["ingest"], &[("--in", &data), ("--out", &data)]);
    assert!(!out.status.success());
    assert_eq!(snapshot(&data), before);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(citevis(&["--help"], &[]).status.code(), Some(0));
    assert_eq!(citevis(&["no-such-command"], &[]).status.code(), Some(2));
    let bad_preset = citevis(
        &["simulate", "--preset", "bing-like"],
        &[("--out", &tmp.path().join("x"))],
    );
    assert_eq!(bad_preset.status.code(), Some(2));
    let data = simulate(tmp.path());
    let bad_alpha = citevis(
        &["ci", "--alpha", "1.5"],
        &[("--in", &data), ("--out", &tmp.path().join("y"))],
    );
    assert_eq!(bad_alpha.status.code(), Some(2));
    let missing = citevis(
        &["metrics"],
        &[
            ("--in", &tmp.path().join("absent.jsonl")),
            ("--out", &tmp.path().join("z")),
        ],
    );
    assert_eq!(missing.status.code(), Some(1));
}
