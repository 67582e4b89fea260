//! Writes a synthetic dataset, then runs the full report over it through the
//! same entry point as the binary.
//!
//! cargo run --release --example simulate_report [OUT_DIR]

use std::ffi::OsString;
use std::path::PathBuf;

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("citevis-example"));
    let data = root.join("data");
    let report = root.join("report");
    let _ = std::fs::remove_dir_all(&root);

    let args = |words: &[&str]| -> Vec<OsString> { words.iter().map(OsString::from).collect() };

    let mut sim = args(&[
        "citevis",
        "simulate",
        "--preset",
        "searchgpt-like",
        "--seed",
        "3",
    ]);
    sim.extend(["--out".into(), data.clone().into()]);
    assert_eq!(citevis::cli::run(sim), 0, "simulate failed");

    let mut rep = args(&["citevis", "report", "--B", "500"]);
    rep.extend([
        "--in".into(),
        data.into(),
        "--out".into(),
        report.clone().into(),
    ]);
    assert_eq!(citevis::cli::run(rep), 0, "report failed");

    let mut files: Vec<_> = std::fs::read_dir(&report)
        .expect("report dir")
        .map(|e| e.expect("entry").file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    println!("{} files in {}:", files.len(), report.display());
    for f in files {
        println!("  {f}");
    }
}
