//! Parses a small JSONL corpus, showing domain normalization and line-level rejects.
//!
//! cargo run --example ingest

use citevis::corpus::{extract_domain, parse_dataset};

const CORPUS: &str = r#"{"platform":"Perplexity","topic":"running gear","job_id":"job001","timestamp":"2026-02-03T10:00:00Z","query_id":"q1","query_text":"best trail shoes","response_id":"r1","citations":[{"url":"https://www.runnersworld.com/gear/a1"},{"url":"https://shop.rei.com/trail","domain":"shop.rei.com"}]}
{"platform":"Perplexity","topic":"running gear","job_id":"job001","timestamp":"2026-02-03T10:10:00Z","query_id":"q2","query_text":"carbon plate shoes","response_id":"r2","citations":[]}
{"platform":"Perplexity","topic":"running gear","job_id":"job002","timestamp":"2026-02-04T10:00:00Z","query_id":"q1","query_text":"best trail shoes","response_id":"r3","citations":[{"url":"https://news.bbc.co.uk/sport"}]}
{"platform":"Perplexity","topic":"running gear","job_id":"job002","query_id":"q2"}
"#;

fn main() -> citevis::Result<()> {
    for url in [
        "https://WWW.Example.COM/path?q=1",
        "https://a.b.bbc.co.uk/x",
        "http://localhost:8080/",
    ] {
        match extract_domain(url) {
            Ok(d) => println!("{url:<40} -> {d}"),
            Err(e) => println!("{url:<40} !! {e}"),
        }
    }

    let report = parse_dataset(CORPUS.as_bytes(), "inline")?;
    println!(
        "\naccepted {}, repaired {}, rejected {}",
        report.accepted,
        report.repaired,
        report.rejected.len()
    );
    for e in &report.rejected {
        println!("  line {}: {e}", e.line());
    }
    for s in report.dataset.samples() {
        let k = s.key();
        println!(
            "{} / {} / {}: {} responses",
            k.platform,
            k.topic,
            k.job_id,
            s.n_responses()
        );
        for r in s.responses() {
            let domains: Vec<&str> = r.citations.iter().map(|c| c.domain.as_str()).collect();
            println!("  {} {:?}", r.query_id, domains);
        }
    }
    Ok(())
}
