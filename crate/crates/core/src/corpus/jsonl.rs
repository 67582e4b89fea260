//! Line-delimited JSON ingestion and serialization of response records.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{extract_domain, CitationRef, Dataset, ResponseRecord, Sample, SampleKey};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawCitation {
    url: String,
    #[serde(default)]
    domain: Option<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    platform: String,
    topic: String,
    job_id: String,
    timestamp: DateTime<Utc>,
    query_id: String,
    query_text: String,
    response_id: String,
    citations: Vec<RawCitation>,
}

#[derive(Serialize)]
struct OutCitation<'a> {
    url: &'a str,
    domain: &'a str,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    platform: &'a str,
    topic: &'a str,
    job_id: &'a str,
    timestamp: String,
    query_id: &'a str,
    query_text: &'a str,
    response_id: &'a str,
    citations: Vec<OutCitation<'a>>,
}

/// Why a single input line was not accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineError {
    Schema {
        line: usize,
        reason: String,
    },
    DuplicateResponse {
        line: usize,
        key: SampleKey,
        response_id: String,
    },
}

impl LineError {
    pub fn line(&self) -> usize {
        match self {
            LineError::Schema { line, .. } | LineError::DuplicateResponse { line, .. } => *line,
        }
    }
}

impl std::fmt::Display for LineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineError::Schema { line, reason } => write!(f, "line {line}: {reason}"),
            LineError::DuplicateResponse {
                line,
                key,
                response_id,
            } => {
                write!(f, "line {line}: duplicate response {response_id} in {key}")
            }
        }
    }
}

/// Outcome of [`parse_dataset`]: the dataset plus per-line accounting.
#[derive(Debug, Clone)]
pub struct ParseReport {
    pub dataset: Dataset,
    pub accepted: usize,
    /// Accepted lines where at least one citation domain was filled in or corrected.
    pub repaired: usize,
    pub rejected: Vec<LineError>,
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn label(s: &str) -> String {
    nfc(s).to_lowercase()
}

fn normalize(raw: RawRecord, line: usize) -> Result<(ResponseRecord, bool), LineError> {
    let schema = |reason: String| LineError::Schema { line, reason };
    let platform = label(&raw.platform);
    let topic = label(&raw.topic);
    let job_id = nfc(&raw.job_id);
    for (name, v) in [
        ("platform", &platform),
        ("topic", &topic),
        ("job_id", &job_id),
    ] {
        if v.trim().is_empty() {
            return Err(schema(format!("{name} is empty")));
        }
    }
    if raw.response_id.is_empty() {
        return Err(schema("response_id is empty".into()));
    }

    let mut repaired = false;
    let mut citations = Vec::with_capacity(raw.citations.len());
    for (i, c) in raw.citations.into_iter().enumerate() {
        let resolved = extract_domain(&c.url).map_err(|e| schema(format!("citation {i}: {e}")))?;
        let given = c.domain.map(|d| d.trim().to_lowercase());
        if given.as_deref() != Some(resolved.as_str()) {
            repaired = true;
        }
        citations.push(CitationRef {
            url: c.url,
            domain: resolved,
        });
    }

    let record = ResponseRecord {
        platform,
        topic,
        job_id,
        timestamp: raw.timestamp,
        query_id: nfc(&raw.query_id),
        query_text: raw.query_text,
        response_id: nfc(&raw.response_id),
        citations,
    };
    Ok((record, repaired))
}

/// Parses a JSONL stream of response records into a [`Dataset`].
///
/// Bad lines are collected in the report rather than aborting the parse;
/// the call fails only when no line is accepted. Blank lines are skipped.
pub fn parse_dataset<R: BufRead>(input: R, source: &str) -> Result<ParseReport> {
    let mut samples: BTreeMap<SampleKey, Sample> = BTreeMap::new();
    let mut seen: BTreeSet<(SampleKey, String)> = BTreeSet::new();
    let mut accepted = 0;
    let mut repaired = 0;
    let mut rejected = Vec::new();

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                rejected.push(LineError::Schema {
                    line: line_no,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let (record, was_repaired) = match normalize(raw, line_no) {
            Ok(r) => r,
            Err(e) => {
                rejected.push(e);
                continue;
            }
        };
        let key = record.key();
        if !seen.insert((key.clone(), record.response_id.clone())) {
            rejected.push(LineError::DuplicateResponse {
                line: line_no,
                key,
                response_id: record.response_id,
            });
            continue;
        }
        accepted += 1;
        repaired += usize::from(was_repaired);
        samples
            .entry(key.clone())
            .or_insert_with(|| Sample {
                key,
                responses: Vec::new(),
            })
            .push(record);
    }

    if accepted == 0 {
        return Err(Error::NoValidLines {
            rejected: rejected.len(),
        });
    }
    let dataset = Dataset {
        samples,
        provenance: vec![source.to_string()],
        job_order: Vec::new(),
    };
    Ok(ParseReport {
        dataset,
        accepted,
        repaired,
        rejected,
    })
}

/// Writes every response of the dataset as one JSON object per line, samples
/// in key order and responses in collection order.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for sample in dataset.samples() {
        for r in sample.responses() {
            let rec = OutRecord {
                platform: &r.platform,
                topic: &r.topic,
                job_id: &r.job_id,
                timestamp: r
                    .timestamp
                    .to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
                query_id: &r.query_id,
                query_text: &r.query_text,
                response_id: &r.response_id,
                citations: r
                    .citations
                    .iter()
                    .map(|c| OutCitation {
                        url: &c.url,
                        domain: &c.domain,
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a job-order sidecar: one job id per line, earliest first.
pub fn read_job_order<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut order = Vec::new();
    for line in input.lines() {
        let line = line?;
        let job = line.trim();
        if !job.is_empty() {
            order.push(nfc(job));
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"platform":"Perplexity","topic":"Multivitamins","job_id":"j1","timestamp":"2026-02-03T10:00:00Z","query_id":"q1","query_text":"top rated multivitamins for adults by experts","response_id":"r1","citations":[{"url":"https://www.performancelab.com/blogs/multi/best-multivitamin","domain":"performancelab.com"},{"url":"https://www.bbcgoodfood.com/review/best-multivitamins","domain":"bbcgoodfood.com"}]}"#;

    #[test]
    fn single_valid_line() {
        let report = parse_dataset(LINE.as_bytes(), "inline").unwrap();
        assert_eq!(report.accepted, 1);
        assert_eq!(report.repaired, 0);
        assert!(report.rejected.is_empty());
        let ds = &report.dataset;
        assert_eq!(ds.n_samples(), 1);
        let s = ds.samples().next().unwrap();
        assert_eq!(s.n_responses(), 1);
        assert_eq!(s.responses()[0].citations.len(), 2);
        assert_eq!(s.key().platform, "perplexity");
        assert_eq!(s.key().topic, "multivitamins");
    }

    #[test]
    fn duplicate_response_rejected() {
        let input = format!("{LINE}\n{LINE}\n");
        let report = parse_dataset(input.as_bytes(), "inline").unwrap();
        assert_eq!(report.accepted, 1);
        assert_eq!(report.rejected.len(), 1);
        assert!(matches!(
            report.rejected[0],
            LineError::DuplicateResponse { line: 2, .. }
        ));
    }

    #[test]
    fn missing_domain_is_filled() {
        let line = r#"{"platform":"searchgpt","topic":"multivitamins","job_id":"j1","timestamp":"2026-02-03T10:00:00Z","query_id":"q1","query_text":"x","response_id":"r1","citations":[{"url":"https://health.yahoo.com/wellness/nutrition/vitamins-supplements/article/best-multivitamin-men-211005605.html?utm_source=openai"}]}"#;
        let report = parse_dataset(line.as_bytes(), "inline").unwrap();
        assert_eq!(report.repaired, 1);
        let s = report.dataset.samples().next().unwrap();
        assert_eq!(s.responses()[0].citations[0].domain, "yahoo.com");
    }

    #[test]
    fn bad_lines_are_collected() {
        let input = format!("{LINE}\nnot json\n{{\"platform\":\"p\"}}\n");
        let report = parse_dataset(input.as_bytes(), "inline").unwrap();
        assert_eq!(report.accepted, 1);
        let lines: Vec<usize> = report.rejected.iter().map(LineError::line).collect();
        assert_eq!(lines, [2, 3]);
    }

    #[test]
    fn zero_valid_lines_is_fatal() {
        assert!(matches!(
            parse_dataset("garbage\n".as_bytes(), "inline"),
            Err(Error::NoValidLines { rejected: 1 })
        ));
    }

    #[test]
    fn ip_citation_rejects_line() {
        let line = LINE.replace(
            "https://www.bbcgoodfood.com/review/best-multivitamins",
            "http://10.0.0.1/x",
        );
        assert!(parse_dataset(line.as_bytes(), "inline").is_err());
    }

    #[test]
    fn round_trip() {
        let input = format!("{LINE}\n{}\n", LINE.replace("\"r1\"", "\"r2\""));
        let first = parse_dataset(input.as_bytes(), "inline").unwrap().dataset;
        let mut buf = Vec::new();
        write_jsonl(&first, &mut buf).unwrap();
        let second = parse_dataset(buf.as_slice(), "inline").unwrap().dataset;
        assert_eq!(first, second);
    }

    #[test]
    fn job_order_sidecar() {
        let order = read_job_order("j2\n\n j1 \n".as_bytes()).unwrap();
        assert_eq!(order, ["j2", "j1"]);
    }
}
