//! Drift detection against a frozen baseline sample, and a SHA-256 content
//! ledger for classifying whether cited pages changed between jobs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::erf::erfc;

use crate::corpus::{PanelKey, Sample};
use crate::error::{Error, Result};
use crate::metrics::SampleMetrics;

pub const DEFAULT_DRIFT_ALPHA: f64 = 0.05;
pub const DEFAULT_PRACTICAL_DELTA: f64 = 0.02;

/// Outcome of the baseline-vs-current test for one domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftFlag {
    pub domain: String,
    pub baseline_job: String,
    pub current_job: String,
    pub chi_squared: f64,
    pub p_value: f64,
    pub share_baseline: f64,
    pub share_current: f64,
    /// share_current - share_baseline
    pub share_delta: f64,
    /// Some expected cell count is below 5.
    pub low_count: bool,
    pub flagged: bool,
}

/// Pearson chi-squared statistic (1 df, no continuity correction) and its
/// p-value for the 2x2 table `[[a, b], [c, d]]`.
///
/// A table with an empty row or column carries no evidence: statistic 0, p 1.
pub fn chi_squared_2x2(a: u64, b: u64, c: u64, d: u64) -> (f64, f64, bool) {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return (0.0, 1.0, true);
    }
    let observed = [[a, b], [c, d]];
    let mut stat = 0.0;
    let mut low = false;
    for (i, row) in observed.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            low |= e < 5.0;
            stat += (o - e) * (o - e) / e;
        }
    }
    // Chi-squared survival function with one degree of freedom.
    let p = erfc((stat / 2.0).sqrt());
    (stat, p.clamp(0.0, 1.0), low)
}

/// Tests every domain cited in either sample against the baseline.
///
/// A domain is flagged only when `p_value < alpha` and the absolute share
/// change exceeds `practical_threshold`.
pub fn drift_test(
    baseline: &SampleMetrics,
    current: &SampleMetrics,
    alpha: f64,
    practical_threshold: f64,
) -> Result<Vec<DriftFlag>> {
    if baseline.total_citations == 0 || current.total_citations == 0 {
        return Err(Error::EmptySampleCitations);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{alpha} not in (0, 1)"),
        });
    }
    let domains: BTreeSet<&String> = baseline
        .per_domain
        .keys()
        .chain(current.per_domain.keys())
        .collect();
    let flags = domains
        .into_iter()
        .map(|d| {
            let cb = baseline.count(d);
            let cc = current.count(d);
            let (stat, p, low) = chi_squared_2x2(
                cb,
                baseline.total_citations - cb,
                cc,
                current.total_citations - cc,
            );
            let sb = baseline.share(d);
            let sc = current.share(d);
            let delta = sc - sb;
            DriftFlag {
                domain: d.clone(),
                baseline_job: baseline.key.job_id.clone(),
                current_job: current.key.job_id.clone(),
                chi_squared: stat,
                p_value: p,
                share_baseline: sb,
                share_current: sc,
                share_delta: delta,
                low_count: low,
                flagged: p < alpha && delta.abs() > practical_threshold,
            }
        })
        .collect();
    Ok(flags)
}

/// Runs [`drift_test`] of every later sample against the first.
pub fn drift_against_baseline(
    samples: &[SampleMetrics],
    alpha: f64,
    practical_threshold: f64,
) -> Result<Vec<DriftFlag>> {
    let Some((baseline, rest)) = samples.split_first() else {
        return Err(Error::TooFewSamples { needed: 2, got: 0 });
    };
    let mut out = Vec::new();
    for current in rest {
        out.extend(drift_test(baseline, current, alpha, practical_threshold)?);
    }
    Ok(out)
}

/// SHA-256 of text after CRLF -> LF normalization, as lowercase hex.
pub fn hash_text(text: &str) -> String {
    let normalized = text.replace("\r\n", "\n");
    hex::encode(Sha256::digest(normalized.as_bytes()))
}

fn is_sha256_hex(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// One ledger input: either a precomputed hash or raw extracted text.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ChecksumInput {
    pub url: String,
    pub job_id: String,
    #[serde(default)]
    pub sha256: Option<String>,
    #[serde(default)]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChecksumRecord {
    pub url: String,
    pub job_id: String,
    pub sha256: String,
}

/// Content hashes keyed by (url, job_id).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChecksumLedger {
    entries: BTreeMap<(String, String), String>,
}

impl ChecksumLedger {
    pub fn get(&self, url: &str, job_id: &str) -> Option<&str> {
        self.entries
            .get(&(url.to_string(), job_id.to_string()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = ChecksumRecord> + '_ {
        self.entries.iter().map(|((url, job), h)| ChecksumRecord {
            url: url.clone(),
            job_id: job.clone(),
            sha256: h.clone(),
        })
    }

    /// Adds one record. Re-inserting an identical hash is a no-op.
    pub fn insert(&mut self, input: ChecksumInput) -> Result<()> {
        let hash = match (input.sha256, input.text) {
            (Some(h), _) => {
                let h = h.to_ascii_lowercase();
                if !is_sha256_hex(&h) {
                    return Err(Error::InvalidParameter {
                        name: "sha256",
                        reason: format!("{h:?} is not 64 hex characters"),
                    });
                }
                h
            }
            (None, Some(text)) => hash_text(&text),
            (None, None) => {
                return Err(Error::InvalidParameter {
                    name: "checksum",
                    reason: "record has neither sha256 nor text".into(),
                })
            }
        };
        let key = (input.url, input.job_id);
        match self.entries.get(&key) {
            Some(existing) if *existing != hash => Err(Error::ConflictingHash {
                url: key.0,
                job_id: key.1,
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, hash);
                Ok(())
            }
        }
    }
}

/// Builds a ledger from checksum records.
pub fn ingest_checksums<I: IntoIterator<Item = ChecksumInput>>(
    records: I,
) -> Result<ChecksumLedger> {
    let mut ledger = ChecksumLedger::default();
    for r in records {
        ledger.insert(r)?;
    }
    Ok(ledger)
}

/// Reads checksum JSONL (`{"url","job_id","sha256"}` or `{"url","job_id","text"}`).
pub fn read_checksums<R: BufRead>(input: R) -> Result<ChecksumLedger> {
    let mut ledger = ChecksumLedger::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ChecksumInput = serde_json::from_str(&line).map_err(|e| Error::Schema {
            line: i + 1,
            reason: e.to_string(),
        })?;
        ledger.insert(rec)?;
    }
    Ok(ledger)
}

pub fn write_checksums<W: Write>(ledger: &ChecksumLedger, mut out: W) -> Result<()> {
    for r in ledger.records() {
        serde_json::to_writer(&mut out, &r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Unchanged,
    Changed,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Unchanged => "unchanged",
            Status::Changed => "changed",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContentStatus {
    pub domain: String,
    pub job_id: String,
    pub status: Status,
}

fn domain_urls<'a>(sample: &'a Sample, domain: &str) -> BTreeSet<&'a str> {
    sample
        .responses()
        .iter()
        .flat_map(|r| r.citations.iter())
        .filter(|c| c.domain == domain)
        .map(|c| c.url.as_str())
        .collect()
}

/// Content status of `domain` at each job relative to the previous job.
///
/// `samples` must be in job order. The URLs compared for a transition are
/// those the domain is cited with in either job that have a ledger hash for
/// both jobs. Without any such URL the status is unknown.
pub fn content_status(
    ledger: &ChecksumLedger,
    samples: &[&Sample],
    domain: &str,
) -> Vec<ContentStatus> {
    samples
        .iter()
        .enumerate()
        .map(|(i, cur)| {
            let status = if i == 0 {
                Status::Unknown
            } else {
                let prev = samples[i - 1];
                let (pj, cj) = (&prev.key().job_id, &cur.key().job_id);
                let urls: BTreeSet<&str> = domain_urls(prev, domain)
                    .union(&domain_urls(cur, domain))
                    .copied()
                    .collect();
                let compared: Vec<bool> = urls
                    .into_iter()
                    .filter_map(|u| Some(ledger.get(u, pj)? == ledger.get(u, cj)?))
                    .collect();
                if compared.is_empty() {
                    Status::Unknown
                } else if compared.iter().all(|&same| same) {
                    Status::Unchanged
                } else {
                    Status::Changed
                }
            };
            ContentStatus {
                domain: domain.to_string(),
                job_id: cur.key().job_id.clone(),
                status,
            }
        })
        .collect()
}

/// CSV: platform,topic,domain,job_id,share,status
pub fn write_status_csv<W: Write>(rows: &[(PanelKey, ContentStatus, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["platform", "topic", "domain", "job_id", "share", "status"])?;
    for (p, s, share) in rows {
        w.write_record([
            p.platform.as_str(),
            &p.topic,
            &s.domain,
            &s.job_id,
            &share.to_string(),
            &s.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV: platform,topic,domain,baseline_job,current_job,chi_squared,p_value,share_baseline,share_current,share_delta,low_count,flagged
pub fn write_drift_csv<W: Write>(panels: &[(PanelKey, Vec<DriftFlag>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "domain",
        "baseline_job",
        "current_job",
        "chi_squared",
        "p_value",
        "share_baseline",
        "share_current",
        "share_delta",
        "low_count",
        "flagged",
    ])?;
    for (p, f) in panels
        .iter()
        .flat_map(|(p, flags)| flags.iter().map(move |f| (p, f)))
    {
        w.write_record([
            p.platform.as_str(),
            &p.topic,
            &f.domain,
            &f.baseline_job,
            &f.current_job,
            &f.chi_squared.to_string(),
            &f.p_value.to_string(),
            &f.share_baseline.to_string(),
            &f.share_current.to_string(),
            &f.share_delta.to_string(),
            &f.low_count.to_string(),
            &f.flagged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
