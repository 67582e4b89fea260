//! Visibility estimators: citation count, citation share and citation
//! prevalence per domain, plus per-response citation summaries and the
//! frequently-cited classification.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::corpus::{PanelKey, Sample, SampleKey};
use crate::error::{Error, Result};
use crate::stats;

/// Count, share and prevalence of one domain within one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainMetrics {
    pub domain: String,
    /// Citations to the domain, c(d, S).
    pub count: u64,
    /// count / total citations, s(d, S).
    pub share: f64,
    /// responses_citing / N, p(d, S).
    pub prevalence: f64,
    pub responses_citing: u64,
}

/// All domain metrics of one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub key: SampleKey,
    pub n_responses: usize,
    pub total_citations: u64,
    pub per_domain: BTreeMap<String, DomainMetrics>,
}

impl SampleMetrics {
    /// Share of `domain`, 0 when the domain is not cited.
    pub fn share(&self, domain: &str) -> f64 {
        self.per_domain.get(domain).map_or(0.0, |m| m.share)
    }

    pub fn prevalence(&self, domain: &str) -> f64 {
        self.per_domain.get(domain).map_or(0.0, |m| m.prevalence)
    }

    pub fn count(&self, domain: &str) -> u64 {
        self.per_domain.get(domain).map_or(0, |m| m.count)
    }

    pub fn shares(&self) -> BTreeMap<String, f64> {
        self.per_domain
            .iter()
            .map(|(d, m)| (d.clone(), m.share))
            .collect()
    }
}

/// Computes citation count, share and prevalence for every cited domain.
///
/// Responses without citations count toward N but not toward the citation
/// total. When the sample has no citations at all the domain map is empty.
pub fn compute_sample_metrics(sample: &Sample) -> Result<SampleMetrics> {
    let n = sample.n_responses();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut counts: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let mut total = 0u64;
    for r in sample.responses() {
        let mut cited_here = BTreeSet::new();
        for c in &r.citations {
            total += 1;
            let entry = counts.entry(c.domain.as_str()).or_default();
            entry.0 += 1;
            if cited_here.insert(c.domain.as_str()) {
                entry.1 += 1;
            }
        }
    }
    let per_domain = counts
        .into_iter()
        .map(|(d, (count, citing))| {
            let m = DomainMetrics {
                domain: d.to_string(),
                count,
                share: count as f64 / total as f64,
                prevalence: citing as f64 / n as f64,
                responses_citing: citing,
            };
            (d.to_string(), m)
        })
        .collect();
    Ok(SampleMetrics {
        key: sample.key().clone(),
        n_responses: n,
        total_citations: total,
        per_domain,
    })
}

/// Distribution of citations per response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationSummary {
    pub n_responses: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p75: f64,
    pub p95: f64,
    pub max: f64,
}

pub fn citation_summary(sample: &Sample) -> Result<CitationSummary> {
    let counts: Vec<usize> = sample
        .responses()
        .iter()
        .map(|r| r.citations.len())
        .collect();
    citation_summary_of_counts(&counts)
}

/// Summary over responses pooled from several samples.
pub fn pooled_citation_summary(samples: &[&Sample]) -> Result<CitationSummary> {
    let counts: Vec<usize> = samples
        .iter()
        .flat_map(|s| s.responses().iter().map(|r| r.citations.len()))
        .collect();
    citation_summary_of_counts(&counts)
}

pub fn citation_summary_of_counts(counts: &[usize]) -> Result<CitationSummary> {
    if counts.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    xs.sort_by(f64::total_cmp);
    Ok(CitationSummary {
        n_responses: xs.len(),
        mean: stats::mean(&xs),
        median: stats::percentile_sorted(&xs, 0.5),
        std: stats::sample_std(&xs),
        min: xs[0],
        p25: stats::percentile_sorted(&xs, 0.25),
        p75: stats::percentile_sorted(&xs, 0.75),
        p95: stats::percentile_sorted(&xs, 0.95),
        max: xs[xs.len() - 1],
    })
}

/// Domains cited in (at least a fraction of) every sample of a panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequentlyCitedSet {
    pub platform: String,
    pub topic: String,
    pub n_samples: usize,
    pub domains: BTreeSet<String>,
    /// k -> number of domains appearing in exactly k samples, for k = 1..=n_samples.
    pub appearance_histogram: BTreeMap<usize, usize>,
    /// Number of samples each domain appears in.
    pub appearances: BTreeMap<String, usize>,
}

impl FrequentlyCitedSet {
    pub fn panel(&self) -> PanelKey {
        PanelKey {
            platform: self.platform.clone(),
            topic: self.topic.clone(),
        }
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(domain)
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }
}

/// Classifies domains by the number of samples they are cited in.
///
/// A domain is frequently cited when it appears in at least
/// `ceil(min_fraction * n_samples)` samples; `min_fraction = 1.0` is the
/// every-sample rule.
pub fn classify_frequently_cited(
    samples: &[&Sample],
    min_fraction: f64,
) -> Result<FrequentlyCitedSet> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(min_fraction > 0.0 && min_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "min_fraction",
            reason: format!("{min_fraction} not in (0, 1]"),
        });
    }
    let panel = samples[0].key().panel();
    if samples.iter().any(|s| s.key().panel() != panel) {
        return Err(Error::MixedKeys);
    }

    let mut appearances: BTreeMap<String, usize> = BTreeMap::new();
    for s in samples {
        let cited: BTreeSet<&str> = s
            .responses()
            .iter()
            .flat_map(|r| r.citations.iter().map(|c| c.domain.as_str()))
            .collect();
        for d in cited {
            *appearances.entry(d.to_string()).or_default() += 1;
        }
    }
    let n = samples.len();
    let needed = ((min_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut appearance_histogram: BTreeMap<usize, usize> = (1..=n).map(|k| (k, 0)).collect();
    for &k in appearances.values() {
        *appearance_histogram.entry(k).or_default() += 1;
    }
    let domains = appearances
        .iter()
        .filter(|(_, &k)| k >= needed)
        .map(|(d, _)| d.clone())
        .collect();
    Ok(FrequentlyCitedSet {
        platform: panel.platform,
        topic: panel.topic,
        n_samples: n,
        domains,
        appearance_histogram,
        appearances,
    })
}

/// CSV: platform,topic,job_id,domain,count,share,prevalence
pub fn write_metrics_csv<W: Write>(metrics: &[SampleMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "job_id",
        "domain",
        "count",
        "share",
        "prevalence",
    ])?;
    for m in metrics {
        for d in m.per_domain.values() {
            w.write_record([
                m.key.platform.as_str(),
                &m.key.topic,
                &m.key.job_id,
                &d.domain,
                &d.count.to_string(),
                &d.share.to_string(),
                &d.prevalence.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV: platform,topic,n_samples,k,domains,all_samples
pub fn write_appearance_csv<W: Write>(sets: &[FrequentlyCitedSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "n_samples",
        "k",
        "domains",
        "all_samples",
    ])?;
    for s in sets {
        for (k, count) in &s.appearance_histogram {
            w.write_record([
                s.platform.as_str(),
                &s.topic,
                &s.n_samples.to_string(),
                &k.to_string(),
                &count.to_string(),
                &(*k == s.n_samples).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Citation-summary CSV, one row per sample.
pub fn write_summary_csv<W: Write>(rows: &[(SampleKey, CitationSummary)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "job_id",
        "responses",
        "mean",
        "median",
        "std",
        "min",
        "p25",
        "p75",
        "p95",
        "max",
    ])?;
    for (k, s) in rows {
        w.write_record([
            k.platform.as_str(),
            &k.topic,
            &k.job_id,
            &s.n_responses.to_string(),
            &s.mean.to_string(),
            &s.median.to_string(),
            &s.std.to_string(),
            &s.min.to_string(),
            &s.p25.to_string(),
            &s.p75.to_string(),
            &s.p95.to_string(),
            &s.max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
