//! Log-space dispersion of citation share across samples and ranked share
//! tables for power-law inspection.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::corpus::SampleKey;
use crate::error::{Error, Result};
use crate::metrics::{FrequentlyCitedSet, SampleMetrics};
use crate::stats;

/// Spread of one domain's share across samples, in natural-log units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionRecord {
    pub domain: String,
    pub n_samples: usize,
    pub geometric_mean_share: f64,
    pub log_std: f64,
    /// exp(log_std): the typical multiplicative deviation from the geometric mean.
    pub fold_factor: f64,
}

/// Standard deviation (n-1) of ln(share) across samples.
pub fn log_std(domain: &str, shares: &[f64]) -> Result<DispersionRecord> {
    if shares.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: shares.len(),
        });
    }
    if shares.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::ZeroShare {
            domain: domain.to_string(),
        });
    }
    let logs: Vec<f64> = shares.iter().map(|s| s.ln()).collect();
    let sd = if logs.iter().all(|&l| l == logs[0]) {
        0.0
    } else {
        stats::sample_std(&logs)
    };
    Ok(DispersionRecord {
        domain: domain.to_string(),
        n_samples: shares.len(),
        geometric_mean_share: stats::mean(&logs).exp(),
        log_std: sd,
        fold_factor: sd.exp(),
    })
}

/// Dispersion records for every frequently-cited domain over a panel's samples.
///
/// Fails with [`Error::ZeroShare`] if a domain of the set is missing from a sample.
pub fn panel_dispersion(
    samples: &[SampleMetrics],
    domains: &FrequentlyCitedSet,
) -> Result<Vec<DispersionRecord>> {
    domains
        .domains
        .iter()
        .map(|d| {
            let shares: Vec<f64> = samples.iter().map(|m| m.share(d)).collect();
            log_std(d, &shares)
        })
        .collect()
}

/// Records belonging to one platform (and optionally one topic).
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionGroup {
    pub platform: String,
    pub topic: Option<String>,
    pub records: Vec<DispersionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionSummary {
    pub platform: String,
    pub topic: Option<String>,
    pub mean_log_std: f64,
    pub median_log_std: f64,
    pub n_domains: usize,
}

/// Mean and median log-std per group. Empty groups are skipped.
pub fn dispersion_summary(groups: &[DispersionGroup]) -> Vec<DispersionSummary> {
    groups
        .iter()
        .filter(|g| !g.records.is_empty())
        .map(|g| {
            let xs: Vec<f64> = g.records.iter().map(|r| r.log_std).collect();
            DispersionSummary {
                platform: g.platform.clone(),
                topic: g.topic.clone(),
                mean_log_std: stats::mean(&xs),
                median_log_std: stats::median(&xs),
                n_domains: xs.len(),
            }
        })
        .collect()
}

/// Merges per-topic groups into one group per platform.
pub fn by_platform(groups: &[DispersionGroup]) -> Vec<DispersionGroup> {
    let mut merged: BTreeMap<&str, Vec<DispersionRecord>> = BTreeMap::new();
    for g in groups {
        merged
            .entry(&g.platform)
            .or_default()
            .extend(g.records.iter().cloned());
    }
    merged
        .into_iter()
        .map(|(p, records)| DispersionGroup {
            platform: p.to_string(),
            topic: None,
            records,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub domain: String,
    pub share: f64,
}

/// Domains of one sample ranked by descending share.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankShareTable {
    pub key: SampleKey,
    pub rows: Vec<RankRow>,
}

/// Ranks every cited domain by share; ties break lexicographically by domain.
pub fn rank_share_table(metrics: &SampleMetrics) -> Result<RankShareTable> {
    if metrics.total_citations == 0 || metrics.per_domain.is_empty() {
        return Err(Error::EmptySampleCitations);
    }
    let mut entries: Vec<(&str, f64)> = metrics
        .per_domain
        .values()
        .filter(|m| m.count > 0)
        .map(|m| (m.domain.as_str(), m.share))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let rows = entries
        .into_iter()
        .enumerate()
        .map(|(i, (d, s))| RankRow {
            rank: i + 1,
            domain: d.to_string(),
            share: s,
        })
        .collect();
    Ok(RankShareTable {
        key: metrics.key.clone(),
        rows,
    })
}

/// Ordinary least squares of ln(share) on ln(rank).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits ln(share) = intercept + slope * ln(rank) over ranks in `rank_range` (inclusive).
pub fn loglog_fit(
    table: &RankShareTable,
    rank_range: std::ops::RangeInclusive<usize>,
) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| rank_range.contains(&r.rank) && r.share > 0.0)
        .map(|r| ((r.rank as f64).ln(), r.share.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientRows {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Per-domain dispersion CSV: platform,topic,domain,n_samples,geometric_mean_share,log_std,fold_factor
pub fn write_records_csv<W: Write>(groups: &[DispersionGroup], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "domain",
        "n_samples",
        "geometric_mean_share",
        "log_std",
        "fold_factor",
    ])?;
    for g in groups {
        for r in &g.records {
            w.write_record([
                g.platform.as_str(),
                g.topic.as_deref().unwrap_or(""),
                &r.domain,
                &r.n_samples.to_string(),
                &r.geometric_mean_share.to_string(),
                &r.log_std.to_string(),
                &r.fold_factor.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV, one row per group: platform,topic,mean_log_std,median_log_std,n_domains
pub fn write_summary_csv<W: Write>(summaries: &[DispersionSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "mean_log_std",
        "median_log_std",
        "n_domains",
    ])?;
    for s in summaries {
        w.write_record([
            s.platform.as_str(),
            s.topic.as_deref().unwrap_or(""),
            &s.mean_log_std.to_string(),
            &s.median_log_std.to_string(),
            &s.n_domains.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV (Figs. 7-8): platform,topic,job_id,baseline,rank,domain,share,frequently_cited
///
/// The first table of each panel is flagged as the baseline; the
/// frequently-cited flag uses the set of the table's panel, when given.
pub fn write_rank_tables_csv<W: Write>(
    tables: &[RankShareTable],
    fc: &[FrequentlyCitedSet],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "job_id",
        "baseline",
        "rank",
        "domain",
        "share",
        "frequently_cited",
    ])?;
    let mut seen = BTreeSet::new();
    for t in tables {
        let panel = t.key.panel();
        let baseline = seen.insert(panel.clone());
        let set = fc.iter().find(|f| f.panel() == panel);
        for r in &t.rows {
            w.write_record([
                t.key.platform.as_str(),
                &t.key.topic,
                &t.key.job_id,
                &baseline.to_string(),
                &r.rank.to_string(),
                &r.domain,
                &r.share.to_string(),
                &set.is_some_and(|f| f.contains(&r.domain)).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
