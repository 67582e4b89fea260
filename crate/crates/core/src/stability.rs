//! Distribution-wide rank stability between samples.
//!
//! Domains are ranked by descending share in each sample (average ranks for
//! ties) and the two rank vectors are correlated with a weighted Pearson
//! coefficient. Weights default to the mean of the domain's two shares, so
//! head domains dominate and the noisy low-share tail is damped.
//!
//! Confidence intervals resample the domain set with replacement. A domain
//! drawn `k` times enters the replicate once with weight `k * w`, and ranks
//! are recomputed among the distinct drawn domains.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::corpus::SampleKey;
use crate::error::{Error, Result};
use crate::metrics::SampleMetrics;
use crate::resample::{bootstrap_generic, derive_seed, BootstrapConfig, OnUndefined};

pub const DEFAULT_SUFFICIENCY: f64 = 0.25;
pub const DEFAULT_STABILITY: f64 = 0.9;

/// Average (fractional) ranks, rank 1 = largest value.
pub fn descending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the mean of ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Weighted Pearson correlation of two equally long vectors.
pub fn weighted_pearson(x: &[f64], y: &[f64], w: &[f64]) -> Result<f64> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += w[i] * (dx * dy);
        sxx += w[i] * (dx * dx);
        syy += w[i] * (dy * dy);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateRanks);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Weighted Spearman correlation on parallel share and weight vectors.
pub fn weighted_rank_correlation(
    shares_a: &[f64],
    shares_b: &[f64],
    weights: &[f64],
) -> Result<f64> {
    if shares_a.is_empty() || shares_a.len() != shares_b.len() || shares_a.len() != weights.len() {
        return Err(Error::InvalidParameter {
            name: "shares",
            reason: "share and weight vectors must be non-empty and of equal length".into(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: format!("weight {w} is not positive and finite"),
        });
    }
    weighted_pearson(
        &descending_ranks(shares_a),
        &descending_ranks(shares_b),
        weights,
    )
}

/// Weighted Spearman correlation between two share maps over `domains`.
///
/// A domain missing from a share map ranks with share 0. Every domain needs a
/// positive weight.
pub fn weighted_spearman(
    shares_a: &BTreeMap<String, f64>,
    shares_b: &BTreeMap<String, f64>,
    domains: &[String],
    weights: &BTreeMap<String, f64>,
) -> Result<f64> {
    let a: Vec<f64> = domains
        .iter()
        .map(|d| shares_a.get(d).copied().unwrap_or(0.0))
        .collect();
    let b: Vec<f64> = domains
        .iter()
        .map(|d| shares_b.get(d).copied().unwrap_or(0.0))
        .collect();
    let w = domains
        .iter()
        .map(|d| {
            weights
                .get(d)
                .copied()
                .ok_or_else(|| Error::InvalidParameter {
                    name: "weights",
                    reason: format!("no weight for {d}"),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    weighted_rank_correlation(&a, &b, &w)
}

/// Sufficiency (max CI width) and stability (min rho) cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityThresholds {
    pub sufficiency: f64,
    pub stability: f64,
}

impl Default for StabilityThresholds {
    fn default() -> Self {
        Self {
            sufficiency: DEFAULT_SUFFICIENCY,
            stability: DEFAULT_STABILITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankStabilityResult {
    pub sample_a: SampleKey,
    pub sample_b: SampleKey,
    pub rho: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub ci_width: f64,
    pub sufficient: bool,
    pub stable: bool,
    pub n_domains: usize,
    pub replicates: usize,
    /// Replicates dropped because every drawn domain was the same.
    pub excluded_replicates: usize,
    pub seed: u64,
    /// Set when the pair could not be evaluated; the numeric fields are then NaN.
    pub error: Option<String>,
}

impl RankStabilityResult {
    /// True when the point estimate lies outside its own percentile interval.
    pub fn point_outside_ci(&self) -> bool {
        self.rho < self.ci_lower || self.rho > self.ci_upper
    }

    fn failed(
        a: &SampleKey,
        b: &SampleKey,
        n_domains: usize,
        cfg: BootstrapConfig,
        err: &Error,
    ) -> Self {
        Self {
            sample_a: a.clone(),
            sample_b: b.clone(),
            rho: f64::NAN,
            ci_lower: f64::NAN,
            ci_upper: f64::NAN,
            ci_width: f64::NAN,
            sufficient: false,
            stable: false,
            n_domains,
            replicates: 0,
            excluded_replicates: 0,
            seed: cfg.seed,
            error: Some(err.to_string()),
        }
    }
}

/// Collapses a resample of domain indices to (distinct index, multiplicity).
fn multiplicities(drawn: &[&usize]) -> Vec<(usize, f64)> {
    let mut m: BTreeMap<usize, f64> = BTreeMap::new();
    for &&i in drawn {
        *m.entry(i).or_default() += 1.0;
    }
    m.into_iter().collect()
}

/// Weighted Spearman between two samples with a domain-bootstrap CI.
pub fn rank_stability_pair(
    a: &SampleMetrics,
    b: &SampleMetrics,
    domains: &BTreeSet<String>,
    cfg: BootstrapConfig,
    thresholds: StabilityThresholds,
) -> Result<RankStabilityResult> {
    if domains.len() < 3 {
        return Err(Error::TooFewDomains {
            needed: 3,
            got: domains.len(),
        });
    }
    let sa: Vec<f64> = domains.iter().map(|d| a.share(d)).collect();
    let sb: Vec<f64> = domains.iter().map(|d| b.share(d)).collect();
    let w: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| (x + y) / 2.0).collect();

    let items: Vec<usize> = (0..domains.len()).collect();
    let statistic = |drawn: &[&usize]| {
        let picked = multiplicities(drawn);
        let xa: Vec<f64> = picked.iter().map(|&(i, _)| sa[i]).collect();
        let xb: Vec<f64> = picked.iter().map(|&(i, _)| sb[i]).collect();
        let ww: Vec<f64> = picked.iter().map(|&(i, k)| k * w[i]).collect();
        weighted_rank_correlation(&xa, &xb, &ww)
    };
    let ci = bootstrap_generic(&items, statistic, cfg, OnUndefined::Exclude)?;

    let sufficient = ci.width <= thresholds.sufficiency;
    Ok(RankStabilityResult {
        sample_a: a.key.clone(),
        sample_b: b.key.clone(),
        rho: ci.point,
        ci_lower: ci.lower,
        ci_upper: ci.upper,
        ci_width: ci.width,
        sufficient,
        stable: sufficient && ci.point >= thresholds.stability,
        n_domains: domains.len(),
        replicates: ci.replicates,
        excluded_replicates: ci.excluded,
        seed: cfg.seed,
        error: None,
    })
}

/// Consecutive-pair and span (first vs last) rank stability for a job sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySeries {
    pub pairs: Vec<RankStabilityResult>,
    pub span: RankStabilityResult,
    pub n_sufficient: usize,
    pub n_stable: usize,
    /// Mean rho over sufficient pairs; `None` when no pair is sufficient.
    pub mean_rho: Option<f64>,
    pub mean_ci_width: Option<f64>,
    /// Verdict of a drift test over the full window, attached by the caller.
    pub span_drift: Option<bool>,
}

impl StabilitySeries {
    pub fn attach_span_drift(&mut self, detected: bool) {
        self.span_drift = Some(detected);
    }
}

fn pair_seed(base: u64, i: usize, j: usize) -> u64 {
    derive_seed(base, ((i as u64) << 32) | j as u64)
}

/// Runs [`rank_stability_pair`] over consecutive jobs plus the span pair.
///
/// `samples` must be in job order. A pair that fails is recorded with its
/// error and counts as insufficient.
pub fn rank_stability_series(
    samples: &[SampleMetrics],
    domains: &BTreeSet<String>,
    cfg: BootstrapConfig,
    thresholds: StabilityThresholds,
) -> Result<StabilitySeries> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let run = |i: usize, j: usize| {
        let cfg = BootstrapConfig {
            seed: pair_seed(cfg.seed, i, j),
            ..cfg
        };
        rank_stability_pair(&samples[i], &samples[j], domains, cfg, thresholds).unwrap_or_else(
            |e| {
                RankStabilityResult::failed(
                    &samples[i].key,
                    &samples[j].key,
                    domains.len(),
                    cfg,
                    &e,
                )
            },
        )
    };
    let pairs: Vec<RankStabilityResult> = (0..samples.len() - 1).map(|i| run(i, i + 1)).collect();
    let span = run(0, samples.len() - 1);

    let sufficient: Vec<&RankStabilityResult> = pairs.iter().filter(|p| p.sufficient).collect();
    let mean = |f: fn(&RankStabilityResult) -> f64| {
        (!sufficient.is_empty())
            .then(|| sufficient.iter().map(|p| f(p)).sum::<f64>() / sufficient.len() as f64)
    };
    Ok(StabilitySeries {
        n_sufficient: sufficient.len(),
        n_stable: pairs.iter().filter(|p| p.stable).count(),
        mean_rho: mean(|p| p.rho),
        mean_ci_width: mean(|p| p.ci_width),
        span_drift: None,
        pairs,
        span,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Per-pair rank-stability CSV: platform,topic,pair_index,job_a,job_b,kind,rho,ci_lower,ci_upper,ci_width,sufficient,stable,error
pub fn write_series_csv<W: Write>(series: &[StabilitySeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "pair_index",
        "job_a",
        "job_b",
        "kind",
        "rho",
        "ci_lower",
        "ci_upper",
        "ci_width",
        "sufficient",
        "stable",
        "error",
    ])?;
    for s in series {
        let rows = s
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (i.to_string(), "consecutive", p))
            .chain(std::iter::once((String::new(), "span", &s.span)));
        for (idx, kind, p) in rows {
            w.write_record([
                p.sample_a.platform.as_str(),
                &p.sample_a.topic,
                &idx,
                &p.sample_a.job_id,
                &p.sample_b.job_id,
                kind,
                &num(p.rho),
                &num(p.ci_lower),
                &num(p.ci_upper),
                &num(p.ci_width),
                &p.sufficient.to_string(),
                &p.stable.to_string(),
                p.error.as_deref().unwrap_or(""),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rank-stability summary CSV, one row per series.
pub fn write_summary_csv<W: Write>(series: &[StabilitySeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "pairs",
        "sufficient",
        "stable",
        "mean_rank_rho",
        "mean_ci_width",
        "span_rank_rho",
        "span_drift_detected",
    ])?;
    for s in series {
        w.write_record([
            s.span.sample_a.platform.as_str(),
            &s.span.sample_a.topic,
            &s.pairs.len().to_string(),
            &s.n_sufficient.to_string(),
            &s.n_stable.to_string(),
            &opt(s.mean_rho),
            &opt(s.mean_ci_width),
            &num(s.span.rho),
            &s.span_drift.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
