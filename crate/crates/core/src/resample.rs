//! Seeded percentile bootstrap.
//!
//! Replicate `k` draws from a ChaCha stream keyed by `(seed, k)`, so a
//! replicate's resample does not depend on which thread computes it or in
//! what order. Intervals are read off the sorted replicate vector at ranks
//! `ceil(B * alpha / 2)` and `ceil(B * (1 - alpha / 2))` (1-indexed).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Sample, SampleKey};
use crate::error::{Error, Result};
use crate::metrics::compute_sample_metrics;

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 0x5EED_C17E_0000_0001;
/// Target max CI width for citation share.
pub const TARGET_WIDTH_SHARE: f64 = 0.05;
/// Target max CI width for citation prevalence.
pub const TARGET_WIDTH_PREVALENCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Share,
    Prevalence,
}

impl Metric {
    pub fn default_target_width(self) -> f64 {
        match self {
            Metric::Share => TARGET_WIDTH_SHARE,
            Metric::Prevalence => TARGET_WIDTH_PREVALENCE,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Share => "share",
            Metric::Prevalence => "prevalence",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "share" => Ok(Metric::Share),
            "prevalence" => Ok(Metric::Prevalence),
            other => Err(Error::InvalidParameter {
                name: "metric",
                reason: format!("{other:?} is not share or prevalence"),
            }),
        }
    }
}

/// Replicate count, confidence complement and base seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, alpha: f64, seed: u64) -> Self {
        Self {
            replicates,
            alpha,
            seed,
        }
    }

    fn validate(&self, min_replicates: usize) -> Result<()> {
        if self.replicates < min_replicates {
            return Err(Error::InvalidParameter {
                name: "replicates",
                reason: format!("{} < {min_replicates}", self.replicates),
            });
        }
        validate_alpha(self.alpha)
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{alpha} not in (0, 1)"),
        })
    }
}

/// A percentile-bootstrap interval for one domain's share or prevalence.
///
/// `point` comes from the full sample and can sit outside `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCI {
    pub metric: Metric,
    pub domain: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// SplitMix64 finalizer; used to derive independent seeds from a base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream for replicate `k`.
pub fn replicate_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Indices of a with-replacement resample of size `n` for replicate `k`.
pub fn resample_indices(seed: u64, k: usize, n: usize) -> Vec<usize> {
    let mut rng = replicate_rng(seed, k);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// 1-indexed ranks of the lower and upper percentile bounds among `b` sorted values.
pub fn percentile_ranks(b: usize, alpha: f64) -> (usize, usize) {
    let rank = |q: f64| (((b as f64) * q - 1e-9).ceil() as usize).clamp(1, b);
    (rank(alpha / 2.0), rank(1.0 - alpha / 2.0))
}

/// Lower and upper percentile bounds of an ascending replicate vector.
pub fn percentile_bounds(sorted: &[f64], alpha: f64) -> (f64, f64) {
    let (lo, hi) = percentile_ranks(sorted.len(), alpha);
    (sorted[lo - 1], sorted[hi - 1])
}

/// Sparse per-response counts over an indexed domain list.
struct CompactSample {
    responses: Vec<CompactResponse>,
}

struct CompactResponse {
    total: u64,
    hits: Vec<(usize, u64)>,
}

impl CompactSample {
    fn new(sample: &Sample, index: &HashMap<&str, usize>) -> Self {
        let responses = sample
            .responses()
            .iter()
            .map(|r| {
                let mut hits: BTreeMap<usize, u64> = BTreeMap::new();
                for c in &r.citations {
                    if let Some(&i) = index.get(c.domain.as_str()) {
                        *hits.entry(i).or_default() += 1;
                    }
                }
                CompactResponse {
                    total: r.citations.len() as u64,
                    hits: hits.into_iter().collect(),
                }
            })
            .collect();
        Self { responses }
    }

    /// Metric values for every indexed domain over the given response indices.
    fn evaluate(
        &self,
        picks: impl Iterator<Item = usize>,
        metric: Metric,
        n_domains: usize,
    ) -> Vec<f64> {
        let mut acc = vec![0u64; n_domains];
        let mut total = 0u64;
        let mut n = 0u64;
        for i in picks {
            let r = &self.responses[i];
            n += 1;
            total += r.total;
            for &(d, c) in &r.hits {
                acc[d] += match metric {
                    Metric::Share => c,
                    Metric::Prevalence => 1,
                };
            }
        }
        let denom = match metric {
            Metric::Share => total,
            Metric::Prevalence => n,
        };
        if denom == 0 {
            // Degenerate replicate: no citations drawn. Every share is 0.
            return vec![0.0; n_domains];
        }
        acc.into_iter().map(|a| a as f64 / denom as f64).collect()
    }
}

/// Raw replicate values for a set of domains, all from one resampling pass.
#[derive(Debug, Clone)]
pub struct DomainReplicates {
    pub metric: Metric,
    pub domains: Vec<String>,
    pub points: Vec<f64>,
    /// `values[d]` holds the B replicate values of domain `d`, ascending.
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
}

impl DomainReplicates {
    pub fn replicates(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Percentile intervals at the given alpha from the stored replicates.
    pub fn intervals(&self, alpha: f64) -> BTreeMap<String, BootstrapCI> {
        self.domains
            .iter()
            .enumerate()
            .map(|(d, name)| {
                let (lower, upper) = percentile_bounds(&self.values[d], alpha);
                let ci = BootstrapCI {
                    metric: self.metric,
                    domain: name.clone(),
                    point: self.points[d],
                    lower,
                    upper,
                    width: upper - lower,
                    replicates: self.values[d].len(),
                    alpha,
                    seed: self.seed,
                };
                (name.clone(), ci)
            })
            .collect()
    }
}

/// Bootstraps `metric` for every domain in `domains` from one replicate stream.
pub fn bootstrap_replicates(
    sample: &Sample,
    metric: Metric,
    domains: &BTreeSet<String>,
    replicates: usize,
    seed: u64,
) -> Result<DomainReplicates> {
    let n = sample.n_responses();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "sample",
            reason: format!("bootstrap needs at least 2 responses, got {n}"),
        });
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter {
            name: "replicates",
            reason: "must be positive".into(),
        });
    }
    let full = compute_sample_metrics(sample)?;
    if metric == Metric::Share && full.total_citations == 0 {
        return Err(Error::EmptySampleCitations);
    }

    let names: Vec<String> = domains.iter().cloned().collect();
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let compact = CompactSample::new(sample, &index);
    let points: Vec<f64> = names
        .iter()
        .map(|d| match metric {
            Metric::Share => full.share(d),
            Metric::Prevalence => full.prevalence(d),
        })
        .collect();

    let per_replicate: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(seed, k);
            compact.evaluate((0..n).map(|_| rng.random_range(0..n)), metric, names.len())
        })
        .collect();

    let mut values = vec![Vec::with_capacity(replicates); names.len()];
    for rep in &per_replicate {
        for (d, v) in rep.iter().enumerate() {
            values[d].push(*v);
        }
    }
    for v in &mut values {
        v.sort_by(f64::total_cmp);
    }
    Ok(DomainReplicates {
        metric,
        domains: names,
        points,
        values,
        seed,
    })
}

/// Percentile-bootstrap CI for one domain's share or prevalence.
///
/// Each replicate resamples N responses with replacement and recomputes the
/// metric; for share both numerator and denominator are recomputed.
pub fn bootstrap_metric_ci(
    sample: &Sample,
    metric: Metric,
    domain: &str,
    cfg: BootstrapConfig,
) -> Result<BootstrapCI> {
    let mut all =
        bootstrap_all_domains(sample, metric, &BTreeSet::from([domain.to_string()]), cfg)?;
    Ok(all.remove(domain).expect("requested domain present"))
}

/// CIs for several domains sharing one replicate stream.
///
/// Domains absent from the sample get a zero point and a (0, 0) interval.
pub fn bootstrap_all_domains(
    sample: &Sample,
    metric: Metric,
    domains: &BTreeSet<String>,
    cfg: BootstrapConfig,
) -> Result<BTreeMap<String, BootstrapCI>> {
    cfg.validate(100)?;
    let reps = bootstrap_replicates(sample, metric, domains, cfg.replicates, cfg.seed)?;
    Ok(reps.intervals(cfg.alpha))
}

/// CI width of a normal-approximation 95% interval for a proportion:
/// `3.92 * sqrt(p (1 - p) / n)`.
pub fn reference_width(p_anchor: f64, n: usize) -> f64 {
    assert!(n >= 1, "reference width needs n >= 1");
    3.92 * (p_anchor * (1.0 - p_anchor)).sqrt() / (n as f64).sqrt()
}

/// How grid subsamples are drawn from the full sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubsampleOrder {
    /// The first n responses in collection order.
    Prefix,
    /// `draws` random subsets of size n (without replacement), widths averaged.
    Random { draws: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub max_ci_width: f64,
    pub reference_width: f64,
    pub crossed_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCurve {
    pub metric: Metric,
    pub points: Vec<ConvergencePoint>,
    pub target_width: f64,
    pub p_anchor: f64,
    /// First grid n whose max width is at or below target.
    pub crossing_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceOptions {
    /// Subsample sizes; defaults to 10, 20, ..., N.
    pub grid: Option<Vec<usize>>,
    pub order: SubsampleOrder,
    pub target_width: Option<f64>,
    /// Proportion anchoring the reference curve; defaults to the largest
    /// full-sample point estimate among the domains.
    pub p_anchor: Option<f64>,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            grid: None,
            order: SubsampleOrder::Prefix,
            target_width: None,
            p_anchor: None,
        }
    }
}

pub fn default_grid(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (1..=n / 10).map(|i| i * 10).collect();
    if grid.last() != Some(&n) {
        grid.push(n);
    }
    grid.retain(|&g| g >= 2);
    grid
}

fn max_width(
    sample: &Sample,
    metric: Metric,
    domains: &BTreeSet<String>,
    cfg: BootstrapConfig,
) -> Result<f64> {
    let cis = bootstrap_all_domains(sample, metric, domains, cfg)?;
    Ok(cis.values().map(|c| c.width).fold(0.0, f64::max))
}

/// Max CI width across `domains` as a function of the number of responses.
///
/// Every grid point is computed; the target crossing is only reported.
pub fn convergence_curve(
    sample: &Sample,
    metric: Metric,
    domains: &BTreeSet<String>,
    cfg: BootstrapConfig,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceCurve> {
    if domains.is_empty() {
        return Err(Error::TooFewDomains { needed: 1, got: 0 });
    }
    let total = sample.n_responses();
    let mut grid = opts.grid.clone().unwrap_or_else(|| default_grid(total));
    grid.sort_unstable();
    grid.dedup();
    if let Some(&n) = grid.iter().find(|&&n| n > total) {
        return Err(Error::GridExceedsSample {
            n,
            available: total,
        });
    }
    if grid.first().is_some_and(|&n| n < 2) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "grid values must be at least 2".into(),
        });
    }
    let target_width = opts.target_width.unwrap_or(metric.default_target_width());

    let p_anchor = match opts.p_anchor {
        Some(p) => p,
        None => {
            let full = compute_sample_metrics(sample)?;
            domains
                .iter()
                .map(|d| match metric {
                    Metric::Share => full.share(d),
                    Metric::Prevalence => full.prevalence(d),
                })
                .fold(0.0, f64::max)
        }
    };

    let mut points = Vec::with_capacity(grid.len());
    for &n in &grid {
        let width = match opts.order {
            SubsampleOrder::Prefix => max_width(&sample.prefix(n), metric, domains, cfg)?,
            SubsampleOrder::Random { draws } => {
                let draws = draws.max(1);
                let mut sum = 0.0;
                for j in 0..draws {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        cfg.seed,
                        ((n as u64) << 16) | j as u64,
                    ));
                    let mut idx = rand::seq::index::sample(&mut rng, total, n).into_vec();
                    idx.sort_unstable();
                    sum += max_width(&sample.select(&idx), metric, domains, cfg)?;
                }
                sum / draws as f64
            }
        };
        points.push(ConvergencePoint {
            n,
            max_ci_width: width,
            reference_width: reference_width(p_anchor, n),
            crossed_target: width <= target_width,
        });
    }
    let crossing_n = points.iter().find(|p| p.crossed_target).map(|p| p.n);
    Ok(ConvergenceCurve {
        metric,
        points,
        target_width,
        p_anchor,
        crossing_n,
    })
}

/// What to do when the statistic is undefined on a replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnUndefined {
    /// Abort with [`Error::StatisticUndefined`] naming the replicate.
    Fail,
    /// Drop the replicate and count it in `excluded`.
    Exclude,
}

/// Result of [`bootstrap_generic`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    /// Replicates that produced a value.
    pub replicates: usize,
    pub excluded: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Percentile bootstrap of an arbitrary statistic over with-replacement
/// resamples of `items`.
pub fn bootstrap_generic<T, F>(
    items: &[T],
    statistic: F,
    cfg: BootstrapConfig,
    on_undefined: OnUndefined,
) -> Result<GenericCI>
where
    T: Sync,
    F: Fn(&[&T]) -> Result<f64> + Sync,
{
    if items.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "items",
            reason: format!("bootstrap needs at least 2 items, got {}", items.len()),
        });
    }
    cfg.validate(1)?;
    let all: Vec<&T> = items.iter().collect();
    let point = statistic(&all)?;

    let n = items.len();
    let outcomes: Vec<Result<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(cfg.seed, k);
            let drawn: Vec<&T> = (0..n).map(|_| &items[rng.random_range(0..n)]).collect();
            statistic(&drawn)
        })
        .collect();

    let mut values = Vec::with_capacity(outcomes.len());
    let mut excluded = 0;
    for (k, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => values.push(v),
            Err(e) => match on_undefined {
                OnUndefined::Fail => {
                    return Err(Error::StatisticUndefined {
                        replicate: k,
                        reason: e.to_string(),
                    })
                }
                OnUndefined::Exclude => excluded += 1,
            },
        }
    }
    if values.is_empty() {
        return Err(Error::StatisticUndefined {
            replicate: cfg.replicates.saturating_sub(1),
            reason: "every replicate was undefined".into(),
        });
    }
    values.sort_by(f64::total_cmp);
    let (lower, upper) = percentile_bounds(&values, cfg.alpha);
    Ok(GenericCI {
        point,
        lower,
        upper,
        width: upper - lower,
        replicates: values.len(),
        excluded,
        alpha: cfg.alpha,
        seed: cfg.seed,
    })
}

/// One CI export row: a baseline-sample CI plus an optional cross-sample mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiRow {
    pub key: SampleKey,
    pub ci: BootstrapCI,
    pub cross_sample_mean: Option<f64>,
}

/// CSV: domain,point,lower,upper,width,metric,platform,topic,job_id,cross_sample_mean,replicates,alpha,seed
pub fn write_ci_csv<W: Write>(rows: &[CiRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "domain",
        "point",
        "lower",
        "upper",
        "width",
        "metric",
        "platform",
        "topic",
        "job_id",
        "cross_sample_mean",
        "replicates",
        "alpha",
        "seed",
    ])?;
    for r in rows {
        let c = &r.ci;
        w.write_record([
            c.domain.as_str(),
            &c.point.to_string(),
            &c.lower.to_string(),
            &c.upper.to_string(),
            &c.width.to_string(),
            &c.metric.to_string(),
            &r.key.platform,
            &r.key.topic,
            &r.key.job_id,
            &r.cross_sample_mean
                .map(|m| m.to_string())
                .unwrap_or_default(),
            &c.replicates.to_string(),
            &c.alpha.to_string(),
            &c.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV: platform,topic,job_id,metric,n,max_width,reference_width,target,crossed_target
pub fn write_convergence_csv<W: Write>(
    curves: &[(SampleKey, ConvergenceCurve)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "job_id",
        "metric",
        "n",
        "max_width",
        "reference_width",
        "target",
        "crossed_target",
    ])?;
    for (k, c) in curves {
        for p in &c.points {
            w.write_record([
                k.platform.clone(),
                k.topic.clone(),
                k.job_id.clone(),
                c.metric.to_string(),
                p.n.to_string(),
                p.max_ci_width.to_string(),
                p.reference_width.to_string(),
                c.target_width.to_string(),
                p.crossed_target.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testutil::sample;

    fn cfg(b: usize) -> BootstrapConfig {
        BootstrapConfig::new(b, 0.05, 7)
    }

    #[test]
    fn zero_variance_sample() {
        let s = sample("j", &[&["a.com"], &["a.com", "a.com"], &["a.com"]]);
        let ci = bootstrap_metric_ci(&s, Metric::Share, "a.com", cfg(1000)).unwrap();
        assert_eq!(
            (ci.point, ci.lower, ci.upper, ci.width),
            (1.0, 1.0, 1.0, 0.0)
        );
    }

    #[test]
    fn absent_domain_is_zero() {
        let s = sample("j", &[&["a.com"], &["b.com"]]);
        let ci = bootstrap_metric_ci(&s, Metric::Prevalence, "zzz.com", cfg(200)).unwrap();
        assert_eq!((ci.point, ci.lower, ci.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn share_without_citations_errors() {
        let s = sample("j", &[&[], &[]]);
        assert!(matches!(
            bootstrap_metric_ci(&s, Metric::Share, "a.com", cfg(100)),
            Err(Error::EmptySampleCitations)
        ));
        // prevalence is still defined
        assert!(bootstrap_metric_ci(&s, Metric::Prevalence, "a.com", cfg(100)).is_ok());
    }

    #[test]
    fn preconditions() {
        let s = sample("j", &[&["a.com"], &["b.com"]]);
        assert!(bootstrap_metric_ci(&s, Metric::Share, "a.com", cfg(99)).is_err());
        assert!(bootstrap_metric_ci(
            &s,
            Metric::Share,
            "a.com",
            BootstrapConfig::new(100, 1.0, 1)
        )
        .is_err());
        let one = sample("j", &[&["a.com"]]);
        assert!(bootstrap_metric_ci(&one, Metric::Share, "a.com", cfg(100)).is_err());
    }

    #[test]
    fn deterministic_and_shared_stream() {
        let s = sample(
            "j",
            &[
                &["a.com", "b.com"],
                &["a.com"],
                &["b.com", "c.com"],
                &["c.com"],
                &["a.com"],
            ],
        );
        let domains: BTreeSet<String> = ["a.com", "b.com", "c.com"]
            .iter()
            .map(|d| d.to_string())
            .collect();
        let all = bootstrap_all_domains(&s, Metric::Share, &domains, cfg(500)).unwrap();
        let again = bootstrap_all_domains(&s, Metric::Share, &domains, cfg(500)).unwrap();
        assert_eq!(all, again);
        for d in &domains {
            let single = bootstrap_metric_ci(&s, Metric::Share, d, cfg(500)).unwrap();
            assert_eq!(all[d], single);
        }
    }

    #[test]
    fn nesting_across_alpha() {
        let s = sample(
            "j",
            &[
                &["a.com", "b.com"],
                &["a.com"],
                &["b.com"],
                &["c.com", "a.com"],
            ],
        );
        let domains = BTreeSet::from(["a.com".to_string()]);
        let reps = bootstrap_replicates(&s, Metric::Share, &domains, 1000, 3).unwrap();
        let wide = &reps.intervals(0.05)["a.com"];
        let narrow = &reps.intervals(0.10)["a.com"];
        assert!(wide.lower <= narrow.lower && narrow.upper <= wide.upper);
    }

    #[test]
    fn percentile_rank_convention() {
        assert_eq!(percentile_ranks(1000, 0.05), (25, 975));
        assert_eq!(percentile_ranks(1000, 0.10), (50, 950));
        assert_eq!(percentile_ranks(10, 0.05), (1, 10));
    }

    #[test]
    fn reference_width_values() {
        assert_eq!(reference_width(0.5, 100), 0.196);
        assert_eq!(reference_width(0.0, 57), 0.0);
        assert!((reference_width(0.12, 200) - 3.92 * (0.1056f64 / 200.0).sqrt()).abs() < 1e-12);
        assert!((reference_width(0.12, 200) - 0.0901).abs() < 5e-5);
    }

    #[test]
    fn generic_constant_statistic() {
        let items = [1.0, 2.0, 3.0];
        let ci = bootstrap_generic(&items, |_| Ok(4.2), cfg(200), OnUndefined::Fail).unwrap();
        assert_eq!(
            (ci.point, ci.lower, ci.upper, ci.width),
            (4.2, 4.2, 4.2, 0.0)
        );
    }

    #[test]
    fn generic_two_item_mean() {
        let items = [0.0, 1.0];
        let mean = |xs: &[&f64]| Ok(xs.iter().copied().sum::<f64>() / xs.len() as f64);
        let ci = bootstrap_generic(&items, mean, cfg(10_000), OnUndefined::Fail).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.0, 1.0));
        assert_eq!(ci.point, 0.5);
    }

    #[test]
    fn generic_undefined_policies() {
        let items = [0.0, 1.0];
        let stat = |xs: &[&f64]| {
            if xs.iter().all(|x| **x == *xs[0]) {
                Err(Error::DegenerateRanks)
            } else {
                Ok(1.0)
            }
        };
        let err = bootstrap_generic(&items, stat, cfg(200), OnUndefined::Fail).unwrap_err();
        assert!(matches!(err, Error::StatisticUndefined { .. }));
        let ci = bootstrap_generic(&items, stat, cfg(200), OnUndefined::Exclude).unwrap();
        assert!(ci.excluded > 0);
        assert_eq!(ci.replicates + ci.excluded, 200);
    }

    #[test]
    fn grid_validation() {
        let s = sample("j", &[&["a.com"], &["b.com"], &["a.com"]]);
        let domains = BTreeSet::from(["a.com".to_string()]);
        let opts = ConvergenceOptions {
            grid: Some(vec![2, 4]),
            ..Default::default()
        };
        assert!(matches!(
            convergence_curve(&s, Metric::Share, &domains, cfg(100), &opts),
            Err(Error::GridExceedsSample { n: 4, available: 3 })
        ));
    }

    #[test]
    fn full_grid_point_matches_direct_bootstrap() {
        let s = sample(
            "j",
            &[
                &["a.com", "b.com"],
                &["a.com"],
                &["b.com"],
                &["a.com"],
                &["c.com"],
                &["a.com", "c.com"],
            ],
        );
        let domains: BTreeSet<String> = ["a.com", "b.com"].iter().map(|d| d.to_string()).collect();
        let opts = ConvergenceOptions {
            grid: Some(vec![3, 6]),
            ..Default::default()
        };
        let curve = convergence_curve(&s, Metric::Share, &domains, cfg(300), &opts).unwrap();
        let direct = bootstrap_all_domains(&s, Metric::Share, &domains, cfg(300)).unwrap();
        let expected = direct.values().map(|c| c.width).fold(0.0, f64::max);
        assert_eq!(curve.points.last().unwrap().max_ci_width, expected);
        assert_eq!(curve.p_anchor, 0.5);
    }

    #[test]
    fn default_grid_steps_by_ten() {
        assert_eq!(default_grid(35), vec![10, 20, 30, 35]);
        assert_eq!(default_grid(20), vec![10, 20]);
    }
}
