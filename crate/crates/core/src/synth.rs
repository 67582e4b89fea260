//! Synthetic stochastic answer engine with known ground-truth citation shares.
//!
//! Domains `d0001.example`, `d0002.example`, ... carry normalized Zipf
//! weights `r^-s / sum(r^-s)` by rank `r`. Each response draws a citation
//! count, then fills its slots i.i.d. from the active share vector. Repeated
//! runs of a query (samples after the first) can take slots from the query's
//! first-run citations (`consistency`), or replay the first run
//! verbatim (`deterministic_fraction` of queries). A drift schedule permutes
//! or shifts the share vector from a given job or query index onward.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CitationRef, Dataset, ResponseRecord, Sample, SampleKey};
use crate::driftwatch::{hash_text, ChecksumInput, ChecksumLedger};
use crate::error::{Error, Result};
use crate::resample::derive_seed;

/// Distinct pages per synthetic domain; URLs are `https://dNNNN.example/page/{1..=50}`.
/// A response never cites the same URL twice, so a domain is capped at this
/// many citations per response.
pub const PAGES_PER_DOMAIN: usize = 50;

/// Distribution of citation slots per response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationCount {
    Fixed(usize),
    Uniform {
        lo: usize,
        hi: usize,
    },
    /// (count, weight) pairs; weights need not be normalized.
    Empirical(Vec<(usize, f64)>),
}

impl CitationCount {
    /// A histogram matching a piecewise-linear quantile curve through
    /// `(0, min), (.25, p25), (.5, median), (.75, p75), (.95, p95), (1, max)`,
    /// evaluated at 1000 evenly spaced probabilities and rounded.
    pub fn from_quantiles(min: f64, p25: f64, median: f64, p75: f64, p95: f64, max: f64) -> Self {
        let knots = [
            (0.0, min),
            (0.25, p25),
            (0.5, median),
            (0.75, p75),
            (0.95, p95),
            (1.0, max),
        ];
        let mut hist: BTreeMap<usize, f64> = BTreeMap::new();
        for i in 0..1000 {
            let u = (i as f64 + 0.5) / 1000.0;
            let seg = knots.windows(2).find(|w| u <= w[1].0).expect("u in [0, 1]");
            let (u0, q0) = seg[0];
            let (u1, q1) = seg[1];
            let q = q0 + (q1 - q0) * (u - u0) / (u1 - u0);
            *hist.entry(q.round().max(0.0) as usize).or_default() += 1.0;
        }
        CitationCount::Empirical(hist.into_iter().collect())
    }

    fn validate(&self) -> Result<()> {
        match self {
            CitationCount::Fixed(_) => Ok(()),
            CitationCount::Uniform { lo, hi } if lo <= hi => Ok(()),
            CitationCount::Uniform { lo, hi } => Err(Error::Config(format!(
                "citations_per_response: uniform lo {lo} > hi {hi}"
            ))),
            CitationCount::Empirical(h) => {
                if h.is_empty()
                    || h.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0))
                    || h.iter().all(|(_, w)| *w == 0.0)
                {
                    Err(Error::Config(
                        "citations_per_response: empirical histogram needs non-negative weights with a positive total".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn sampler(&self) -> CountSampler {
        match self {
            CitationCount::Fixed(k) => CountSampler::Fixed(*k),
            CitationCount::Uniform { lo, hi } => CountSampler::Uniform(*lo, *hi),
            CitationCount::Empirical(h) => {
                let total: f64 = h.iter().map(|(_, w)| w).sum();
                let mut acc = 0.0;
                let cdf = h
                    .iter()
                    .map(|(k, w)| {
                        acc += w / total;
                        (*k, acc)
                    })
                    .collect();
                CountSampler::Empirical(cdf)
            }
        }
    }
}

enum CountSampler {
    Fixed(usize),
    Uniform(usize, usize),
    Empirical(Vec<(usize, f64)>),
}

impl CountSampler {
    fn draw(&self, rng: &mut impl Rng) -> usize {
        match self {
            CountSampler::Fixed(k) => *k,
            CountSampler::Uniform(lo, hi) => rng.random_range(*lo..=*hi),
            CountSampler::Empirical(cdf) => {
                let u: f64 = rng.random();
                cdf.iter()
                    .find(|(_, c)| u < *c)
                    .unwrap_or(cdf.last().expect("non-empty"))
                    .0
            }
        }
    }
}

/// Where a drift event takes effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftPoint {
    /// From this 0-based job (sample) index onward, for every query.
    Job(usize),
    /// From this 0-based query index onward, within every sample.
    Query(usize),
}

/// How the ground-truth share vector changes. Ranks are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftAction {
    /// Exchange the shares of two ranks.
    SwapRanks(usize, usize),
    /// Add `delta` to one rank's share and rescale the others to keep the sum at 1.
    ShiftShare { rank: usize, delta: f64 },
    /// `perm[i]` is the 1-based rank whose share domain `i + 1` takes.
    Permute(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEvent {
    pub at: DriftPoint,
    pub action: DriftAction,
}

/// Full parameterization of a synthetic engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub platform: String,
    pub topic: String,
    pub n_domains: usize,
    pub zipf_s: f64,
    pub citations_per_response: CitationCount,
    /// Probability that a slot of a repeated run takes an unused domain from the query's first-run citations.
    pub consistency: f64,
    /// Fraction of queries whose first-run citations are replayed verbatim in later samples.
    pub deterministic_fraction: f64,
    pub drift: Vec<DriftEvent>,
    pub n_queries: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            platform: "synthetic".into(),
            topic: "default".into(),
            n_domains: 500,
            zipf_s: 1.1,
            citations_per_response: CitationCount::Uniform { lo: 5, hi: 15 },
            consistency: 0.0,
            deterministic_fraction: 0.0,
            drift: Vec::new(),
            n_queries: 200,
            n_samples: 9,
            seed: 1,
        }
    }
}

/// Synthetic domain name for 1-based rank `r`.
pub fn domain_name(rank: usize) -> String {
    format!("d{rank:04}.example")
}

/// Normalized Zipf weights for ranks 1..=n.
pub fn zipf_shares(n: usize, s: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-s)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn check_rank(rank: usize, n: usize) -> Result<()> {
    if rank == 0 || rank > n {
        Err(Error::ScheduleOutOfBounds(format!(
            "rank {rank} outside 1..={n}"
        )))
    } else {
        Ok(())
    }
}

fn apply_action(shares: &mut [f64], action: &DriftAction) {
    match action {
        DriftAction::SwapRanks(a, b) => shares.swap(a - 1, b - 1),
        DriftAction::ShiftShare { rank, delta } => {
            let i = rank - 1;
            let old = shares[i];
            let new = old + delta;
            let scale = (1.0 - new) / (1.0 - old);
            for (j, s) in shares.iter_mut().enumerate() {
                *s = if j == i { new } else { *s * scale };
            }
        }
        DriftAction::Permute(perm) => {
            let before = shares.to_vec();
            for (i, &src) in perm.iter().enumerate() {
                shares[i] = before[src - 1];
            }
        }
    }
}

impl SynthConfig {
    /// Checks every field, naming the offending one.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.platform.is_empty() || self.topic.is_empty() {
            return fail("platform and topic must be non-empty".into());
        }
        if self.n_domains == 0 {
            return fail("n_domains must be positive".into());
        }
        if !(self.zipf_s.is_finite() && self.zipf_s > 0.0) {
            return fail(format!("zipf_s must be positive, got {}", self.zipf_s));
        }
        for (name, p) in [
            ("consistency", self.consistency),
            ("deterministic_fraction", self.deterministic_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.n_queries == 0 || self.n_samples == 0 {
            return fail("n_queries and n_samples must be positive".into());
        }
        self.citations_per_response.validate()?;
        self.validate_schedule(&self.drift)?;
        let regimes = self.regimes();
        if regimes
            .iter()
            .any(|r| r.shares.iter().any(|s| !(0.0..=1.0).contains(s)))
        {
            return fail("drift schedule produces shares outside [0, 1]".into());
        }
        Ok(())
    }

    fn validate_schedule(&self, schedule: &[DriftEvent]) -> Result<()> {
        for e in schedule {
            match e.at {
                DriftPoint::Job(j) if j >= self.n_samples => {
                    return Err(Error::ScheduleOutOfBounds(format!(
                        "job {j} >= n_samples {}",
                        self.n_samples
                    )))
                }
                DriftPoint::Query(q) if q >= self.n_queries => {
                    return Err(Error::ScheduleOutOfBounds(format!(
                        "query {q} >= n_queries {}",
                        self.n_queries
                    )))
                }
                _ => {}
            }
            match &e.action {
                DriftAction::SwapRanks(a, b) => {
                    check_rank(*a, self.n_domains)?;
                    check_rank(*b, self.n_domains)?;
                }
                DriftAction::ShiftShare { rank, delta } => {
                    check_rank(*rank, self.n_domains)?;
                    if !delta.is_finite() {
                        return Err(Error::ScheduleOutOfBounds("non-finite share delta".into()));
                    }
                }
                DriftAction::Permute(perm) => {
                    let distinct: BTreeSet<usize> = perm.iter().copied().collect();
                    if perm.len() != self.n_domains || distinct.len() != perm.len() {
                        return Err(Error::ScheduleOutOfBounds(
                            "permutation must cover every rank once".into(),
                        ));
                    }
                    for &r in perm {
                        check_rank(r, self.n_domains)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn active_events(&self, job: usize, query: usize) -> Vec<bool> {
        self.drift
            .iter()
            .map(|e| match e.at {
                DriftPoint::Job(j) => job >= j,
                DriftPoint::Query(q) => query >= q,
            })
            .collect()
    }

    fn shares_for(&self, active: &[bool]) -> Vec<f64> {
        let mut shares = zipf_shares(self.n_domains, self.zipf_s);
        for (e, on) in self.drift.iter().zip(active) {
            if *on {
                apply_action(&mut shares, &e.action);
            }
        }
        shares
    }

    /// Every distinct share vector the schedule produces, with the first
    /// (job, query) where it applies.
    pub fn regimes(&self) -> Vec<Regime> {
        let mut seen: Vec<Vec<bool>> = Vec::new();
        let mut out = Vec::new();
        for job in 0..self.n_samples {
            for query in 0..self.n_queries {
                let active = self.active_events(job, query);
                if !seen.contains(&active) {
                    out.push(Regime {
                        from_job: job,
                        from_query: query,
                        shares: self.shares_for(&active),
                    });
                    seen.push(active);
                }
            }
        }
        out
    }
}

/// Returns a copy of `config` with `schedule` appended to its drift events.
pub fn inject_drift(config: &SynthConfig, schedule: &[DriftEvent]) -> Result<SynthConfig> {
    config.validate_schedule(schedule)?;
    let mut out = config.clone();
    out.drift.extend(schedule.iter().cloned());
    Ok(out)
}

/// One share vector and where it first applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regime {
    pub from_job: usize,
    pub from_query: usize,
    pub shares: Vec<f64>,
}

/// The population shares the generated samples estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    /// Shares of the initial regime (job 0, query 0).
    pub true_share: BTreeMap<String, f64>,
    pub regimes: Vec<Regime>,
    pub config: SynthConfig,
}

impl GroundTruth {
    pub fn share(&self, domain: &str) -> f64 {
        self.true_share.get(domain).copied().unwrap_or(0.0)
    }
}

/// Named calibration presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    GeminiLike,
    SearchGptLike,
    PerplexityLike,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gemini-like" => Ok(Preset::GeminiLike),
            "searchgpt-like" => Ok(Preset::SearchGptLike),
            "perplexity-like" => Ok(Preset::PerplexityLike),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

struct Calibration {
    name: &'static str,
    /// Citations-per-response quantiles: min, p25, median, p75, p95, max.
    quantiles: [f64; 6],
    n_domains: usize,
    zipf_s: f64,
    consistency: f64,
    deterministic_fraction: f64,
}

// Quantile knots follow the daily-regime citation summaries per platform
// (medians 36-40 / 5-7 / 19-22).
// Consistency values were tuned so the median pairwise domain Jaccard of
// repeated runs lands near 0.30 / 0.37 / 0.50.
const CALIBRATION: [Calibration; 3] = [
    Calibration {
        name: "gemini-like",
        quantiles: [6.0, 26.0, 37.5, 55.0, 84.0, 158.0],
        n_domains: 600,
        zipf_s: 1.0,
        consistency: 0.66,
        deterministic_fraction: 0.0,
    },
    Calibration {
        name: "searchgpt-like",
        quantiles: [1.0, 5.0, 6.0, 8.0, 11.0, 18.0],
        n_domains: 300,
        zipf_s: 1.1,
        consistency: 0.72,
        deterministic_fraction: 0.06,
    },
    Calibration {
        name: "perplexity-like",
        quantiles: [2.0, 15.0, 20.0, 28.0, 41.0, 72.0],
        n_domains: 300,
        zipf_s: 1.4,
        consistency: 0.9,
        deterministic_fraction: 0.0,
    },
];

/// Within-sample shift of the searchgpt-like preset: the rank-3 domain gains
/// share halfway through the query sequence.
const SEARCHGPT_SHIFT: f64 = 0.06;

/// Configuration for a named preset (9 samples x 200 queries).
pub fn preset(name: &str) -> Result<SynthConfig> {
    let which: Preset = name.parse()?;
    Ok(preset_config(which))
}

pub fn preset_config(which: Preset) -> SynthConfig {
    let cal = match which {
        Preset::GeminiLike => &CALIBRATION[0],
        Preset::SearchGptLike => &CALIBRATION[1],
        Preset::PerplexityLike => &CALIBRATION[2],
    };
    let [min, p25, median, p75, p95, max] = cal.quantiles;
    let mut cfg = SynthConfig {
        platform: cal.name.trim_end_matches("-like").into(),
        topic: "synthetic".into(),
        n_domains: cal.n_domains,
        zipf_s: cal.zipf_s,
        citations_per_response: CitationCount::from_quantiles(min, p25, median, p75, p95, max),
        consistency: cal.consistency,
        deterministic_fraction: cal.deterministic_fraction,
        drift: Vec::new(),
        n_queries: 200,
        n_samples: 9,
        seed: 1,
    };
    if which == Preset::SearchGptLike {
        cfg.drift.push(DriftEvent {
            at: DriftPoint::Query(100),
            action: DriftAction::ShiftShare {
                rank: 3,
                delta: SEARCHGPT_SHIFT,
            },
        });
    }
    cfg
}

/// Cumulative distribution over domain indices for one regime.
struct DomainSampler {
    cdf: Vec<f64>,
}

impl DomainSampler {
    fn new(shares: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = shares
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cdf }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }
}

/// A citation slot: 0-based domain index and 1-based page.
type Slot = (usize, usize);

struct Engine<'a> {
    config: &'a SynthConfig,
    counts: CountSampler,
    samplers: HashMap<Vec<bool>, DomainSampler>,
    deterministic: BTreeSet<usize>,
    base_time: DateTime<Utc>,
}

impl<'a> Engine<'a> {
    fn new(config: &'a SynthConfig) -> Self {
        let mut samplers = HashMap::new();
        for job in 0..config.n_samples {
            for q in 0..config.n_queries {
                let active = config.active_events(job, q);
                samplers
                    .entry(active)
                    .or_insert_with_key(|a| DomainSampler::new(&config.shares_for(a)));
            }
        }
        let n_det = (config.deterministic_fraction * config.n_queries as f64).round() as usize;
        let mut order: Vec<usize> = (0..config.n_queries).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
            config.seed,
            u64::MAX,
        )));
        Self {
            config,
            counts: config.citations_per_response.sampler(),
            samplers,
            deterministic: order.into_iter().take(n_det).collect(),
            base_time: DateTime::<Utc>::from_timestamp(1_770_076_800, 0).expect("valid epoch"),
        }
    }

    fn rng(&self, job: usize, query: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(
            self.config.seed,
            ((job as u64) << 32) | query as u64,
        ))
    }

    /// Places a domain on one of its unused pages; `None` when all pages are taken.
    fn place(
        rng: &mut ChaCha8Rng,
        used: &mut HashMap<usize, Vec<usize>>,
        domain: usize,
    ) -> Option<Slot> {
        let taken = used.entry(domain).or_default();
        let free: Vec<usize> = (1..=PAGES_PER_DOMAIN)
            .filter(|p| !taken.contains(p))
            .collect();
        let page = *free.get(rng.random_range(0..free.len().max(1)))?;
        taken.push(page);
        Some((domain, page))
    }

    fn run(&self, job: usize, query: usize, first_run: Option<&[Slot]>) -> Vec<Slot> {
        if let Some(first) = first_run {
            if self.deterministic.contains(&query) {
                return first.to_vec();
            }
        }
        let mut rng = self.rng(job, query);
        let sampler = &self.samplers[&self.config.active_events(job, query)];
        let k = self.counts.draw(&mut rng);
        // Pinned slots take first-run domains without replacement, in random order.
        let mut pool: Vec<usize> = first_run.unwrap_or_default().iter().map(|s| s.0).collect();
        pool.shuffle(&mut rng);
        let mut used = HashMap::new();
        let mut slots = Vec::with_capacity(k);
        for _ in 0..k {
            let pinned = !pool.is_empty() && rng.random::<f64>() < self.config.consistency;
            let domain = if pinned {
                pool.pop().expect("non-empty pool")
            } else {
                sampler.draw(&mut rng)
            };
            if let Some(slot) = Self::place(&mut rng, &mut used, domain) {
                slots.push(slot);
            }
        }
        slots
    }

    fn record(&self, job: usize, query: usize, slots: &[Slot]) -> ResponseRecord {
        let job_id = job_id(job);
        let query_id = format!("q{:04}", query + 1);
        ResponseRecord {
            platform: self.config.platform.clone(),
            topic: self.config.topic.clone(),
            timestamp: self.base_time
                + Duration::days(job as i64)
                + Duration::minutes(query as i64),
            query_text: format!("synthetic query {}", query + 1),
            response_id: format!("{job_id}-{query_id}"),
            job_id,
            query_id,
            citations: slots
                .iter()
                .map(|&(d, p)| {
                    let domain = domain_name(d + 1);
                    CitationRef {
                        url: format!("https://{domain}/page/{p}"),
                        domain,
                    }
                })
                .collect(),
        }
    }
}

/// Job id for 0-based job index `j` (`job001`, `job002`, ...).
pub fn job_id(j: usize) -> String {
    format!("job{:03}", j + 1)
}

/// Generates `n_samples` samples of `n_queries` responses each.
pub fn generate(config: &SynthConfig) -> Result<(Dataset, GroundTruth)> {
    config.validate()?;
    let engine = Engine::new(config);
    let first: Vec<Vec<Slot>> = (0..config.n_queries)
        .into_par_iter()
        .map(|q| engine.run(0, q, None))
        .collect();
    let later: Vec<Vec<Vec<Slot>>> = (1..config.n_samples)
        .into_par_iter()
        .map(|j| {
            (0..config.n_queries)
                .map(|q| engine.run(j, q, Some(&first[q])))
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(config.n_samples);
    for (j, runs) in std::iter::once(&first).chain(later.iter()).enumerate() {
        let records = runs
            .iter()
            .enumerate()
            .map(|(q, s)| engine.record(j, q, s))
            .collect();
        samples.push(Sample::new(
            SampleKey::new(&config.platform, &config.topic, &job_id(j)),
            records,
        )?);
    }
    let dataset = Dataset::from_samples(samples)?
        .with_provenance(format!(
            "synthetic:{}:{}:seed={}",
            config.platform, config.topic, config.seed
        ))
        .with_job_order((0..config.n_samples).map(job_id).collect());

    let regimes = config.regimes();
    let true_share = regimes[0]
        .shares
        .iter()
        .enumerate()
        .map(|(i, s)| (domain_name(i + 1), *s))
        .collect();
    Ok((
        dataset,
        GroundTruth {
            true_share,
            regimes,
            config: config.clone(),
        },
    ))
}

/// Which synthetic pages change content, and when.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChecksumPlan {
    /// (1-based domain rank, 0-based job): every page of the domain changes at that job.
    pub changes: Vec<(usize, usize)>,
    /// Ranks whose pages change at every job (rendering noise).
    pub volatile_ranks: Vec<usize>,
}

/// Checksums for every cited URL at every job of a synthetic dataset.
pub fn synth_checksums(dataset: &Dataset, plan: &ChecksumPlan) -> Result<ChecksumLedger> {
    let mut ledger = ChecksumLedger::default();
    for panel in dataset.panels() {
        let samples = dataset.panel_samples(&panel);
        let urls: BTreeSet<(&str, &str)> = samples
            .iter()
            .flat_map(|s| s.responses().iter().flat_map(|r| r.citations.iter()))
            .map(|c| (c.url.as_str(), c.domain.as_str()))
            .collect();
        for (j, s) in samples.iter().enumerate() {
            for &(url, domain) in &urls {
                let rank: usize = domain
                    .strip_prefix('d')
                    .and_then(|d| d.strip_suffix(".example"))
                    .and_then(|d| d.parse().ok())
                    .unwrap_or(0);
                let revision = if plan.volatile_ranks.contains(&rank) {
                    j
                } else {
                    plan.changes
                        .iter()
                        .filter(|&&(r, at)| r == rank && at <= j)
                        .count()
                };
                ledger.insert(ChecksumInput {
                    url: url.to_string(),
                    job_id: s.key().job_id.clone(),
                    sha256: None,
                    text: Some(format!("content of {url}\nrevision {revision}\n")),
                })?;
            }
        }
    }
    Ok(ledger)
}

/// Convenience: the hash a synthetic page has at a given revision.
pub fn synth_page_hash(url: &str, revision: usize) -> String {
    hash_text(&format!("content of {url}\nrevision {revision}\n"))
}
