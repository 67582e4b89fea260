//! Domain-level citation-set similarity across repeated runs of a query.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::corpus::{PanelKey, QueryRun, RepeatedQueries, ResponseRecord};
use crate::error::{Error, Result};
use crate::stats;

/// Histogram bin width for exported Jaccard distributions.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;

/// Distinct cited domains of a response.
pub fn domain_set(response: &ResponseRecord) -> BTreeSet<&str> {
    response
        .citations
        .iter()
        .map(|c| c.domain.as_str())
        .collect()
}

/// Jaccard index of two domain sets. Two empty sets are identical (1.0).
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let (inter, union) = intersection_union(a, b);
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn intersection_union<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> (usize, usize) {
    let inter = a.intersection(b).count();
    (inter, a.len() + b.len() - inter)
}

/// One compared pair of runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub query_id: String,
    pub sample_a: String,
    pub sample_b: String,
    pub jaccard: f64,
    pub intersection: usize,
    pub union: usize,
}

/// Jaccard values for every unordered pair of runs, in (i, j) with i < j order.
pub fn pairwise_jaccard(responses: &[&ResponseRecord]) -> Result<Vec<f64>> {
    if responses.len() < 2 {
        return Err(Error::SingleRun);
    }
    let sets: Vec<_> = responses.iter().map(|r| domain_set(r)).collect();
    let mut out = Vec::with_capacity(sets.len() * (sets.len() - 1) / 2);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            out.push(jaccard(&sets[i], &sets[j]));
        }
    }
    Ok(out)
}

fn query_pairs(query_id: &str, runs: &[QueryRun<'_>]) -> Vec<PairRecord> {
    let sets: Vec<_> = runs.iter().map(|r| domain_set(r.response)).collect();
    let mut out = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (inter, union) = intersection_union(&sets[i], &sets[j]);
            out.push(PairRecord {
                query_id: query_id.to_string(),
                sample_a: runs[i].sample.job_id.clone(),
                sample_b: runs[j].sample.job_id.clone(),
                jaccard: if union == 0 {
                    1.0
                } else {
                    inter as f64 / union as f64
                },
                intersection: inter,
                union,
            });
        }
    }
    out
}

/// All run pairs of all repeated queries, ordered by query id.
pub fn all_pairs(grouped: &RepeatedQueries<'_>) -> Vec<PairRecord> {
    grouped
        .iter()
        .flat_map(|(q, runs)| query_pairs(q, runs))
        .collect()
}

/// Fixed-width histogram over [0, 1]; 1.0 falls in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardHistogram {
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl JaccardHistogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Self {
        let n_bins = (1.0 / bin_width).round() as usize;
        let mut counts = vec![0; n_bins];
        for &v in values {
            let idx = ((v / bin_width).floor() as usize).min(n_bins - 1);
            counts[idx] += 1;
        }
        Self { bin_width, counts }
    }

    /// (lower, upper) edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        (
            i as f64 * self.bin_width,
            ((i + 1) as f64 * self.bin_width).min(1.0),
        )
    }
}

/// Overlap statistics over every run pair of a panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapSummary {
    pub platform: String,
    pub topic: String,
    pub n_queries: usize,
    pub n_pairs: usize,
    pub median_jaccard: f64,
    /// Proportion of pairs with Jaccard exactly 1.
    pub identical_rate: f64,
    /// Proportion of pairs with Jaccard exactly 0.
    pub zero_overlap_rate: f64,
    pub mean_intersection: f64,
    pub mean_unique_domains: f64,
    pub histogram: JaccardHistogram,
}

pub fn overlap_summary(grouped: &RepeatedQueries<'_>) -> Result<OverlapSummary> {
    let pairs = all_pairs(grouped);
    if pairs.is_empty() {
        return Err(Error::NoRepeatedQueries);
    }
    let first = &grouped.values().next().expect("non-empty")[0];
    let n = pairs.len() as f64;
    let values: Vec<f64> = pairs.iter().map(|p| p.jaccard).collect();
    Ok(OverlapSummary {
        platform: first.sample.platform.clone(),
        topic: first.sample.topic.clone(),
        n_queries: grouped.len(),
        n_pairs: pairs.len(),
        median_jaccard: stats::median(&values),
        identical_rate: values.iter().filter(|&&j| j == 1.0).count() as f64 / n,
        zero_overlap_rate: values.iter().filter(|&&j| j == 0.0).count() as f64 / n,
        mean_intersection: pairs.iter().map(|p| p.intersection as f64).sum::<f64>() / n,
        mean_unique_domains: pairs.iter().map(|p| p.union as f64).sum::<f64>() / n,
        histogram: JaccardHistogram::from_values(&values, HISTOGRAM_BIN_WIDTH),
    })
}

/// Similarity of runs grouped by the query's modal citation count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountBin {
    pub modal_citation_count: usize,
    pub median_jaccard: f64,
    pub pair_count: usize,
    /// Interquartile band of the bin's Jaccard values.
    pub p25: f64,
    pub p75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityByCount {
    pub bins: Vec<CountBin>,
}

/// Most frequent value; ties resolve to the smallest.
pub fn modal_count(counts: &[usize]) -> Option<usize> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in counts {
        *freq.entry(c).or_default() += 1;
    }
    // max_by_key keeps the last maximum; scanning counts descending makes that the smallest.
    freq.into_iter()
        .rev()
        .max_by_key(|&(_, f)| f)
        .map(|(c, _)| c)
}

pub fn similarity_by_count(grouped: &RepeatedQueries<'_>) -> Result<SimilarityByCount> {
    let mut by_mode: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (q, runs) in grouped {
        let counts: Vec<usize> = runs.iter().map(|r| r.response.citations.len()).collect();
        let Some(mode) = modal_count(&counts) else {
            continue;
        };
        by_mode
            .entry(mode)
            .or_default()
            .extend(query_pairs(q, runs).into_iter().map(|p| p.jaccard));
    }
    by_mode.retain(|_, v| !v.is_empty());
    if by_mode.is_empty() {
        return Err(Error::NoRepeatedQueries);
    }
    let bins = by_mode
        .into_iter()
        .map(|(mode, mut values)| {
            values.sort_by(f64::total_cmp);
            CountBin {
                modal_citation_count: mode,
                median_jaccard: stats::percentile_sorted(&values, 0.5),
                pair_count: values.len(),
                p25: stats::percentile_sorted(&values, 0.25),
                p75: stats::percentile_sorted(&values, 0.75),
            }
        })
        .collect();
    Ok(SimilarityByCount { bins })
}

/// CSV: platform,topic,query_id,sample_a,sample_b,jaccard,intersection,union
pub fn write_pairs_csv<W: Write>(panels: &[(PanelKey, Vec<PairRecord>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "query_id",
        "sample_a",
        "sample_b",
        "jaccard",
        "intersection",
        "union",
    ])?;
    for (k, p) in panels
        .iter()
        .flat_map(|(k, pairs)| pairs.iter().map(move |p| (k, p)))
    {
        w.write_record([
            k.platform.as_str(),
            &k.topic,
            &p.query_id,
            &p.sample_a,
            &p.sample_b,
            &p.jaccard.to_string(),
            &p.intersection.to_string(),
            &p.union.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV: platform,topic,bin_lower,bin_upper,count
pub fn write_histogram_csv<W: Write>(summaries: &[OverlapSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["platform", "topic", "bin_lower", "bin_upper", "count"])?;
    for s in summaries {
        for (i, c) in s.histogram.counts.iter().enumerate() {
            let (lo, hi) = s.histogram.edges(i);
            w.write_record([
                s.platform.as_str(),
                &s.topic,
                &lo.to_string(),
                &hi.to_string(),
                &c.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Overlap-summary CSV, one row per panel.
pub fn write_summary_csv<W: Write>(summaries: &[OverlapSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "queries",
        "pairs",
        "median_jaccard",
        "identical_rate",
        "zero_overlap_rate",
        "mean_intersection",
        "mean_unique_domains",
    ])?;
    for s in summaries {
        w.write_record([
            s.platform.as_str(),
            &s.topic,
            &s.n_queries.to_string(),
            &s.n_pairs.to_string(),
            &s.median_jaccard.to_string(),
            &s.identical_rate.to_string(),
            &s.zero_overlap_rate.to_string(),
            &s.mean_intersection.to_string(),
            &s.mean_unique_domains.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Similarity-by-count CSV: platform,topic,modal_count,median_jaccard,p25,p75,pairs
pub fn write_by_count_csv<W: Write>(
    rows: &[(String, String, SimilarityByCount)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "platform",
        "topic",
        "modal_citation_count",
        "median_jaccard",
        "p25",
        "p75",
        "pairs",
    ])?;
    for (platform, topic, s) in rows {
        for b in &s.bins {
            w.write_record([
                platform.as_str(),
                topic,
                &b.modal_citation_count.to_string(),
                &b.median_jaccard.to_string(),
                &b.p25.to_string(),
                &b.p75.to_string(),
                &b.pair_count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::group_repeated_queries;
    use crate::corpus::testutil::{response, sample};

    fn set<'a>(xs: &[&'a str]) -> BTreeSet<&'a str> {
        xs.iter().copied().collect()
    }

    #[test]
    fn domain_set_dedups() {
        let r = response("j", "q", "r", &["a.com", "a.com", "b.com"]);
        assert_eq!(domain_set(&r), set(&["a.com", "b.com"]));
        assert!(domain_set(&response("j", "q", "r", &[])).is_empty());
    }

    #[test]
    fn textbook_jaccard() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["b", "c"])), 1.0 / 3.0);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
        assert_eq!(jaccard(&set(&[]), &set(&["a"])), 0.0);
    }

    #[test]
    fn three_runs_give_three_pairs() {
        let r1 = response("j1", "q", "1", &["a", "b"]);
        let r2 = response("j2", "q", "2", &["b", "c"]);
        let r3 = response("j3", "q", "3", &["a", "b", "c"]);
        let v = pairwise_jaccard(&[&r1, &r2, &r3]).unwrap();
        assert_eq!(v, vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        assert!(matches!(pairwise_jaccard(&[&r1]), Err(Error::SingleRun)));
    }

    #[test]
    fn identical_and_disjoint_extremes() {
        let s1 = sample("j1", &[&["a", "b"], &["c"]]);
        let s2 = sample("j2", &[&["a", "b"], &["c"]]);
        let g = group_repeated_queries(&[&s1, &s2], false).unwrap();
        let o = overlap_summary(&g).unwrap();
        assert_eq!(
            (o.median_jaccard, o.identical_rate, o.zero_overlap_rate),
            (1.0, 1.0, 0.0)
        );

        let s3 = sample("j2", &[&["x"], &["y"]]);
        let g = group_repeated_queries(&[&s1, &s3], false).unwrap();
        let o = overlap_summary(&g).unwrap();
        assert_eq!((o.median_jaccard, o.zero_overlap_rate), (0.0, 1.0));
    }

    #[test]
    fn two_query_toy_dataset() {
        // q0: {a,b} vs {b,c} -> J=1/3, |∩|=1, |∪|=3
        // q1: {a} vs {a}     -> J=1,   |∩|=1, |∪|=1
        let s1 = sample("j1", &[&["a", "b"], &["a"]]);
        let s2 = sample("j2", &[&["b", "c"], &["a", "a"]]);
        let g = group_repeated_queries(&[&s1, &s2], false).unwrap();
        let o = overlap_summary(&g).unwrap();
        assert_eq!(o.n_queries, 2);
        assert_eq!(o.n_pairs, 2);
        assert!((o.median_jaccard - (1.0 / 3.0 + 1.0) / 2.0).abs() < 1e-15);
        assert_eq!(o.identical_rate, 0.5);
        assert_eq!(o.zero_overlap_rate, 0.0);
        assert_eq!(o.mean_intersection, 1.0);
        assert_eq!(o.mean_unique_domains, 2.0);
        assert_eq!(o.histogram.counts.iter().sum::<usize>(), 2);
        assert_eq!(*o.histogram.counts.last().unwrap(), 1);
    }

    #[test]
    fn modal_count_ties_to_smallest() {
        assert_eq!(modal_count(&[5, 5, 9]), Some(5));
        assert_eq!(modal_count(&[4, 6]), Some(4));
        assert_eq!(modal_count(&[6, 4, 6, 4]), Some(4));
        assert_eq!(modal_count(&[]), None);
    }

    #[test]
    fn by_count_bins_sorted() {
        let s1 = sample("j1", &[&["a", "b"], &["a"]]);
        let s2 = sample("j2", &[&["b", "c"], &["a"]]);
        let g = group_repeated_queries(&[&s1, &s2], false).unwrap();
        let by = similarity_by_count(&g).unwrap();
        let modes: Vec<usize> = by.bins.iter().map(|b| b.modal_citation_count).collect();
        assert_eq!(modes, [1, 2]);
        assert_eq!(by.bins[0].median_jaccard, 1.0);
    }
}
