//! Data model for collected answer-engine responses, JSONL ingestion, and
//! grouping of responses into samples.

mod domain;
mod jsonl;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domain::extract_domain;
pub use jsonl::{parse_dataset, read_job_order, write_jsonl, LineError, ParseReport};

/// One cited source inside a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRef {
    pub url: String,
    pub domain: String,
}

impl CitationRef {
    /// Builds a citation, resolving the domain from the URL.
    pub fn from_url(url: impl Into<String>) -> Result<Self> {
        let url = url.into();
        let domain = extract_domain(&url)?;
        Ok(Self { url, domain })
    }
}

/// A single synthesized answer to a single query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub platform: String,
    pub topic: String,
    pub job_id: String,
    pub timestamp: DateTime<Utc>,
    pub query_id: String,
    pub query_text: String,
    pub response_id: String,
    pub citations: Vec<CitationRef>,
}

impl ResponseRecord {
    pub fn key(&self) -> SampleKey {
        SampleKey::new(&self.platform, &self.topic, &self.job_id)
    }
}

/// Identity of one collection job for one platform and topic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleKey {
    pub platform: String,
    pub topic: String,
    pub job_id: String,
}

impl SampleKey {
    pub fn new(platform: &str, topic: &str, job_id: &str) -> Self {
        Self {
            platform: platform.to_string(),
            topic: topic.to_string(),
            job_id: job_id.to_string(),
        }
    }

    /// The (platform, topic) panel this sample belongs to.
    pub fn panel(&self) -> PanelKey {
        PanelKey {
            platform: self.platform.clone(),
            topic: self.topic.clone(),
        }
    }
}

impl fmt::Display for SampleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.platform, self.topic, self.job_id)
    }
}

/// A (platform, topic) pair: the unit across which samples are compared.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PanelKey {
    pub platform: String,
    pub topic: String,
}

impl fmt::Display for PanelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.platform, self.topic)
    }
}

/// The responses collected by one job: the unit every estimator runs over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    key: SampleKey,
    responses: Vec<ResponseRecord>,
}

impl Sample {
    /// Builds a sample, checking that every response carries the key's labels.
    pub fn new(key: SampleKey, responses: Vec<ResponseRecord>) -> Result<Self> {
        if key.platform.is_empty() || key.topic.is_empty() || key.job_id.is_empty() {
            return Err(Error::InvalidParameter {
                name: "key",
                reason: "platform, topic and job_id must be non-empty".into(),
            });
        }
        if let Some(r) = responses.iter().find(|r| r.key() != key) {
            return Err(Error::InvalidParameter {
                name: "responses",
                reason: format!(
                    "response {} belongs to {}, not {}",
                    r.response_id,
                    r.key(),
                    key
                ),
            });
        }
        Ok(Self { key, responses })
    }

    pub fn key(&self) -> &SampleKey {
        &self.key
    }

    pub fn responses(&self) -> &[ResponseRecord] {
        &self.responses
    }

    /// N, the number of responses.
    pub fn n_responses(&self) -> usize {
        self.responses.len()
    }

    /// The first `n` responses in collection order.
    pub fn prefix(&self, n: usize) -> Sample {
        Sample {
            key: self.key.clone(),
            responses: self.responses[..n.min(self.responses.len())].to_vec(),
        }
    }

    /// The responses at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Sample {
        Sample {
            key: self.key.clone(),
            responses: indices.iter().map(|&i| self.responses[i].clone()).collect(),
        }
    }

    pub(crate) fn push(&mut self, record: ResponseRecord) {
        self.responses.push(record);
    }
}

/// An immutable collection of samples plus where they came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    samples: BTreeMap<SampleKey, Sample>,
    provenance: Vec<String>,
    job_order: Vec<String>,
}

impl Dataset {
    /// Assembles a dataset from samples, rejecting duplicate keys or response ids.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in samples {
            let mut seen = BTreeSet::new();
            for r in &s.responses {
                if !seen.insert(r.response_id.as_str()) {
                    return Err(Error::InvalidParameter {
                        name: "samples",
                        reason: format!("duplicate response {} in {}", r.response_id, s.key),
                    });
                }
            }
            if map.insert(s.key.clone(), s).is_some() {
                return Err(Error::InvalidParameter {
                    name: "samples",
                    reason: "duplicate sample key".into(),
                });
            }
        }
        Ok(Self {
            samples: map,
            ..Self::default()
        })
    }

    pub fn with_provenance(mut self, source: impl Into<String>) -> Self {
        self.provenance.push(source.into());
        self
    }

    /// Sets the explicit job order (earliest first) used by [`Dataset::panel_samples`].
    pub fn with_job_order(mut self, order: Vec<String>) -> Self {
        self.job_order = order;
        self
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.values()
    }

    pub fn sample(&self, key: &SampleKey) -> Option<&Sample> {
        self.samples.get(key)
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn job_order(&self) -> &[String] {
        &self.job_order
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn n_responses(&self) -> usize {
        self.samples.values().map(Sample::n_responses).sum()
    }

    /// All distinct (platform, topic) panels, sorted.
    pub fn panels(&self) -> Vec<PanelKey> {
        let set: BTreeSet<PanelKey> = self.samples.keys().map(SampleKey::panel).collect();
        set.into_iter().collect()
    }

    /// The samples of one panel in job order.
    ///
    /// Jobs listed in the job order come first, in that order; any remaining
    /// jobs follow lexicographically by job id.
    pub fn panel_samples(&self, panel: &PanelKey) -> Vec<&Sample> {
        let mut samples: Vec<&Sample> = self
            .samples
            .values()
            .filter(|s| s.key.platform == panel.platform && s.key.topic == panel.topic)
            .collect();
        let position = |job: &str| {
            self.job_order
                .iter()
                .position(|j| j == job)
                .unwrap_or(usize::MAX)
        };
        samples.sort_by(|a, b| {
            position(&a.key.job_id)
                .cmp(&position(&b.key.job_id))
                .then_with(|| a.key.job_id.cmp(&b.key.job_id))
        });
        samples
    }
}

/// One run of a repeated query: the response plus the sample it came from.
#[derive(Debug, Clone, Copy)]
pub struct QueryRun<'a> {
    pub sample: &'a SampleKey,
    pub response: &'a ResponseRecord,
}

/// Responses to the same query across samples, keyed by query id.
pub type RepeatedQueries<'a> = BTreeMap<String, Vec<QueryRun<'a>>>;

/// Groups responses to the same query across samples of one panel.
///
/// Only queries appearing in at least two samples are kept. Within a sample,
/// duplicate runs of a query collapse to the first occurrence unless
/// `include_within_sample` is set.
pub fn group_repeated_queries<'a>(
    samples: &[&'a Sample],
    include_within_sample: bool,
) -> Result<RepeatedQueries<'a>> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let panel = samples[0].key.panel();
    if samples.iter().any(|s| s.key.panel() != panel) {
        return Err(Error::MixedKeys);
    }

    let mut grouped: BTreeMap<String, Vec<QueryRun<'a>>> = BTreeMap::new();
    let mut sample_count: BTreeMap<&str, BTreeSet<&SampleKey>> = BTreeMap::new();
    for sample in samples {
        let mut seen = BTreeSet::new();
        for r in &sample.responses {
            if !include_within_sample && !seen.insert(r.query_id.as_str()) {
                continue;
            }
            grouped
                .entry(r.query_id.clone())
                .or_default()
                .push(QueryRun {
                    sample: &sample.key,
                    response: r,
                });
            sample_count
                .entry(r.query_id.as_str())
                .or_default()
                .insert(&sample.key);
        }
    }
    grouped.retain(|q, _| sample_count.get(q.as_str()).is_some_and(|s| s.len() >= 2));
    if grouped.is_empty() {
        return Err(Error::NoRepeatedQueries);
    }
    Ok(grouped)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Builds a response whose citations point at the given domains.
    pub fn response(job: &str, query: &str, id: &str, domains: &[&str]) -> ResponseRecord {
        ResponseRecord {
            platform: "p".into(),
            topic: "t".into(),
            job_id: job.into(),
            timestamp: DateTime::<Utc>::from_timestamp(1_770_000_000, 0).unwrap(),
            query_id: query.into(),
            query_text: format!("text of {query}"),
            response_id: id.into(),
            citations: domains
                .iter()
                .enumerate()
                .map(|(i, d)| CitationRef {
                    url: format!("https://{d}/page/{i}"),
                    domain: d.to_string(),
                })
                .collect(),
        }
    }

    /// A sample of responses, one query per response (`q0`, `q1`, ...).
    pub fn sample(job: &str, responses: &[&[&str]]) -> Sample {
        let records = responses
            .iter()
            .enumerate()
            .map(|(i, ds)| response(job, &format!("q{i}"), &format!("{job}-r{i}"), ds))
            .collect();
        Sample::new(SampleKey::new("p", "t", job), records).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn groups_shared_queries() {
        let s1 = sample("j1", &[&["a.com"], &["b.com"]]);
        let s2 = sample("j2", &[&["a.com"]]);
        let grouped = group_repeated_queries(&[&s1, &s2], false).unwrap();
        assert_eq!(grouped.len(), 1);
        let runs = &grouped["q0"];
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].sample.job_id, "j1");
        assert_eq!(runs[1].sample.job_id, "j2");
        assert!(!grouped.contains_key("q1"));
    }

    #[test]
    fn no_repeated_queries() {
        let s1 = sample("j1", &[&["a.com"]]);
        let mut s2 = sample("j2", &[&["a.com"]]);
        s2.responses[0].query_id = "other".into();
        assert!(matches!(
            group_repeated_queries(&[&s1, &s2], false),
            Err(Error::NoRepeatedQueries)
        ));
    }

    #[test]
    fn mixed_panels_rejected() {
        let s1 = sample("j1", &[&["a.com"]]);
        let mut r = response("j2", "q0", "x", &["a.com"]);
        r.topic = "other".into();
        let s2 = Sample::new(r.key(), vec![r]).unwrap();
        assert!(matches!(
            group_repeated_queries(&[&s1, &s2], false),
            Err(Error::MixedKeys)
        ));
    }

    #[test]
    fn within_sample_duplicates_collapse_by_default() {
        let mut s1 = sample("j1", &[&["a.com"], &["b.com"]]);
        s1.responses[1].query_id = "q0".into();
        let s2 = sample("j2", &[&["a.com"]]);
        let collapsed = group_repeated_queries(&[&s1, &s2], false).unwrap();
        assert_eq!(collapsed["q0"].len(), 2);
        let full = group_repeated_queries(&[&s1, &s2], true).unwrap();
        assert_eq!(full["q0"].len(), 3);
    }

    #[test]
    fn nine_samples_with_shared_queries() {
        // 200 queries per sample; 180 are common to all nine, 20 are unique to each.
        let samples: Vec<Sample> = (0..9)
            .map(|j| {
                let job = format!("j{j}");
                let records = (0..200)
                    .map(|q| {
                        let qid = if q < 180 {
                            format!("q{q}")
                        } else {
                            format!("u{j}-{q}")
                        };
                        response(&job, &qid, &format!("{job}-{q}"), &["a.com"])
                    })
                    .collect();
                Sample::new(SampleKey::new("p", "t", &job), records).unwrap()
            })
            .collect();
        let refs: Vec<&Sample> = samples.iter().collect();
        let grouped = group_repeated_queries(&refs, false).unwrap();
        assert_eq!(grouped.len(), 180);
        assert!(grouped.values().all(|runs| runs.len() == 9));
    }

    #[test]
    fn panel_samples_follow_job_order_then_lexicographic() {
        let ds = Dataset::from_samples(vec![
            sample("b", &[&["a.com"]]),
            sample("a", &[&["a.com"]]),
            sample("c", &[&["a.com"]]),
        ])
        .unwrap();
        let panel = PanelKey {
            platform: "p".into(),
            topic: "t".into(),
        };
        let jobs = |ds: &Dataset| {
            ds.panel_samples(&panel)
                .iter()
                .map(|s| s.key().job_id.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(jobs(&ds), ["a", "b", "c"]);
        let ds = ds.with_job_order(vec!["c".into(), "a".into()]);
        assert_eq!(jobs(&ds), ["c", "a", "b"]);
    }

    #[test]
    fn sample_rejects_foreign_responses() {
        let r = response("j1", "q", "r", &[]);
        assert!(Sample::new(SampleKey::new("p", "t", "j2"), vec![r]).is_err());
    }
}
