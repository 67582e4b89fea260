//! Analysis sections shared by the subcommands and `report`. Each section
//! runs per panel (platform, topic) and writes its CSV files.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{InputDigest, OutDir, REPORT_SCHEMA};
use crate::corpus::{group_repeated_queries, Dataset, PanelKey, Sample, SampleKey};
use crate::dispersion::{
    self, by_platform, dispersion_summary, loglog_fit, panel_dispersion, rank_share_table,
    DispersionGroup, LogLogFit,
};
use crate::driftwatch::{
    self, content_status, drift_against_baseline, drift_test, ChecksumLedger, ContentStatus,
    DriftFlag, Status,
};
use crate::error::{Error, Result};
use crate::metrics::{
    self, citation_summary, classify_frequently_cited, compute_sample_metrics,
    pooled_citation_summary, CitationSummary, FrequentlyCitedSet, SampleMetrics,
};
use crate::overlap::{self, all_pairs, overlap_summary, similarity_by_count, OverlapSummary};
use crate::resample::{
    self, bootstrap_all_domains, convergence_curve, BootstrapConfig, CiRow, ConvergenceCurve,
    ConvergenceOptions, Metric, SubsampleOrder,
};
use crate::stability::{
    self, rank_stability_series, weighted_rank_correlation, StabilitySeries, StabilityThresholds,
};

/// Every file `report` writes.
pub const REPORT_FILES: &[&str] = &[
    "drift.csv",
    "fig01_jaccard_histogram.csv",
    "fig02_similarity_by_count.csv",
    "fig04_share_timeseries.csv",
    "fig05_metric_correlation.csv",
    "fig06_appearance.csv",
    "fig07_rank_share.csv",
    "fig08_rank_share_baseline.csv",
    "fig09_dispersion.csv",
    "fig10_ci_prevalence.csv",
    "fig10_ci_share.csv",
    "fig11a_convergence.csv",
    "fig11b_rank_stability.csv",
    "fig12_content_status.csv",
    "metrics.csv",
    "overlap_pairs.csv",
    "report.json",
    "table2_citation_summary.csv",
    "table4_overlap_summary.csv",
    "table5_dispersion_summary.csv",
    "table6_rank_stability.csv",
];

/// Domains tracked in time-series and content-status output.
const TOP_DOMAINS: usize = 5;
/// Fallback focus set size when a panel has no frequently-cited domains.
const FALLBACK_DOMAINS: usize = 10;
/// Head of the rank-share curve used for the log-log fit.
const LOGLOG_HEAD: usize = 50;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Widths {
    pub share: f64,
    pub prevalence: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftParams {
    pub alpha: f64,
    pub practical_delta: f64,
}

pub struct ReportParams {
    pub boot: BootstrapConfig,
    pub widths: Widths,
    pub thresholds: StabilityThresholds,
    pub drift: DriftParams,
    pub min_fraction: f64,
    pub content_domains: Vec<String>,
    pub content_top: usize,
}

struct Panel<'a> {
    key: PanelKey,
    samples: Vec<&'a Sample>,
    metrics: Vec<SampleMetrics>,
    fc: Option<FrequentlyCitedSet>,
}

impl Panel<'_> {
    fn label(&self) -> String {
        format!("{}/{}", self.key.platform, self.key.topic)
    }

    fn frequently_cited(&self) -> Result<&FrequentlyCitedSet> {
        self.fc.as_ref().ok_or(Error::TooFewSamples {
            needed: 2,
            got: self.samples.len(),
        })
    }

    /// Frequently-cited domains, or the baseline's top domains when there are none.
    fn focus_domains(&self) -> Result<BTreeSet<String>> {
        if let Some(fc) = self.fc.as_ref().filter(|f| !f.is_empty()) {
            return Ok(fc.domains.clone());
        }
        let mut ranked: Vec<(&str, f64)> = self.metrics[0]
            .per_domain
            .values()
            .filter(|m| m.count > 0)
            .map(|m| (m.domain.as_str(), m.share))
            .collect();
        if ranked.is_empty() {
            return Err(Error::EmptySampleCitations);
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(ranked
            .into_iter()
            .take(FALLBACK_DOMAINS)
            .map(|(d, _)| d.to_string())
            .collect())
    }

    /// `n` domains of `candidates` with the highest mean share across samples.
    fn top_by_mean_share(&self, candidates: &BTreeSet<String>, n: usize) -> Vec<String> {
        let mut ranked: Vec<(&String, f64)> = candidates
            .iter()
            .map(|d| {
                (
                    d,
                    self.metrics.iter().map(|m| m.share(d)).sum::<f64>()
                        / self.metrics.len() as f64,
                )
            })
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().take(n).map(|(d, _)| d.clone()).collect()
    }
}

/// A panel's dispersion records and the log-log fit of its baseline.
type DispersionResult = (DispersionGroup, Option<LogLogFit>);

pub(crate) struct Ctx<'a> {
    panels: Vec<Panel<'a>>,
    strict: bool,
    warnings: RefCell<Vec<String>>,
}

impl<'a> Ctx<'a> {
    /// In strict mode a section fails when it fails for every panel;
    /// otherwise failures become warnings.
    pub fn new(dataset: &'a Dataset, min_fraction: f64, strict: bool) -> Result<Self> {
        let mut panels = Vec::new();
        for key in dataset.panels() {
            let samples = dataset.panel_samples(&key);
            let metrics = samples
                .iter()
                .map(|s| compute_sample_metrics(s))
                .collect::<Result<Vec<_>>>()?;
            let fc = if samples.len() >= 2 {
                Some(classify_frequently_cited(&samples, min_fraction)?)
            } else {
                None
            };
            panels.push(Panel {
                key,
                samples,
                metrics,
                fc,
            });
        }
        Ok(Self {
            panels,
            strict,
            warnings: RefCell::new(Vec::new()),
        })
    }

    fn each<T>(
        &self,
        section: &str,
        f: impl Fn(&Panel<'a>) -> Result<T>,
    ) -> Result<Vec<(PanelKey, T)>> {
        let mut ok = Vec::new();
        let mut first_err = None;
        for p in &self.panels {
            match f(p) {
                Ok(v) => ok.push((p.key.clone(), v)),
                Err(e @ Error::InvalidParameter { .. }) => return Err(e),
                Err(e) => {
                    let msg = format!("{section} skipped for {}: {e}", p.label());
                    eprintln!("warning: {msg}");
                    self.warnings.borrow_mut().push(msg);
                    first_err.get_or_insert(e);
                }
            }
        }
        match first_err {
            Some(e) if self.strict && ok.is_empty() => Err(e),
            _ => Ok(ok),
        }
    }

    pub fn metrics_section(&self, out: &mut OutDir) -> Result<Vec<(PanelKey, CitationSummary)>> {
        let all: Vec<SampleMetrics> = self
            .panels
            .iter()
            .flat_map(|p| p.metrics.iter().cloned())
            .collect();
        out.with("metrics.csv", |w| metrics::write_metrics_csv(&all, w))?;

        let pooled = self.each("citation summary", |p| pooled_citation_summary(&p.samples))?;
        let mut rows = Vec::new();
        for p in &self.panels {
            for s in &p.samples {
                rows.push((s.key().clone(), citation_summary(s)?));
            }
            if let Some((_, summary)) = pooled.iter().find(|(k, _)| *k == p.key) {
                rows.push((
                    SampleKey::new(&p.key.platform, &p.key.topic, "pooled"),
                    summary.clone(),
                ));
            }
        }
        out.with("table2_citation_summary.csv", |w| {
            metrics::write_summary_csv(&rows, w)
        })?;

        let sets: Vec<FrequentlyCitedSet> =
            self.panels.iter().filter_map(|p| p.fc.clone()).collect();
        out.with("fig06_appearance.csv", |w| {
            metrics::write_appearance_csv(&sets, w)
        })?;
        out.with("fig04_share_timeseries.csv", |w| self.write_timeseries(w))?;
        out.with("fig05_metric_correlation.csv", |w| {
            self.write_metric_correlation(w)
        })?;
        Ok(pooled)
    }

    fn write_timeseries(&self, out: &mut Vec<u8>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "platform",
            "topic",
            "job_index",
            "job_id",
            "domain",
            "count",
            "share",
            "prevalence",
        ])?;
        for p in &self.panels {
            let cited: BTreeSet<String> = p
                .metrics
                .iter()
                .flat_map(|m| {
                    m.per_domain
                        .values()
                        .filter(|d| d.count > 0)
                        .map(|d| d.domain.clone())
                })
                .collect();
            for d in p.top_by_mean_share(&cited, TOP_DOMAINS) {
                for (i, m) in p.metrics.iter().enumerate() {
                    w.write_record([
                        p.key.platform.as_str(),
                        &p.key.topic,
                        &i.to_string(),
                        &m.key.job_id,
                        &d,
                        &m.count(&d).to_string(),
                        &m.share(&d).to_string(),
                        &m.prevalence(&d).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Spearman correlation between count, share and prevalence, one point per
    /// cited domain per sample, pooled by platform.
    fn write_metric_correlation(&self, out: &mut Vec<u8>) -> Result<()> {
        let mut points: BTreeMap<&str, Vec<[f64; 3]>> = BTreeMap::new();
        for p in &self.panels {
            let entry = points.entry(p.key.platform.as_str()).or_default();
            for m in &p.metrics {
                entry.extend(
                    m.per_domain
                        .values()
                        .filter(|d| d.count > 0)
                        .map(|d| [d.count as f64, d.share, d.prevalence]),
                );
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["platform", "x", "y", "spearman_rho", "n_points"])?;
        let names = ["count", "share", "prevalence"];
        for (platform, pts) in &points {
            let ones = vec![1.0; pts.len()];
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let xs: Vec<f64> = pts.iter().map(|p| p[a]).collect();
                let ys: Vec<f64> = pts.iter().map(|p| p[b]).collect();
                let rho = weighted_rank_correlation(&xs, &ys, &ones)
                    .map(|r| r.to_string())
                    .unwrap_or_default();
                w.write_record([
                    platform,
                    names[a],
                    names[b],
                    rho.as_str(),
                    &pts.len().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn overlap_section(&self, out: &mut OutDir) -> Result<Vec<(PanelKey, OverlapSummary)>> {
        let results = self.each("overlap", |p| {
            let grouped = group_repeated_queries(&p.samples, false)?;
            Ok((
                all_pairs(&grouped),
                overlap_summary(&grouped)?,
                similarity_by_count(&grouped)?,
            ))
        })?;
        let pairs: Vec<_> = results
            .iter()
            .map(|(k, r)| (k.clone(), r.0.clone()))
            .collect();
        let summaries: Vec<OverlapSummary> = results.iter().map(|(_, r)| r.1.clone()).collect();
        let by_count: Vec<_> = results
            .iter()
            .map(|(k, r)| (k.platform.clone(), k.topic.clone(), r.2.clone()))
            .collect();
        out.with("overlap_pairs.csv", |w| overlap::write_pairs_csv(&pairs, w))?;
        out.with("fig01_jaccard_histogram.csv", |w| {
            overlap::write_histogram_csv(&summaries, w)
        })?;
        out.with("table4_overlap_summary.csv", |w| {
            overlap::write_summary_csv(&summaries, w)
        })?;
        out.with("fig02_similarity_by_count.csv", |w| {
            overlap::write_by_count_csv(&by_count, w)
        })?;
        Ok(results.into_iter().map(|(k, r)| (k, r.1)).collect())
    }

    pub fn ci_section(
        &self,
        out: &mut OutDir,
        cfg: BootstrapConfig,
        metrics: &[Metric],
    ) -> Result<()> {
        for &metric in metrics {
            let rows = self.each("bootstrap CI", |p| {
                let cis = bootstrap_all_domains(p.samples[0], metric, &p.focus_domains()?, cfg)?;
                let mut rows: Vec<CiRow> = cis
                    .into_values()
                    .map(|ci| {
                        let cross_sample_mean = (p.metrics.len() >= 2).then(|| {
                            let total: f64 = p
                                .metrics
                                .iter()
                                .map(|m| match metric {
                                    Metric::Share => m.share(&ci.domain),
                                    Metric::Prevalence => m.prevalence(&ci.domain),
                                })
                                .sum();
                            total / p.metrics.len() as f64
                        });
                        CiRow {
                            key: p.samples[0].key().clone(),
                            ci,
                            cross_sample_mean,
                        }
                    })
                    .collect();
                rows.sort_by(|a, b| {
                    b.ci.point
                        .total_cmp(&a.ci.point)
                        .then_with(|| a.ci.domain.cmp(&b.ci.domain))
                });
                Ok(rows)
            })?;
            let rows: Vec<CiRow> = rows.into_iter().flat_map(|(_, r)| r).collect();
            out.with(&format!("fig10_ci_{metric}.csv"), |w| {
                resample::write_ci_csv(&rows, w)
            })?;
        }
        Ok(())
    }

    pub fn convergence_section(
        &self,
        out: &mut OutDir,
        cfg: BootstrapConfig,
        widths: Widths,
        metrics: &[Metric],
    ) -> Result<Vec<(PanelKey, Vec<ConvergenceCurve>)>> {
        let curves = self.each("convergence", |p| {
            let domains = p.focus_domains()?;
            metrics
                .iter()
                .map(|&metric| {
                    let opts = ConvergenceOptions {
                        grid: None,
                        order: SubsampleOrder::Prefix,
                        target_width: Some(match metric {
                            Metric::Share => widths.share,
                            Metric::Prevalence => widths.prevalence,
                        }),
                        p_anchor: None,
                    };
                    convergence_curve(p.samples[0], metric, &domains, cfg, &opts)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let rows: Vec<(SampleKey, ConvergenceCurve)> = curves
            .iter()
            .flat_map(|(k, cs)| {
                let baseline = self.panel(k).samples[0].key().clone();
                cs.iter().map(move |c| (baseline.clone(), c.clone()))
            })
            .collect();
        out.with("fig11a_convergence.csv", |w| {
            resample::write_convergence_csv(&rows, w)
        })?;
        Ok(curves)
    }

    fn panel(&self, key: &PanelKey) -> &Panel<'a> {
        self.panels
            .iter()
            .find(|p| p.key == *key)
            .expect("panel from this context")
    }

    pub fn dispersion_section(
        &self,
        out: &mut OutDir,
    ) -> Result<Vec<(PanelKey, DispersionResult)>> {
        let results = self.each("dispersion", |p| {
            let records = panel_dispersion(&p.metrics, p.frequently_cited()?)?;
            let group = DispersionGroup {
                platform: p.key.platform.clone(),
                topic: Some(p.key.topic.clone()),
                records,
            };
            let fit = rank_share_table(&p.metrics[0])
                .and_then(|t| {
                    let head = t.rows.len().min(LOGLOG_HEAD);
                    loglog_fit(&t, 1..=head)
                })
                .ok();
            Ok((group, fit))
        })?;
        let groups: Vec<DispersionGroup> = results.iter().map(|(_, r)| r.0.clone()).collect();
        let mut summaries = dispersion_summary(&groups);
        summaries.extend(dispersion_summary(&by_platform(&groups)));
        out.with("fig09_dispersion.csv", |w| {
            dispersion::write_records_csv(&groups, w)
        })?;
        out.with("table5_dispersion_summary.csv", |w| {
            dispersion::write_summary_csv(&summaries, w)
        })?;

        let tables = self.each("rank-share table", |p| {
            p.metrics
                .iter()
                .map(rank_share_table)
                .collect::<Result<Vec<_>>>()
        })?;
        let sets: Vec<FrequentlyCitedSet> =
            self.panels.iter().filter_map(|p| p.fc.clone()).collect();
        let all: Vec<_> = tables.iter().flat_map(|(_, t)| t.iter().cloned()).collect();
        let baselines: Vec<_> = tables
            .iter()
            .filter_map(|(_, t)| t.first().cloned())
            .collect();
        out.with("fig07_rank_share.csv", |w| {
            dispersion::write_rank_tables_csv(&all, &sets, w)
        })?;
        out.with("fig08_rank_share_baseline.csv", |w| {
            dispersion::write_rank_tables_csv(&baselines, &sets, w)
        })?;
        Ok(results)
    }

    pub fn stability_section(
        &self,
        out: &mut OutDir,
        cfg: BootstrapConfig,
        thresholds: StabilityThresholds,
        drift: DriftParams,
    ) -> Result<Vec<(PanelKey, StabilitySeries)>> {
        let results = self.each("rank stability", |p| {
            let fc = p.frequently_cited()?;
            let mut series = rank_stability_series(&p.metrics, &fc.domains, cfg, thresholds)?;
            let last = p.metrics.last().expect("at least two samples");
            let flags = drift_test(&p.metrics[0], last, drift.alpha, drift.practical_delta)?;
            series.attach_span_drift(flags.iter().any(|f| f.flagged));
            Ok(series)
        })?;
        let series: Vec<StabilitySeries> = results.iter().map(|(_, s)| s.clone()).collect();
        out.with("fig11b_rank_stability.csv", |w| {
            stability::write_series_csv(&series, w)
        })?;
        out.with("table6_rank_stability.csv", |w| {
            stability::write_summary_csv(&series, w)
        })?;
        Ok(results)
    }

    pub fn drift_section(
        &self,
        out: &mut OutDir,
        drift: DriftParams,
    ) -> Result<Vec<(PanelKey, Vec<DriftFlag>)>> {
        let results = self.each("drift", |p| {
            drift_against_baseline(&p.metrics, drift.alpha, drift.practical_delta)
        })?;
        out.with("drift.csv", |w| driftwatch::write_drift_csv(&results, w))?;
        Ok(results)
    }

    pub fn content_section(
        &self,
        out: &mut OutDir,
        ledger: &ChecksumLedger,
        domains: &[String],
        top: usize,
    ) -> Result<Vec<(PanelKey, Vec<ContentStatus>)>> {
        let results = self.each("content status", |p| {
            let chosen = if domains.is_empty() {
                p.top_by_mean_share(&p.focus_domains()?, top)
            } else {
                domains.to_vec()
            };
            Ok(chosen
                .iter()
                .flat_map(|d| content_status(ledger, &p.samples, d))
                .collect::<Vec<_>>())
        })?;
        let mut rows = Vec::new();
        for (k, statuses) in &results {
            let p = self.panel(k);
            for s in statuses {
                let share = p
                    .metrics
                    .iter()
                    .find(|m| m.key.job_id == s.job_id)
                    .map_or(0.0, |m| m.share(&s.domain));
                rows.push((k.clone(), s.clone(), share));
            }
        }
        out.with("fig12_content_status.csv", |w| {
            driftwatch::write_status_csv(&rows, w)
        })?;
        Ok(results)
    }

    /// Runs every section and writes `report.json` last.
    pub fn report(
        &self,
        out: &mut OutDir,
        params: &ReportParams,
        ledger: Option<&ChecksumLedger>,
        inputs: &[InputDigest],
    ) -> Result<()> {
        let both = [Metric::Share, Metric::Prevalence];
        let pooled = self.metrics_section(out)?;
        let overlap = self.overlap_section(out)?;
        self.ci_section(out, params.boot, &both)?;
        let convergence = self.convergence_section(out, params.boot, params.widths, &both)?;
        let dispersion = self.dispersion_section(out)?;
        let stability =
            self.stability_section(out, params.boot, params.thresholds, params.drift)?;
        let drift = self.drift_section(out, params.drift)?;
        if ledger.is_none() {
            self.warnings
                .borrow_mut()
                .push("no checksum file: every content status is unknown".into());
        }
        let empty = ChecksumLedger::default();
        let content = self.content_section(
            out,
            ledger.unwrap_or(&empty),
            &params.content_domains,
            params.content_top,
        )?;

        fn find<'b, T>(v: &'b [(PanelKey, T)], k: &PanelKey) -> Option<&'b T> {
            v.iter().find(|(p, _)| p == k).map(|(_, t)| t)
        }
        let panels = self
            .panels
            .iter()
            .map(|p| {
                let k = &p.key;
                PanelReport {
                    platform: k.platform.clone(),
                    topic: k.topic.clone(),
                    jobs: p.samples.iter().map(|s| s.key().job_id.clone()).collect(),
                    n_responses: p.samples.iter().map(|s| s.n_responses()).sum(),
                    citations: find(&pooled, k).cloned(),
                    frequently_cited: p.fc.as_ref().map(FrequentlyCitedSet::len),
                    overlap: find(&overlap, k).map(|o| OverlapBrief {
                        n_queries: o.n_queries,
                        n_pairs: o.n_pairs,
                        median_jaccard: o.median_jaccard,
                        identical_rate: o.identical_rate,
                        zero_overlap_rate: o.zero_overlap_rate,
                        mean_intersection: o.mean_intersection,
                        mean_unique_domains: o.mean_unique_domains,
                    }),
                    dispersion: find(&dispersion, k)
                        .and_then(|(g, _)| dispersion_summary(std::slice::from_ref(g)).pop()),
                    loglog_fit: find(&dispersion, k).and_then(|(_, f)| *f),
                    convergence: find(&convergence, k)
                        .map(|cs| cs.iter().map(ConvergenceBrief::from).collect())
                        .unwrap_or_default(),
                    stability: find(&stability, k).map(StabilityBrief::from),
                    drift: find(&drift, k).map(|flags| DriftBrief {
                        tests: flags.len(),
                        flagged: flags.iter().filter(|f| f.flagged).count(),
                        low_count: flags.iter().filter(|f| f.low_count).count(),
                    }),
                    content: find(&content, k).map(|statuses| {
                        let mut counts = BTreeMap::new();
                        for s in statuses {
                            *counts.entry(s.status).or_insert(0usize) += 1;
                        }
                        counts
                    }),
                }
            })
            .collect();

        let mut files = out.written.clone();
        files.push("report.json".into());
        files.sort();
        let report = Report {
            schema: REPORT_SCHEMA,
            provenance: ReportProvenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                seed: params.boot.seed,
                inputs,
            },
            parameters: ReportParameters {
                replicates: params.boot.replicates,
                alpha: params.boot.alpha,
                target_width_share: params.widths.share,
                target_width_prevalence: params.widths.prevalence,
                sufficiency: params.thresholds.sufficiency,
                stability: params.thresholds.stability,
                drift_alpha: params.drift.alpha,
                practical_delta: params.drift.practical_delta,
                min_fraction: params.min_fraction,
            },
            panels,
            warnings: self.warnings.borrow().clone(),
            files,
        };
        out.json("report.json", &report)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    provenance: ReportProvenance<'a>,
    parameters: ReportParameters,
    panels: Vec<PanelReport>,
    warnings: Vec<String>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ReportProvenance<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    inputs: &'a [InputDigest],
}

#[derive(Serialize)]
struct ReportParameters {
    replicates: usize,
    alpha: f64,
    target_width_share: f64,
    target_width_prevalence: f64,
    sufficiency: f64,
    stability: f64,
    drift_alpha: f64,
    practical_delta: f64,
    min_fraction: f64,
}

#[derive(Serialize)]
struct PanelReport {
    platform: String,
    topic: String,
    jobs: Vec<String>,
    n_responses: usize,
    citations: Option<CitationSummary>,
    frequently_cited: Option<usize>,
    overlap: Option<OverlapBrief>,
    dispersion: Option<dispersion::DispersionSummary>,
    loglog_fit: Option<LogLogFit>,
    convergence: Vec<ConvergenceBrief>,
    stability: Option<StabilityBrief>,
    drift: Option<DriftBrief>,
    content: Option<BTreeMap<Status, usize>>,
}

#[derive(Serialize)]
struct OverlapBrief {
    n_queries: usize,
    n_pairs: usize,
    median_jaccard: f64,
    identical_rate: f64,
    zero_overlap_rate: f64,
    mean_intersection: f64,
    mean_unique_domains: f64,
}

#[derive(Serialize)]
struct ConvergenceBrief {
    metric: Metric,
    target_width: f64,
    p_anchor: f64,
    crossing_n: Option<usize>,
    final_n: Option<usize>,
    final_max_width: Option<f64>,
}

impl From<&ConvergenceCurve> for ConvergenceBrief {
    fn from(c: &ConvergenceCurve) -> Self {
        let last = c.points.last();
        Self {
            metric: c.metric,
            target_width: c.target_width,
            p_anchor: c.p_anchor,
            crossing_n: c.crossing_n,
            final_n: last.map(|p| p.n),
            final_max_width: last.map(|p| p.max_ci_width),
        }
    }
}

#[derive(Serialize)]
struct StabilityBrief {
    pairs: usize,
    sufficient: usize,
    stable: usize,
    mean_rho: Option<f64>,
    mean_ci_width: Option<f64>,
    span_rho: f64,
    span_ci_lower: f64,
    span_ci_upper: f64,
    span_sufficient: bool,
    span_drift: Option<bool>,
}

impl From<&StabilitySeries> for StabilityBrief {
    fn from(s: &StabilitySeries) -> Self {
        Self {
            pairs: s.pairs.len(),
            sufficient: s.n_sufficient,
            stable: s.n_stable,
            mean_rho: s.mean_rho,
            mean_ci_width: s.mean_ci_width,
            span_rho: s.span.rho,
            span_ci_lower: s.span.ci_lower,
            span_ci_upper: s.span.ci_upper,
            span_sufficient: s.span.sufficient,
            span_drift: s.span_drift,
        }
    }
}

#[derive(Serialize)]
struct DriftBrief {
    tests: usize,
    flagged: usize,
    low_count: usize,
}
