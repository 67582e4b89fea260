use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use proptest::prelude::*;

use citevis::corpus::{
    extract_domain, group_repeated_queries, parse_dataset, write_jsonl, CitationRef, Dataset,
    ResponseRecord, Sample, SampleKey,
};
use citevis::dispersion::{log_std, loglog_fit, rank_share_table};
use citevis::driftwatch::drift_test;
use citevis::metrics::{classify_frequently_cited, compute_sample_metrics};
use citevis::overlap::{jaccard, overlap_summary};
use citevis::resample::{bootstrap_replicates, BootstrapConfig, Metric};
use citevis::stability::{
    rank_stability_pair, rank_stability_series, weighted_spearman, StabilityThresholds,
};
use citevis::synth::{generate, preset_config, zipf_shares, CitationCount, Preset, SynthConfig};

const DOMAINS: [&str; 6] = [
    "alpha.com",
    "beta.org",
    "gamma.co.uk",
    "delta.net",
    "eps.io",
    "zeta.de",
];

fn response(job: &str, query: usize, cites: &[usize]) -> ResponseRecord {
    ResponseRecord {
        platform: "p".into(),
        topic: "t".into(),
        job_id: job.into(),
        timestamp: DateTime::<Utc>::from_timestamp(1_770_000_000 + query as i64, 0).unwrap(),
        query_id: format!("q{query:03}"),
        query_text: format!("query {query}"),
        response_id: format!("{job}-{query}"),
        citations: cites
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                CitationRef::from_url(format!("https://www.{}/a/{i}", DOMAINS[d])).unwrap()
            })
            .collect(),
    }
}

fn sample(job: &str, responses: &[Vec<usize>]) -> Sample {
    let recs = responses
        .iter()
        .enumerate()
        .map(|(q, c)| response(job, q, c))
        .collect();
    Sample::new(SampleKey::new("p", "t", job), recs).unwrap()
}

fn responses_strategy(max_responses: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(
        prop::collection::vec(0..DOMAINS.len(), 0..6),
        1..max_responses,
    )
}

/// Several samples over the same query list (equal response counts).
fn panel_strategy() -> impl Strategy<Value = Vec<Vec<Vec<usize>>>> {
    (2usize..5, 2usize..12).prop_flat_map(|(k, q)| {
        prop::collection::vec(
            prop::collection::vec(prop::collection::vec(0..DOMAINS.len(), 0..6), q),
            k,
        )
    })
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

proptest! {
    #[test]
    fn domain_extraction_ignores_host_case(
        sub in "[a-z]{1,8}",
        name in "[a-z]{2,10}",
        tld in prop::sample::select(vec!["com", "org", "co.uk", "de", "com.au"]),
        upper in any::<u64>(),
    ) {
        let host = format!("{sub}.{name}.{tld}");
        let mixed: String = host
            .chars()
            .enumerate()
            .map(|(i, c)| if upper >> (i % 64) & 1 == 1 { c.to_ascii_uppercase() } else { c })
            .collect();
        let a = extract_domain(&format!("https://{host}/x")).unwrap();
        let b = extract_domain(&format!("https://{mixed}/x")).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a, format!("{name}.{tld}"));
    }

    #[test]
    fn jsonl_round_trip(panel in panel_strategy()) {
        let samples: Vec<Sample> = panel
            .iter()
            .enumerate()
            .map(|(j, r)| sample(&format!("j{j}"), r))
            .collect();
        let ds = Dataset::from_samples(samples).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&ds, &mut buf).unwrap();
        let parsed = parse_dataset(buf.as_slice(), "mem").unwrap();
        prop_assert!(parsed.rejected.is_empty());
        prop_assert_eq!(parsed.accepted, ds.n_responses());
        let total: usize = parsed.dataset.samples().map(Sample::n_responses).sum();
        prop_assert_eq!(total, parsed.accepted);
        let again: Vec<&Sample> = parsed.dataset.samples().collect();
        let orig: Vec<&Sample> = ds.samples().collect();
        prop_assert_eq!(again, orig);
    }

    #[test]
    fn share_and_prevalence_invariants(rs in responses_strategy(30)) {
        let s = sample("j", &rs);
        let m = compute_sample_metrics(&s).unwrap();
        if m.total_citations > 0 {
            let total: f64 = m.per_domain.values().map(|d| d.share).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
        for d in m.per_domain.values() {
            prop_assert!((0.0..=1.0).contains(&d.prevalence));
            let k = d.prevalence * m.n_responses as f64;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!(d.responses_citing <= d.count);
        }
        // Ordering by count and by share agree.
        let mut by_count: Vec<_> = m.per_domain.values().collect();
        by_count.sort_by(|a, b| b.count.cmp(&a.count).then(a.domain.cmp(&b.domain)));
        let mut by_share: Vec<_> = m.per_domain.values().collect();
        by_share.sort_by(|a, b| b.share.total_cmp(&a.share).then(a.domain.cmp(&b.domain)));
        prop_assert_eq!(by_count, by_share);
    }

    #[test]
    fn frequently_cited_set_never_grows(panel in panel_strategy(), extra in responses_strategy(8)) {
        let mut samples: Vec<Sample> = panel
            .iter()
            .enumerate()
            .map(|(j, r)| sample(&format!("j{j}"), r))
            .collect();
        let refs: Vec<&Sample> = samples.iter().collect();
        let before = classify_frequently_cited(&refs, 1.0).unwrap().domains;
        samples.push(sample("jx", &extra));
        let refs: Vec<&Sample> = samples.iter().collect();
        let after = classify_frequently_cited(&refs, 1.0).unwrap().domains;
        prop_assert!(after.is_subset(&before));
    }

    #[test]
    fn jaccard_properties(a in prop::collection::vec(0..8usize, 0..8), b in prop::collection::vec(0..8usize, 0..8)) {
        let (sa, sb) = (set(&a), set(&b));
        let j = jaccard(&sa, &sb);
        prop_assert_eq!(j, jaccard(&sb, &sa));
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j == 1.0, sa == sb);
        if !(sa.is_empty() && sb.is_empty()) {
            prop_assert_eq!(j == 0.0, sa.is_disjoint(&sb));
        }
    }

    #[test]
    fn overlap_pair_count(panel in panel_strategy()) {
        let samples: Vec<Sample> = panel
            .iter()
            .enumerate()
            .map(|(j, r)| sample(&format!("j{j}"), r))
            .collect();
        let refs: Vec<&Sample> = samples.iter().collect();
        let grouped = group_repeated_queries(&refs, false).unwrap();
        let s = overlap_summary(&grouped).unwrap();
        let (k, q) = (panel.len(), panel[0].len());
        prop_assert_eq!(s.n_queries, q);
        prop_assert_eq!(s.n_pairs, q * k * (k - 1) / 2);
        prop_assert!(s.identical_rate + s.zero_overlap_rate <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bootstrap_deterministic_and_nested(rs in responses_strategy(40), seed in any::<u64>()) {
        prop_assume!(rs.len() >= 2);
        let s = sample("j", &rs);
        let domains: BTreeSet<String> = DOMAINS.iter().map(|d| d.to_string()).collect();
        let a = bootstrap_replicates(&s, Metric::Share, &domains, 300, seed);
        let b = bootstrap_replicates(&s, Metric::Share, &domains, 300, seed);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.values, &b.values);
                let wide = a.intervals(0.05);
                let narrow = a.intervals(0.10);
                for (d, w) in &wide {
                    let n = &narrow[d];
                    prop_assert!(w.lower <= n.lower && n.upper <= w.upper);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "determinism broken"),
        }
    }

    #[test]
    fn log_std_scale_and_order_invariant(
        shares in prop::collection::vec(0.001f64..0.9, 2..10),
        c in 0.01f64..50.0,
        rot in 0usize..10,
    ) {
        let base = log_std("d", &shares).unwrap();
        let scaled: Vec<f64> = shares.iter().map(|s| s * c).collect();
        let mut rotated = shares.clone();
        rotated.rotate_left(rot % shares.len());
        prop_assert!((log_std("d", &scaled).unwrap().log_std - base.log_std).abs() < 1e-9);
        prop_assert!((log_std("d", &rotated).unwrap().log_std - base.log_std).abs() < 1e-9);
    }

    #[test]
    fn rank_table_is_a_permutation(rs in responses_strategy(30)) {
        let s = sample("j", &rs);
        let m = compute_sample_metrics(&s).unwrap();
        prop_assume!(m.total_citations > 0);
        let t = rank_share_table(&m).unwrap();
        let listed: BTreeSet<&str> = t.rows.iter().map(|r| r.domain.as_str()).collect();
        let expected: BTreeSet<&str> = m.per_domain.keys().map(String::as_str).collect();
        prop_assert_eq!(listed.len(), t.rows.len());
        prop_assert_eq!(listed, expected);
        for (i, r) in t.rows.iter().enumerate() {
            prop_assert_eq!(r.rank, i + 1);
        }
        prop_assert!(t.rows.windows(2).all(|w| w[0].share >= w[1].share));
    }

    #[test]
    fn spearman_symmetric_and_stable_implies_sufficient(
        a in responses_strategy(25),
        b in responses_strategy(25),
        suff in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let ma = compute_sample_metrics(&sample("a", &a)).unwrap();
        let mb = compute_sample_metrics(&sample("b", &b)).unwrap();
        let domains: BTreeSet<String> = ma
            .per_domain
            .keys()
            .chain(mb.per_domain.keys())
            .cloned()
            .collect();
        prop_assume!(domains.len() >= 3);
        let names: Vec<String> = domains.iter().cloned().collect();
        let weights: BTreeMap<String, f64> = names
            .iter()
            .map(|d| (d.clone(), (ma.share(d) + mb.share(d)) / 2.0))
            .collect();
        let ab = weighted_spearman(&ma.shares(), &mb.shares(), &names, &weights);
        let ba = weighted_spearman(&mb.shares(), &ma.shares(), &names, &weights);
        match (ab, ba) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "asymmetric definedness"),
        }
        let thresholds = StabilityThresholds { sufficiency: suff, stability: 0.0 };
        if let Ok(r) = rank_stability_pair(&ma, &mb, &domains, BootstrapConfig::new(100, 0.05, seed), thresholds) {
            prop_assert!(!r.stable || r.sufficient);
            prop_assert_eq!(r.sufficient, r.ci_width <= suff);
        }
    }

    #[test]
    fn drift_flags_need_both_significances(
        a in responses_strategy(40),
        b in responses_strategy(40),
        alpha in 0.001f64..0.5,
        practical in 0.0f64..0.3,
    ) {
        let ma = compute_sample_metrics(&sample("a", &a)).unwrap();
        let mb = compute_sample_metrics(&sample("b", &b)).unwrap();
        prop_assume!(ma.total_citations > 0 && mb.total_citations > 0);
        for f in drift_test(&ma, &mb, alpha, practical).unwrap() {
            prop_assert_eq!(f.flagged, f.p_value < alpha && f.share_delta.abs() > practical);
        }
        // Raising either threshold can only remove flags.
        let loose = drift_test(&ma, &mb, alpha, practical).unwrap();
        let strict = drift_test(&ma, &mb, alpha / 2.0, practical + 0.05).unwrap();
        for (l, s) in loose.iter().zip(&strict) {
            prop_assert!(l.flagged || !s.flagged);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn synth_is_deterministic(seed in any::<u64>(), consistency in 0.0f64..1.0) {
        let cfg = SynthConfig {
            n_domains: 50,
            n_queries: 30,
            n_samples: 3,
            consistency,
            seed,
            ..Default::default()
        };
        let dump = |cfg: &SynthConfig| {
            let (ds, _) = generate(cfg).unwrap();
            let mut buf = Vec::new();
            write_jsonl(&ds, &mut buf).unwrap();
            buf
        };
        prop_assert_eq!(dump(&cfg), dump(&cfg));
    }
}

#[test]
fn series_is_deterministic() {
    let cfg = SynthConfig {
        n_domains: 30,
        n_queries: 60,
        n_samples: 4,
        ..Default::default()
    };
    let (ds, _) = generate(&cfg).unwrap();
    let panel = ds.panels().remove(0);
    let samples = ds.panel_samples(&panel);
    let metrics: Vec<_> = samples
        .iter()
        .map(|s| compute_sample_metrics(s).unwrap())
        .collect();
    let fc = classify_frequently_cited(&samples, 1.0).unwrap();
    let run = || {
        rank_stability_series(
            &metrics,
            &fc.domains,
            BootstrapConfig::new(200, 0.05, 9),
            Default::default(),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn pooled_shares_converge_to_truth() {
    let plain = SynthConfig {
        n_domains: 100,
        zipf_s: 1.1,
        citations_per_response: CitationCount::Fixed(10),
        n_queries: 1000,
        n_samples: 6,
        ..Default::default()
    };
    let mut concentrated = preset_config(Preset::PerplexityLike);
    concentrated.n_queries = 400;
    concentrated.n_samples = 8;
    for cfg in [plain, concentrated] {
        check_pooled_shares(&cfg);
    }
}

fn check_pooled_shares(cfg: &SynthConfig) {
    let (ds, truth) = generate(cfg).unwrap();
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut total = 0.0;
    for s in ds.samples() {
        let m = compute_sample_metrics(s).unwrap();
        total += m.total_citations as f64;
        for (d, dm) in &m.per_domain {
            *counts.entry(d.clone()).or_default() += dm.count as f64;
        }
    }
    assert!(total >= 50_000.0);
    for (d, p) in &truth.true_share {
        let got = counts.get(d).copied().unwrap_or(0.0) / total;
        assert!((got - p).abs() <= 0.02, "{d}: {got} vs {p}");
    }
}

#[test]
fn head_follows_zipf_slope() {
    for s in [0.8, 1.1, 1.5] {
        let cfg = SynthConfig {
            n_domains: 400,
            zipf_s: s,
            citations_per_response: CitationCount::Fixed(5),
            n_queries: 20_000,
            n_samples: 1,
            ..Default::default()
        };
        let (ds, _) = generate(&cfg).unwrap();
        let m = compute_sample_metrics(ds.samples().next().unwrap()).unwrap();
        let fit = loglog_fit(&rank_share_table(&m).unwrap(), 1..=50).unwrap();
        assert!((fit.slope + s).abs() <= 0.15, "s={s}: slope {}", fit.slope);
    }
}

#[test]
fn jaccard_rises_with_consistency() {
    let mut last = -1.0;
    for c in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let cfg = SynthConfig {
            n_domains: 200,
            consistency: c,
            n_queries: 150,
            n_samples: 4,
            ..Default::default()
        };
        let (ds, _) = generate(&cfg).unwrap();
        let panel = ds.panels().remove(0);
        let samples = ds.panel_samples(&panel);
        let grouped = group_repeated_queries(&samples, false).unwrap();
        let med = overlap_summary(&grouped).unwrap().median_jaccard;
        assert!(med >= last, "consistency {c}: median {med} < {last}");
        last = med;
    }
}

#[test]
fn zipf_shares_sum_to_one() {
    for n in [1, 10, 1000] {
        let s: f64 = zipf_shares(n, 1.2).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
