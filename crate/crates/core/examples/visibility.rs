//! Count, share and prevalence per domain, plus citation-count summaries and
//! the frequently-cited set of a synthetic panel.
//!
//! cargo run --example visibility

use citevis::metrics::{citation_summary, classify_frequently_cited, compute_sample_metrics};
use citevis::synth::{generate, preset_config, Preset};

fn main() -> citevis::Result<()> {
    let mut cfg = preset_config(Preset::PerplexityLike);
    cfg.n_samples = 4;
    let (dataset, truth) = generate(&cfg)?;
    let panel = dataset.panels().remove(0);
    let samples = dataset.panel_samples(&panel);

    let first = compute_sample_metrics(samples[0])?;
    println!(
        "{}: {} responses, {} citations",
        first.key.job_id, first.n_responses, first.total_citations
    );
    let mut top: Vec<_> = first.per_domain.values().collect();
    top.sort_by_key(|d| std::cmp::Reverse(d.count));
    println!(
        "{:<16} {:>6} {:>8} {:>10} {:>8}",
        "domain", "count", "share", "prevalence", "truth"
    );
    for d in top.iter().take(8) {
        println!(
            "{:<16} {:>6} {:>8.4} {:>10.3} {:>8.4}",
            d.domain,
            d.count,
            d.share,
            d.prevalence,
            truth.share(&d.domain)
        );
    }

    let c = citation_summary(samples[0])?;
    println!(
        "\ncitations per response: mean {:.1}, median {}, p25 {}, p75 {}, max {}",
        c.mean, c.median, c.p25, c.p75, c.max
    );

    let fc = classify_frequently_cited(&samples, 1.0)?;
    println!(
        "{} domains appear in all {} samples; appearance histogram {:?}",
        fc.len(),
        fc.n_samples,
        fc.appearance_histogram
    );
    Ok(())
}
