//! Percentile-bootstrap intervals for the top domains of one sample, compared
//! with the cross-sample mean of the other jobs.
//!
//! cargo run --release --example bootstrap_ci

use std::collections::BTreeSet;

use citevis::metrics::compute_sample_metrics;
use citevis::resample::{bootstrap_all_domains, BootstrapConfig, Metric};
use citevis::synth::{generate, preset_config, Preset};

fn main() -> citevis::Result<()> {
    let (dataset, truth) = generate(&preset_config(Preset::GeminiLike))?;
    let panel = dataset.panels().remove(0);
    let samples = dataset.panel_samples(&panel);
    let baseline = compute_sample_metrics(samples[0])?;

    let mut ranked: Vec<_> = baseline.per_domain.values().collect();
    ranked.sort_by(|a, b| b.share.total_cmp(&a.share));
    let top: BTreeSet<String> = ranked.iter().take(8).map(|d| d.domain.clone()).collect();

    let all: Vec<_> = samples
        .iter()
        .map(|s| compute_sample_metrics(s))
        .collect::<Result<_, _>>()?;
    let cfg = BootstrapConfig::new(1000, 0.05, 42);
    for metric in [Metric::Share, Metric::Prevalence] {
        println!("\n{metric:?}");
        let cis = bootstrap_all_domains(samples[0], metric, &top, cfg)?;
        let mut rows: Vec<_> = cis.values().collect();
        rows.sort_by(|a, b| b.point.total_cmp(&a.point));
        for ci in rows {
            let value = |m: &citevis::metrics::SampleMetrics| match metric {
                Metric::Share => m.share(&ci.domain),
                Metric::Prevalence => m.prevalence(&ci.domain),
            };
            let cross = all.iter().map(value).sum::<f64>() / all.len() as f64;
            let mark = if (ci.lower..=ci.upper).contains(&cross) {
                ' '
            } else {
                '*'
            };
            print!(
                "  {:<15} {:.4} [{:.4}, {:.4}] width {:.4}  cross-sample {:.4}{mark}",
                ci.domain, ci.point, ci.lower, ci.upper, ci.width, cross
            );
            if metric == Metric::Share {
                print!("  truth {:.4}", truth.share(&ci.domain));
            }
            println!();
        }
    }
    println!("\n* cross-sample mean outside the single-sample interval");
    Ok(())
}
