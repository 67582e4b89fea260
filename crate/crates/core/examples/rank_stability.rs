//! Weighted Spearman rank stability across nine jobs, for a stationary engine
//! and for one whose top two domains swap at the fifth job.
//!
//! cargo run --release --example rank_stability

use citevis::metrics::{classify_frequently_cited, compute_sample_metrics};
use citevis::resample::BootstrapConfig;
use citevis::stability::rank_stability_series;
use citevis::synth::{generate, CitationCount, DriftAction, DriftEvent, DriftPoint, SynthConfig};

fn main() -> citevis::Result<()> {
    for swap in [false, true] {
        let mut cfg = SynthConfig {
            n_domains: 8,
            zipf_s: 2.0,
            citations_per_response: CitationCount::Fixed(4),
            ..Default::default()
        };
        if swap {
            cfg.drift.push(DriftEvent {
                at: DriftPoint::Job(4),
                action: DriftAction::SwapRanks(1, 2),
            });
        }
        let (dataset, _) = generate(&cfg)?;
        let panel = dataset.panels().remove(0);
        let samples = dataset.panel_samples(&panel);
        let metrics: Vec<_> = samples
            .iter()
            .map(|s| compute_sample_metrics(s))
            .collect::<Result<_, _>>()?;
        let fc = classify_frequently_cited(&samples, 1.0)?;
        let series = rank_stability_series(
            &metrics,
            &fc.domains,
            BootstrapConfig::new(1000, 0.05, 3),
            Default::default(),
        )?;

        println!(
            "\n{}",
            if swap {
                "top-2 swap at job005"
            } else {
                "stationary"
            }
        );
        for p in &series.pairs {
            println!(
                "  {} -> {}  rho {:.3} [{:.3}, {:.3}]  sufficient {:<5} stable {}",
                p.sample_a.job_id,
                p.sample_b.job_id,
                p.rho,
                p.ci_lower,
                p.ci_upper,
                p.sufficient,
                p.stable
            );
        }
        println!(
            "  span {} -> {}  rho {:.3};  mean consecutive rho {:?}, {} of {} stable",
            series.span.sample_a.job_id,
            series.span.sample_b.job_id,
            series.span.rho,
            series.mean_rho.map(|r| (r * 1000.0).round() / 1000.0),
            series.n_stable,
            series.pairs.len()
        );
    }
    Ok(())
}
