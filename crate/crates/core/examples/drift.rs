//! Chi-squared share drift against a baseline job, and page-checksum content
//! status for the most cited domains.
//!
//! cargo run --example drift

use citevis::driftwatch::{content_status, drift_against_baseline};
use citevis::metrics::compute_sample_metrics;
use citevis::synth::{
    domain_name, generate, synth_checksums, ChecksumPlan, CitationCount, DriftAction, DriftEvent,
    DriftPoint, SynthConfig,
};

fn main() -> citevis::Result<()> {
    let cfg = SynthConfig {
        n_domains: 300,
        citations_per_response: CitationCount::Fixed(6),
        n_samples: 4,
        drift: vec![DriftEvent {
            at: DriftPoint::Job(2),
            action: DriftAction::ShiftShare {
                rank: 3,
                delta: 0.05,
            },
        }],
        ..Default::default()
    };
    let (dataset, _) = generate(&cfg)?;
    let panel = dataset.panels().remove(0);
    let samples = dataset.panel_samples(&panel);
    let metrics: Vec<_> = samples
        .iter()
        .map(|s| compute_sample_metrics(s))
        .collect::<Result<_, _>>()?;

    println!("flagged shifts (alpha 0.05, practical 0.02):");
    for f in drift_against_baseline(&metrics, 0.05, 0.02)? {
        if f.flagged {
            println!(
                "  {} -> {}  {:<14} {:.4} -> {:.4}  chi2 {:.1}  p {:.2e}",
                f.baseline_job,
                f.current_job,
                f.domain,
                f.share_baseline,
                f.share_current,
                f.chi_squared,
                f.p_value
            );
        }
    }

    // Rank 2 pages change at the third job; rank 5 pages change every job.
    let plan = ChecksumPlan {
        changes: vec![(2, 2)],
        volatile_ranks: vec![5],
    };
    let ledger = synth_checksums(&dataset, &plan)?;
    println!("\ncontent status ({} ledger entries):", ledger.len());
    for rank in 1..=5 {
        let row: Vec<String> = content_status(&ledger, &samples, &domain_name(rank))
            .into_iter()
            .map(|s| s.status.to_string())
            .collect();
        println!("  {:<14} {}", domain_name(rank), row.join(" "));
    }
    Ok(())
}
