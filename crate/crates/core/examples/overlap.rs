//! Jaccard similarity between repeated runs of the same query.
//!
//! cargo run --example overlap

use citevis::corpus::group_repeated_queries;
use citevis::overlap::{overlap_summary, similarity_by_count};
use citevis::synth::{generate, preset_config, Preset};

fn main() -> citevis::Result<()> {
    for which in [
        Preset::GeminiLike,
        Preset::SearchGptLike,
        Preset::PerplexityLike,
    ] {
        let (dataset, _) = generate(&preset_config(which))?;
        let panel = dataset.panels().remove(0);
        let samples = dataset.panel_samples(&panel);
        let grouped = group_repeated_queries(&samples, false)?;
        let s = overlap_summary(&grouped)?;
        println!(
            "{:<12} pairs {:>5}  median J {:.2}  identical {:.3}  disjoint {:.3}  mean shared {:.2} of {:.2}",
            s.platform,
            s.n_pairs,
            s.median_jaccard,
            s.identical_rate,
            s.zero_overlap_rate,
            s.mean_intersection,
            s.mean_unique_domains
        );
        // Bars of the Jaccard histogram, one char per 2% of pairs.
        let bars: String = s
            .histogram
            .counts
            .iter()
            .map(|&c| {
                let frac = c as f64 / s.n_pairs as f64;
                [' ', '.', ':', '|', '#'][((frac * 50.0) as usize).min(4)]
            })
            .collect();
        println!("             [{bars}]");
        for bin in similarity_by_count(&grouped)?.bins.iter().take(4) {
            println!(
                "             {} citations: {} pairs, median J {:.2} (IQR {:.2}-{:.2})",
                bin.modal_citation_count, bin.pair_count, bin.median_jaccard, bin.p25, bin.p75
            );
        }
    }
    Ok(())
}
