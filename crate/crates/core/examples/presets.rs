//! Generates each calibration preset and prints its citation and overlap profile.
//!
//! cargo run --release --example presets

use citevis::corpus::group_repeated_queries;
use citevis::metrics::pooled_citation_summary;
use citevis::overlap::overlap_summary;
use citevis::synth::{generate, preset};

fn main() -> citevis::Result<()> {
    println!(
        "{:<16} {:>8} {:>8} {:>8} {:>10} {:>10}",
        "preset", "p25", "median", "p75", "jaccard", "identical"
    );
    for name in ["gemini-like", "searchgpt-like", "perplexity-like"] {
        let (dataset, _) = generate(&preset(name)?)?;
        let panel = dataset.panels().remove(0);
        let samples = dataset.panel_samples(&panel);
        let counts = pooled_citation_summary(&samples)?;
        let overlap = overlap_summary(&group_repeated_queries(&samples, false)?)?;
        println!(
            "{:<16} {:>8.1} {:>8.1} {:>8.1} {:>10.3} {:>10.3}",
            name,
            counts.p25,
            counts.median,
            counts.p75,
            overlap.median_jaccard,
            overlap.identical_rate
        );
    }
    Ok(())
}
