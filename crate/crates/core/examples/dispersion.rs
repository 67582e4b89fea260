//! Log-space dispersion of frequently cited domains and the power-law shape
//! of the ranked share distribution.
//!
//! cargo run --example dispersion

use citevis::dispersion::{
    dispersion_summary, loglog_fit, panel_dispersion, rank_share_table, DispersionGroup,
};
use citevis::metrics::{classify_frequently_cited, compute_sample_metrics};
use citevis::synth::{generate, preset_config, Preset};

fn main() -> citevis::Result<()> {
    let mut groups = Vec::new();
    for which in [
        Preset::GeminiLike,
        Preset::SearchGptLike,
        Preset::PerplexityLike,
    ] {
        let cfg = preset_config(which);
        let (dataset, _) = generate(&cfg)?;
        let panel = dataset.panels().remove(0);
        let samples = dataset.panel_samples(&panel);
        let metrics: Vec<_> = samples
            .iter()
            .map(|s| compute_sample_metrics(s))
            .collect::<Result<_, _>>()?;
        let fc = classify_frequently_cited(&samples, 1.0)?;

        let table = rank_share_table(&metrics[0])?;
        let fit = loglog_fit(&table, 1..=table.rows.len().min(50))?;
        println!(
            "{:<11} zipf s {:.1}: fitted slope {:.2} (r2 {:.2}) over the top {} ranks",
            panel.platform,
            cfg.zipf_s,
            fit.slope,
            fit.r_squared,
            table.rows.len().min(50)
        );
        let records = panel_dispersion(&metrics, &fc)?;
        if let Some(widest) = records
            .iter()
            .max_by(|a, b| a.log_std.total_cmp(&b.log_std))
        {
            println!(
                "            most volatile: {} (geometric mean {:.4}, log-std {:.2}, x{:.2} fold)",
                widest.domain, widest.geometric_mean_share, widest.log_std, widest.fold_factor
            );
        }
        groups.push(DispersionGroup {
            platform: panel.platform.clone(),
            topic: Some(panel.topic.clone()),
            records,
        });
    }
    println!();
    println!(
        "{:<11} {:>8} {:>10} {:>12}",
        "platform", "domains", "mean sd", "median sd"
    );
    for s in dispersion_summary(&groups) {
        println!(
            "{:<11} {:>8} {:>10.3} {:>12.3}",
            s.platform, s.n_domains, s.mean_log_std, s.median_log_std
        );
    }
    Ok(())
}
