//! CI width against sample size, for a stationary engine and for one whose
//! top domain shifts halfway through the query list.
//!
//! cargo run --release --example convergence

use std::collections::BTreeSet;

use citevis::resample::{convergence_curve, BootstrapConfig, ConvergenceOptions, Metric};
use citevis::synth::{
    domain_name, generate, preset_config, DriftAction, DriftEvent, DriftPoint, Preset,
};

fn main() -> citevis::Result<()> {
    let domains: BTreeSet<String> = (1..=10).map(domain_name).collect();
    for shifted in [false, true] {
        let mut cfg = preset_config(Preset::SearchGptLike);
        cfg.n_samples = 1;
        cfg.deterministic_fraction = 0.0;
        cfg.drift.clear();
        if shifted {
            cfg.drift.push(DriftEvent {
                at: DriftPoint::Query(100),
                action: DriftAction::ShiftShare {
                    rank: 1,
                    delta: 0.3,
                },
            });
        }
        let (dataset, _) = generate(&cfg)?;
        let sample = dataset.samples().next().expect("one sample");
        let curve = convergence_curve(
            sample,
            Metric::Share,
            &domains,
            BootstrapConfig::new(1000, 0.05, 7),
            &ConvergenceOptions::default(),
        )?;
        println!(
            "\n{} (target width {:.2}, first crossing at {:?})",
            if shifted {
                "shift at query 100"
            } else {
                "stationary"
            },
            curve.target_width,
            curve.crossing_n
        );
        println!("{:>5} {:>9} {:>9}", "n", "max width", "1/sqrt(n)");
        for p in curve.points.iter().step_by(2) {
            println!(
                "{:>5} {:>9.4} {:>9.4}",
                p.n, p.max_ci_width, p.reference_width
            );
        }
    }
    Ok(())
}
