//! Empirical coverage of the QQ and ME bands on Pareto data.
//!
//! Usage: `cargo run --release --example coverage -- [qq|me|both] [replications]`

use std::time::Instant;

use tailband::bands::{coverage_experiment, DistSpec, McSettings, PlotChoice};
use tailband::plotsets::PlotConfig;
use tailband::RngStream;

fn main() -> tailband::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map(String::as_str).unwrap_or("both");
    let reps = args.get(1).and_then(|s| s.parse().ok());

    if which != "me" {
        let t = Instant::now();
        let cfg = PlotConfig::new(500, 0.05, 0.05)?;
        let r = coverage_experiment(
            &DistSpec::Pareto { xi: 0.25 },
            5000,
            &cfg,
            PlotChoice::Qq,
            reps.unwrap_or(500),
            RngStream::new(20, 0),
            McSettings::default(),
        )?;
        println!("QQ band, Pareto xi=0.25, n=5000, k=500, eps=0.05: line coverage {:.3}, pointwise {:.3} ({:.1?})", r.coverage, r.pointwise_coverage, t.elapsed());
    }
    if which != "qq" {
        let t = Instant::now();
        let cfg = PlotConfig::new(1000, 0.1, 0.05)?;
        let r = coverage_experiment(
            &DistSpec::Pareto { xi: 0.25 },
            10_000,
            &cfg,
            PlotChoice::Me,
            reps.unwrap_or(200),
            RngStream::new(21, 0),
            McSettings::default(),
        )?;
        println!("ME band, Pareto xi=0.25, n=10000, k=1000, eps=0.1: line coverage {:.3}, pointwise {:.3} ({:.1?})", r.coverage, r.pointwise_coverage, t.elapsed());
    }
    Ok(())
}
