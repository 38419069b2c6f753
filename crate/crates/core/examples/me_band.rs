//! Mean excess plots with confidence bands in both regimes: a Pareto sample
//! with xi = 0.25 and a totally skewed stable sample with xi = 2/3.
//!
//! Usage: `cargo run --release --example me_band -- [out-dir]`

use tailband::bands::{me_band_levels, McSettings};
use tailband::data::hill_estimate;
use tailband::distributions::{sample_pareto, sample_stable, StableSpec};
use tailband::output::render_svg;
use tailband::plotsets::PlotConfig;
use tailband::{OrderedSample, RngStream};

fn show(name: &str, sample: &OrderedSample, k: usize, eps: f64, slope: f64, out: Option<&str>) -> tailband::Result<()> {
    let cfg = PlotConfig::new(k, eps, 0.05)?;
    let est = hill_estimate(sample, k)?;
    let bands = me_band_levels(sample, &cfg, &est, &[0.01, 0.05, 0.10], RngStream::new(7, 0), McSettings::default())?;
    let b = &bands[1];
    let (first, last) = (b.cells[0], b.cells[b.cells.len() - 1]);
    println!(
        "{name}: Hill xi={:.3}, regime {:?}, vertical interval at the top point [{:.3}, {:.3}], at the bottom point [{:.3}, {:.3}]",
        est.xi, b.regime, first.ylo, first.yhi, last.ylo, last.yhi
    );
    for band in &bands {
        if let Some(w) = &band.warning {
            println!("  warning at level {}: {w}", band.level);
        }
    }
    if let Some(dir) = out {
        let path = format!("{dir}/{name}.svg");
        std::fs::write(&path, render_svg(&b.base, &bands, Some(slope)))?;
        println!("  wrote {path}");
    }
    Ok(())
}

fn main() -> tailband::Result<()> {
    let out = std::env::args().nth(1);
    if let Some(d) = &out {
        std::fs::create_dir_all(d)?;
    }
    let pareto = sample_pareto(0.25, 50_000, RngStream::new(1, 0))?;
    show("pareto-0.25", &pareto, 2000, 0.1, 1.0 / 3.0, out.as_deref())?;
    let stable = sample_stable(&StableSpec::simulation(1.5, 1.0)?, 50_000, RngStream::new(2, 0))?;
    show("stable-0.667", &stable, 1000, 0.1, 2.0, out.as_deref())?;
    Ok(())
}
