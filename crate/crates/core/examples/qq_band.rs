//! Truncated QQ plot of a Pareto sample with its confidence band.
//!
//! Usage: `cargo run --release --example qq_band -- [out.svg]`

use tailband::bands::qq_band_levels;
use tailband::data::hill_estimate;
use tailband::distributions::sample_pareto;
use tailband::output::render_svg;
use tailband::plotsets::PlotConfig;
use tailband::RngStream;

fn main() -> tailband::Result<()> {
    let xi = 0.25;
    let sample = sample_pareto(xi, 50_000, RngStream::new(2024, 0))?;
    for k in [1000, 1500, 2000] {
        let cfg = PlotConfig::new(k, 0.05, 0.05)?;
        let est = hill_estimate(&sample, k)?;
        let bands = qq_band_levels(&sample, &cfg, &est, &[0.01, 0.05, 0.10])?;
        let b95 = &bands[1];
        let half = b95.cells[0].yhi - b95.cells[0].y;
        let inside = b95.cells.iter().all(|c| xi * c.x > c.ylo && xi * c.x < c.yhi);
        println!(
            "k={k}: Hill xi={:.4}, c={:.4}, half-width {:.4}, {} points, true line inside 95% band: {inside}",
            est.xi,
            b95.quantiles_used.c.unwrap().value,
            half,
            b95.cells.len()
        );
        if k == 2000 {
            if let Some(path) = std::env::args().nth(1) {
                std::fs::write(&path, render_svg(&b95.base, &bands, Some(est.xi)))?;
                println!("wrote {path}");
            }
        }
    }
    Ok(())
}
