//! Hill and Pickands estimates and plots on three tail shapes.

use tailband::data::{hill_estimate, hill_plot, pickands_estimate};
use tailband::distributions::{sample_gpd, sample_nonstd, sample_pareto, GpdParams};
use tailband::{OrderedSample, RngStream};

fn report(name: &str, xi: f64, s: &OrderedSample) -> tailband::Result<()> {
    println!("{name} (true xi {xi}):");
    for k in [200, 1000, 4000] {
        let h = hill_estimate(s, k)?;
        let p = pickands_estimate(s, k)?;
        println!("  k={k:<5} Hill {:.4}   Pickands {:.4}", h.xi, p.xi);
    }
    let plot = hill_plot(s, 5000)?;
    let every: Vec<String> = plot.points.iter().step_by(1000).map(|(k, x)| format!("({k}, {x:.3})")).collect();
    println!("  Hill plot samples: {}", every.join(" "));
    Ok(())
}

fn main() -> tailband::Result<()> {
    let n = 50_000;
    report("Pareto", 0.25, &sample_pareto(0.25, n, RngStream::new(1, 0))?)?;
    report("GPD beta=2", 0.5, &sample_gpd(&GpdParams::new(0.5, 2.0)?, n, RngStream::new(2, 0))?)?;
    report("Lambert-W law", 0.2, &sample_nonstd(n, RngStream::new(3, 0))?)?;
    Ok(())
}
