//! Quantiles of the mean excess fluctuation law for 1/2 < xi < 1, by
//! characteristic function inversion and by Monte Carlo, and its CDF table.

use tailband::distributions::{cdf_by_inversion, limit_quantile, QuantileMethod, StableKind, StableSpec};
use tailband::RngStream;

fn main() -> tailband::Result<()> {
    for xi in [0.6, 2.0 / 3.0, 0.8] {
        let spec = StableSpec::limit(StableKind::LimitSTilde, xi)?;
        println!("xi = {xi:.4} (stable index {:.3}), mean {:.4}", spec.alpha, -xi / (1.0 - xi));
        for q in [0.005, 0.025, 0.5, 0.975, 0.995] {
            let cf = limit_quantile(&spec, q, QuantileMethod::CfInversion, RngStream::new(0, 0))?;
            let mc = limit_quantile(&spec, q, QuantileMethod::MonteCarlo, RngStream::new(1, 0))?;
            println!(
                "  q={q:<6} inversion {:>10.4} (+-{:.1e})   Monte Carlo {:>10.4} (+-{:.1e})",
                cf.value, cf.std_error, mc.value, mc.std_error
            );
        }
    }
    let spec = StableSpec::limit(StableKind::LimitSTilde, 2.0 / 3.0)?;
    let xs: Vec<f64> = (-10..=4).map(|i| i as f64 * 2.0).collect();
    let (cdf, err) = cdf_by_inversion(&spec, &xs)?;
    println!("\nCDF at xi = 2/3 (truncation bound {err:.1e}):");
    for (x, f) in xs.iter().zip(cdf) {
        println!("  F({x:>5}) = {f:.6}");
    }
    Ok(())
}
