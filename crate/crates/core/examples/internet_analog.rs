//! A simulated stand-in for heavy-tailed internet traffic measurements:
//! 67287 observations from a lognormal body mixed with a Pareto tail of
//! shape 0.62. The QQ plot gets a band, and the ME plot gets the band for
//! 1/2 < xi < 1.
//!
//! Usage: `cargo run --release --example internet_analog -- [out-dir]`

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use tailband::bands::{me_band_levels, qq_band_levels, McSettings};
use tailband::data::hill_estimate;
use tailband::output::render_svg;
use tailband::plotsets::PlotConfig;
use tailband::{OrderedSample, RngStream};

fn main() -> tailband::Result<()> {
    let n = 67_287;
    let xi = 0.62;
    let mut rng = RngStream::new(67287, 0).rng();
    let body = LogNormal::new(0.0, 0.6).expect("valid lognormal");
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.3 {
                3.0 * (1.0 - rng.random::<f64>()).powf(-xi)
            } else {
                body.sample(&mut rng)
            }
        })
        .collect();
    let sample = OrderedSample::from_values(values)?;
    let out = std::env::args().nth(1);
    if let Some(d) = &out {
        std::fs::create_dir_all(d)?;
    }

    for (k, eps) in [(2000, 0.05), (1300, 0.02)] {
        let cfg = PlotConfig::new(k, eps, 0.05)?;
        let est = hill_estimate(&sample, k)?;
        let qq = qq_band_levels(&sample, &cfg, &est, &[0.01, 0.05, 0.10])?;
        println!("k={k} eps={eps}: Hill xi {:.3}, QQ half-width {:.4}", est.xi, qq[1].cells[0].yhi - qq[1].cells[0].y);
        let me = me_band_levels(&sample, &cfg, &est, &[0.05, 0.10], RngStream::new(1, 0), McSettings::default())?;
        println!("  ME regime {:?}, {} cells", me[0].regime, me[0].cells.len());
        if let Some(d) = &out {
            std::fs::write(format!("{d}/qq-k{k}.svg"), render_svg(&qq[0].base, &qq, Some(est.xi)))?;
            std::fs::write(format!("{d}/me-k{k}.svg"), render_svg(&me[0].base, &me, Some(est.xi / (1.0 - est.xi))))?;
        }
    }
    Ok(())
}
