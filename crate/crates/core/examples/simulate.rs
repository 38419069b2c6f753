//! Draws from each data generating law and compares empirical tails with the
//! exact ones.

use tailband::distributions::{
    gpd_cdf, nonstd_sf, sample_gpd, sample_nonstd, sample_pareto, sample_stable, stable_cf, GpdParams, StableSpec,
};
use tailband::{OrderedSample, RngStream};

fn tail(s: &OrderedSample, x: f64) -> f64 {
    s.values().iter().filter(|&&v| v > x).count() as f64 / s.n() as f64
}

fn main() -> tailband::Result<()> {
    let n = 100_000;
    let p = sample_pareto(0.25, n, RngStream::new(1, 0))?;
    println!("Pareto xi=0.25: P(X>2) empirical {:.5}, exact {:.5}", tail(&p, 2.0), 2f64.powf(-4.0));

    let g = GpdParams::new(0.4, 1.5)?;
    let s = sample_gpd(&g, n, RngStream::new(2, 0))?;
    println!("GPD xi=0.4 beta=1.5: P(X>5) empirical {:.5}, exact {:.5}", tail(&s, 5.0), 1.0 - gpd_cdf(&g, 5.0)?);

    let w = sample_nonstd(n, RngStream::new(3, 0))?;
    println!("Lambert-W law: P(X>3) empirical {:.5}, exact {:.5}", tail(&w, 3.0), nonstd_sf(3.0)?);

    let st = sample_stable(&StableSpec::simulation(1.5, 1.0)?, n, RngStream::new(4, 0))?;
    let t = 0.7;
    let (re, im) = st.values().iter().fold((0.0, 0.0), |(a, b), &x| (a + (t * x).cos(), b + (t * x).sin()));
    let cf = stable_cf(1.5, 1.0, t);
    println!(
        "stable alpha=1.5 skew=1: CF at t={t} empirical {:.4}{:+.4}i, exact {:.4}{:+.4}i",
        re / n as f64,
        im / n as f64,
        cf.re,
        cf.im
    );
    Ok(())
}
