//! Hausdorff distance between truncated plots and their limit lines as the
//! sample grows.

use tailband::distributions::sample_pareto;
use tailband::plotsets::{hausdorff_to_limit, me_set, qq_set, LimitSet, PlotConfig};
use tailband::RngStream;

fn main() -> tailband::Result<()> {
    let xi = 0.25;
    for n in [1_000usize, 10_000, 100_000, 1_000_000] {
        let k = (n as f64).powf(0.6) as usize;
        let cfg = PlotConfig::new(k, 0.05, 0.05)?;
        let (mut q, mut m) = (Vec::new(), Vec::new());
        for r in 0..20 {
            let s = sample_pareto(xi, n, RngStream::new(n as u64, r))?;
            q.push(hausdorff_to_limit(&qq_set(&s, &cfg)?, &LimitSet::qq(xi, 0.05))?);
            m.push(hausdorff_to_limit(&me_set(&s, &cfg)?, &LimitSet::me(xi))?);
        }
        q.sort_by(f64::total_cmp);
        m.sort_by(f64::total_cmp);
        println!("n={n:<8} k={k:<5} median distance QQ {:.4}  ME {:.4}", q[10], m[10]);
    }
    Ok(())
}
