//! The boundary crossing probability of `sup_{t>=delta} |W(t)|/t` from its
//! series, Doob's two-line formula, and the QQ band constants.

use tailband::limitsim::{doob_band_probability, prop51_probability, prop51_probability_with, qq_sup_quantile, SeriesForm};

fn main() -> tailband::Result<()> {
    println!("P(sup |W(t)|/t > M, t >= delta):");
    println!("{:>6} {:>8} {:>12} {:>12} {:>12}", "M", "delta", "15 terms", "100 terms", "other form");
    for (m, delta) in [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0), (2.0, 0.2), (2.0, 0.0526), (5.0, 0.0526)] {
        println!(
            "{m:>6} {delta:>8} {:>12.8} {:>12.8} {:>12.8}",
            prop51_probability(m, delta, 15)?,
            prop51_probability(m, delta, 100)?,
            prop51_probability_with(m, delta, 15, SeriesForm::Statement)?
        );
    }

    println!("\nTwo-line band -(alpha t + beta) <= W(t) <= a t + b:");
    for (a, b, al, be) in [(0.5, 1.0, 0.5, 1.0), (1.0, 1.0, 1e6, 1e6), (1.0, 0.5, 0.2, 2.0)] {
        println!("a={a} b={b} alpha={al} beta={be}: {:.8}", doob_band_probability(a, b, al, be, 100)?);
    }

    println!("\nQQ band constants c (quantile of sup_{{t>=delta}} |W(t)|/t, delta = eps/(1-eps)):");
    for eps in [0.01, 0.02, 0.05, 0.1] {
        let row: Vec<String> = [0.95, 0.975, 0.995]
            .iter()
            .map(|&l| qq_sup_quantile(l, eps).map(|q| format!("{:.5}", q.value)))
            .collect::<tailband::Result<_>>()?;
        println!("eps={eps:<5} level 0.95/0.975/0.995: {}", row.join("  "));
    }
    Ok(())
}
