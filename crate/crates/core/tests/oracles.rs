//! Closed forms against independent numerical and Monte Carlo oracles.

use rand_distr::{Distribution, StandardNormal};

use tailband::limitsim::{doob_band_probability, me_band_quantiles, prop51_probability, qq_sup_quantile};
use tailband::RngStream;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Conditioning on `W(delta) = x`, the cone `|W(t)| <= M t`, `t >= delta`, is
/// a two-line band for the restarted motion with intercepts `M delta -/+ x`.
#[test]
fn crossing_series_matches_conditioned_two_line_formula() {
    for (m, delta) in [(1.0, 1.0), (2.0, 0.2), (0.5, 1.0), (3.0, 0.0526), (1.5, 0.5)] {
        let md = m * delta;
        let sd = f64::sqrt(delta);
        let stay = simpson(
            |x| {
                let dens = (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
                let (b, beta) = (md - x, md + x);
                if b <= 0.0 || beta <= 0.0 {
                    return 0.0;
                }
                doob_band_probability(m, b, m, beta, 100).unwrap() * dens
            },
            -md,
            md,
            20_000,
        );
        let series = prop51_probability(m, delta, 15).unwrap();
        assert!((1.0 - stay - series).abs() < 1e-6, "M={m} delta={delta}: {} vs {series}", 1.0 - stay);
    }
}

/// Probability that a Brownian path started at 0 leaves the band
/// `-(alpha t + beta) <= W(t) <= a t + b`. On each grid cell the exit
/// probability of the Brownian bridge across a line is exact; after the
/// horizon the one-line formula from the end point is used.
fn two_line_exit_mc(a: f64, b: f64, alpha: f64, beta: f64, paths: usize, horizon: f64, steps: usize, seed: u64) -> (f64, f64) {
    let dt = horizon / steps as f64;
    let sd = dt.sqrt();
    let mut rng = RngStream::new(seed, 0).rng();
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..paths {
        let mut surv = 1.0;
        let mut x = 0.0f64;
        let mut exited = false;
        for i in 0..steps {
            let t0 = i as f64 * dt;
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = x + sd * z;
            let (u0, u1) = (a * t0 + b - x, a * (t0 + dt) + b - y);
            let (l0, l1) = (alpha * t0 + beta + x, alpha * (t0 + dt) + beta + y);
            if u1 <= 0.0 || l1 <= 0.0 {
                exited = true;
                break;
            }
            let p = (-2.0 * u0 * u1 / dt).exp() + (-2.0 * l0 * l1 / dt).exp();
            surv *= 1.0 - p.min(1.0);
            x = y;
        }
        let e = if exited {
            1.0
        } else {
            let tail = (-2.0 * a * (a * horizon + b - x)).exp() + (-2.0 * alpha * (alpha * horizon + beta + x)).exp();
            1.0 - surv * (1.0 - tail.min(1.0))
        };
        s += e;
        s2 += e * e;
    }
    let n = paths as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / n).sqrt())
}

#[test]
fn two_line_formula_matches_monte_carlo() {
    let (p_exit, se) = two_line_exit_mc(0.5, 1.0, 0.5, 1.0, 1_000_000, 24.0, 96, 31);
    let formula = 1.0 - doob_band_probability(0.5, 1.0, 0.5, 1.0, 100).unwrap();
    assert!((formula - p_exit).abs() <= 0.005, "formula {formula}, MC {p_exit} +- {se}");
}

#[test]
fn qq_sup_quantile_has_the_right_tail_mass() {
    let eps = 0.05;
    let delta = eps / (1.0 - eps);
    let c = qq_sup_quantile(0.975, eps).unwrap().value;
    let t_end = 1.0 / delta;
    let steps = 400;
    let dt = t_end / steps as f64;
    let mut rng = RngStream::new(12, 0).rng();
    let paths = 200_000;
    let mut total = 0.0;
    for _ in 0..paths {
        let mut x = 0.0f64;
        let mut surv = 1.0;
        let mut out = false;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = x + dt.sqrt() * z;
            if y.abs() >= c {
                out = true;
                break;
            }
            surv *= 1.0 - ((-2.0 * (c - x) * (c - y) / dt).exp() + (-2.0 * (c + x) * (c + y) / dt).exp()).min(1.0);
            x = y;
        }
        total += if out { 1.0 } else { 1.0 - surv };
    }
    let p = total / paths as f64;
    let se = (0.025f64 * 0.975 / paths as f64).sqrt();
    assert!((p - 0.025).abs() < 4.0 * se, "tail mass {p} at c = {c}");
}

#[test]
fn me_quantiles_are_stable_across_independent_runs() {
    let a = me_band_quantiles(0.25, 0.1, 0.975, 10_000, 8192, RngStream::new(1, 0)).unwrap();
    let b = me_band_quantiles(0.25, 0.1, 0.975, 10_000, 8192, RngStream::new(2, 0)).unwrap();
    for (x, y) in [(a.0, b.0), (a.1, b.1)] {
        let se = x.std_error.hypot(y.std_error);
        assert!((x.value - y.value).abs() <= 3.0 * se, "{} vs {} (combined se {se})", x.value, y.value);
        assert!(se / x.value < 0.02);
    }
    let hi = me_band_quantiles(0.25, 0.1, 0.995, 10_000, 8192, RngStream::new(1, 0)).unwrap();
    assert!(hi.0.value > a.0.value && hi.1.value > a.1.value);
}
