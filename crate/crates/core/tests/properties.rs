use proptest::prelude::*;

use tailband::bands::{line_covered, qq_band_levels, BandCell};
use tailband::data::{empirical_me, hill_estimate, TailIndexEstimate};
use tailband::distributions::{gpd_cdf, lambertw, GpdParams};
use tailband::limitsim::{doob_band_probability, prop51_probability, qq_sup_quantile};
use tailband::output::sig9;
use tailband::plotsets::{qq_set, PlotConfig};
use tailband::OrderedSample;

fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0f64..1e6, 20..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordered_sample_is_sorted_and_complete(v in prop::collection::vec(-1e9f64..1e9, 2..300)) {
        let s = OrderedSample::from_values(v.clone()).unwrap();
        prop_assert_eq!(s.n(), v.len());
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn hill_and_qq_plot_are_scale_invariant(v in sample_strategy(), c in 1e-3f64..1e3) {
        let s = OrderedSample::from_values(v).unwrap();
        let k = s.n() / 2;
        let t = s.scaled(c);
        let (a, b) = (hill_estimate(&s, k).unwrap().xi, hill_estimate(&t, k).unwrap().xi);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        let cfg = PlotConfig::new(k, 0.1, 0.05).unwrap();
        let (p, q) = (qq_set(&s, &cfg).unwrap(), qq_set(&t, &cfg).unwrap());
        for (u, w) in p.points.iter().zip(&q.points) {
            prop_assert_eq!(u.0, w.0);
            prop_assert!((u.1 - w.1).abs() <= 1e-9 * u.1.abs().max(1.0));
        }
        prop_assert!(p.points.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn mean_excess_is_shift_equivariant(v in sample_strategy(), c in -100.0f64..100.0, q in 0.1f64..0.9) {
        let s = OrderedSample::from_values(v).unwrap();
        let u = s.order_stat(((q * s.n() as f64) as usize).max(2));
        let a = empirical_me(&s, u).unwrap();
        let b = empirical_me(&s.shifted(c), u + c).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
    }

    #[test]
    fn crossing_probability_is_bounded_and_decreasing(m in 0.4f64..20.0, delta in 0.8f64..5.0, dm in 0.01f64..1.0) {
        let p = prop51_probability(m, delta, 15).unwrap();
        let q = prop51_probability(m + dm, delta, 15).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q <= p);
    }

    #[test]
    fn two_line_formula_is_reflection_symmetric(a in 0.0f64..3.0, b in 0.05f64..3.0, al in 0.0f64..3.0, be in 0.05f64..3.0) {
        let p = doob_band_probability(a, b, al, be, 100).unwrap();
        let q = doob_band_probability(al, be, a, b, 100).unwrap();
        prop_assert!((p - q).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn qq_quantile_increases_with_level(eps in 0.01f64..0.3, l1 in 0.8f64..0.98, dl in 0.001f64..0.019) {
        let a = qq_sup_quantile(l1, eps).unwrap().value;
        let b = qq_sup_quantile(l1 + dl, eps).unwrap().value;
        prop_assert!(b > a);
    }

    #[test]
    fn qq_bands_are_nested_and_follow_the_width_law(v in sample_strategy(), xi in 0.05f64..2.0) {
        let s = OrderedSample::from_values(v).unwrap();
        let k = s.n() / 2;
        let cfg = PlotConfig::new(k, 0.1, 0.05).unwrap();
        let est = TailIndexEstimate::fixed(xi, k).unwrap();
        let bands = qq_band_levels(&s, &cfg, &est, &[0.01, 0.05, 0.1]).unwrap();
        for (i, b) in bands.iter().enumerate() {
            let c = qq_sup_quantile(1.0 - [0.01, 0.05, 0.1][i] / 2.0, 0.1).unwrap().value;
            for cell in &b.cells {
                prop_assert!((cell.yhi - cell.y - xi * c / (k as f64).sqrt()).abs() < 1e-12);
            }
        }
        for w in bands.windows(2) {
            for (wide, narrow) in w[0].cells.iter().zip(&w[1].cells) {
                prop_assert!(wide.ylo <= narrow.ylo && wide.yhi >= narrow.yhi);
            }
        }
    }

    #[test]
    fn a_line_through_every_cell_centre_is_covered(slope in 0.1f64..3.0, h in 0.05f64..0.5, n in 2usize..50) {
        let cells: Vec<BandCell> = (0..n)
            .map(|i| {
                let x = 1.0 + i as f64 * h;
                BandCell { x, y: slope * x, xlo: x - h, xhi: x + h, ylo: slope * (x - h), yhi: slope * (x + h) }
            })
            .collect();
        prop_assert!(line_covered(&cells, slope, 1.0, 1.0 + (n - 1) as f64 * h));
        prop_assert!(!line_covered(&cells, slope * 2.0 + 1.0, 1.0, 1.0 + (n - 1) as f64 * h));
    }

    #[test]
    fn gpd_cdf_is_a_cdf(xi in -0.9f64..2.0, beta in 0.1f64..10.0, x in 0.0f64..50.0, dx in 0.0f64..5.0) {
        let p = GpdParams::new(xi, beta).unwrap();
        if let (Ok(a), Ok(b)) = (gpd_cdf(&p, x), gpd_cdf(&p, x + dx)) {
            prop_assert!((0.0..=1.0).contains(&a) && a <= b + 1e-15);
        }
    }

    #[test]
    fn lambert_w_inverts(x in -0.3678f64..1e12) {
        let w = lambertw(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn svg_numbers_keep_nine_digits(v in -1e12f64..1e12) {
        let r: f64 = sig9(v).parse().unwrap();
        prop_assert!((r - v).abs() <= 5e-9 * v.abs() + 1e-300);
    }
}
