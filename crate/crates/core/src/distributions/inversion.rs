use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stable::{cf_fast, stable_draw, StableKind, StableSpec};
use super::stilde::stilde_draw;
use crate::error::{invalid, Error, Result};
use crate::limitsim::{batch_quantile, QuantileEstimate, QuantileSource};
use crate::numeric::{bisect, gauss_legendre};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantileMethod {
    CfInversion,
    MonteCarlo,
}

/// Tail level at which the frequency range is cut.
const CF_CUTOFF: f64 = 1e-6;
const MAX_FREQUENCY: f64 = 16384.0;
const PANEL_ORDER: usize = 8;
const MAX_X_SCALE: f64 = 256.0;

/// The characteristic function tabulated on quadrature nodes for
/// `F(x) = 1/2 - (1/pi) int_0^L Im(e^{-itx} phi(t)) / t dt`, accurate for
/// `|x| <= x_scale`.
struct CfTable {
    t: Vec<f64>,
    w_over_t: Vec<f64>,
    phi: Vec<Complex64>,
    tail: f64,
}

impl CfTable {
    fn build(spec: &StableSpec, x_scale: f64) -> Self {
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut panels = vec![(0.0, 2f64.powi(-40))];
        for i in (0..40).rev() {
            panels.push((2f64.powi(-i - 1), 2f64.powi(-i)));
        }
        let mut cut = 1.0;
        while cut < MAX_FREQUENCY && cf_fast(spec, cut).norm() > CF_CUTOFF {
            cut *= 2.0;
        }
        let tail = cf_fast(spec, cut).norm() / PI;
        let h = (2.0 / (x_scale + 1.0)).min(0.5);
        let count = ((cut - 1.0) / h).ceil() as usize;
        let h = (cut - 1.0) / count as f64;
        for p in 0..count {
            panels.push((1.0 + p as f64 * h, 1.0 + (p + 1) as f64 * h));
        }
        let mut t = Vec::with_capacity(panels.len() * PANEL_ORDER);
        let mut w_over_t = Vec::with_capacity(panels.len() * PANEL_ORDER);
        for (a, b) in panels {
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                let node = c + r * x;
                t.push(node);
                w_over_t.push(r * w / node);
            }
        }
        let phi = t.iter().map(|&s| cf_fast(spec, s)).collect();
        Self { t, w_over_t, phi, tail }
    }

    fn cdf(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for ((&t, &w), phi) in self.t.iter().zip(&self.w_over_t).zip(&self.phi) {
            let (sin, cos) = (t * x).sin_cos();
            // Im(e^{-itx} phi) = cos(tx) Im(phi) - sin(tx) Re(phi)
            s += w * (cos * phi.im - sin * phi.re);
        }
        0.5 - s / PI
    }
}

fn initial_scale(spec: &StableSpec) -> f64 {
    match spec.as_plain_stable() {
        Some((sigma, _)) => (16.0 * sigma).max(8.0),
        None => 16.0,
    }
}

/// Distribution function values of `spec` at `xs` by characteristic function
/// inversion, with the truncation bound of the frequency integral.
pub fn cdf_by_inversion(spec: &StableSpec, xs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let spec = StableSpec::new(spec.alpha, spec.skew, spec.kind)?;
    let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if !scale.is_finite() {
        return Err(invalid("evaluation points must be finite"));
    }
    let table = CfTable::build(&spec, scale);
    Ok((xs.iter().map(|&x| table.cdf(x)).collect(), table.tail))
}

const ROOT_TOL: f64 = 1e-6;
/// Draws used by the Monte Carlo method.
pub const MC_DRAWS: usize = 100_000;
const MC_BATCHES: usize = 10;

fn quantile_by_inversion(spec: &StableSpec, q: f64) -> Result<QuantileEstimate> {
    let mut scale = initial_scale(spec);
    loop {
        let table = CfTable::build(spec, scale);
        if table.cdf(-scale) < q && table.cdf(scale) > q {
            let root = bisect(|x| table.cdf(x) - q, -scale, scale, ROOT_TOL)?;
            let d = 1e-3;
            let density = ((table.cdf(root + d) - table.cdf(root - d)) / (2.0 * d)).max(1e-12);
            return Ok(QuantileEstimate {
                value: root,
                level: q,
                source: QuantileSource::CfInversion,
                std_error: table.tail / density + ROOT_TOL,
                n_paths: 0,
                grid_m: table.t.len(),
            });
        }
        scale *= 2.0;
        if scale > MAX_X_SCALE {
            return Err(Error::ConvergenceFailure(format!(
                "the {q}-quantile of {:?} is not bracketed by [-{MAX_X_SCALE}, {MAX_X_SCALE}]",
                spec.kind
            )));
        }
    }
}

fn mc_draws(spec: &StableSpec, rng: RngStream) -> Vec<Vec<f64>> {
    let per = MC_DRAWS / MC_BATCHES;
    let plain = spec.as_plain_stable();
    (0..MC_BATCHES as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.substream(b).rng();
            (0..per)
                .map(|_| match (spec.kind, plain) {
                    (StableKind::LimitSTilde, _) => stilde_draw(spec.xi(), &mut r),
                    (_, Some((sigma, skew))) => sigma * stable_draw(spec.alpha, skew, &mut r),
                    _ => unreachable!(),
                })
                .collect()
        })
        .collect()
}

/// The `q`-quantile of the law in `spec`.
///
/// `CfInversion` inverts the characteristic function and finds the root by
/// bisection to `1e-6`; its error estimate is the truncation bound divided by
/// the density plus the root tolerance. `MonteCarlo` takes [`MC_DRAWS`] draws
/// (Chambers–Mallows–Stuck for the stable kinds, the Poisson series for
/// `LimitSTilde`) and reports a batch-means standard error.
pub fn limit_quantile(
    spec: &StableSpec,
    q: f64,
    method: QuantileMethod,
    rng: RngStream,
) -> Result<QuantileEstimate> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("quantile level must lie in (0,1), got {q}")));
    }
    let spec = StableSpec::new(spec.alpha, spec.skew, spec.kind)?;
    match method {
        QuantileMethod::CfInversion => quantile_by_inversion(&spec, q),
        QuantileMethod::MonteCarlo => {
            let batches = mc_draws(&spec, rng);
            let (value, std_error) = batch_quantile(&batches, q);
            Ok(QuantileEstimate {
                value,
                level: q,
                source: QuantileSource::MonteCarlo,
                std_error,
                n_paths: MC_DRAWS,
                grid_m: 0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::normal_cdf;

    #[test]
    fn gaussian_cdf_by_inversion() {
        let s = StableSpec::simulation(2.0, 0.0).unwrap();
        let xs = [-3.0, -1.0, 0.0, 0.5, 2.0];
        let (f, _) = cdf_by_inversion(&s, &xs).unwrap();
        for (x, fx) in xs.iter().zip(f) {
            assert!((fx - normal_cdf(x / 2f64.sqrt())).abs() < 1e-9, "{x} {fx}");
        }
    }

    #[test]
    fn symmetric_median_is_zero() {
        let s = StableSpec::simulation(2.0, 0.0).unwrap();
        let q = limit_quantile(&s, 0.5, QuantileMethod::CfInversion, RngStream::new(0, 0)).unwrap();
        assert!(q.value.abs() < 1e-6);
        assert!(limit_quantile(&s, 0.0, QuantileMethod::CfInversion, RngStream::new(0, 0)).is_err());
        assert!(limit_quantile(&s, 1.0, QuantileMethod::MonteCarlo, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn cauchy_quantile() {
        let s = StableSpec::simulation(1.0, 0.0).unwrap();
        let q = limit_quantile(&s, 0.9, QuantileMethod::CfInversion, RngStream::new(0, 0)).unwrap();
        assert!((q.value - (PI * 0.4).tan()).abs() < 1e-5, "{}", q.value);
    }

    #[test]
    fn mc_is_deterministic() {
        let s = StableSpec::limit(StableKind::LimitS, 0.6).unwrap();
        let a = limit_quantile(&s, 0.9, QuantileMethod::MonteCarlo, RngStream::new(3, 1)).unwrap();
        let b = limit_quantile(&s, 0.9, QuantileMethod::MonteCarlo, RngStream::new(3, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stilde_methods_agree() {
        let s = StableSpec::limit(StableKind::LimitSTilde, 2.0 / 3.0).unwrap();
        for q in [0.025, 0.5, 0.975] {
            let a = limit_quantile(&s, q, QuantileMethod::CfInversion, RngStream::new(1, 0)).unwrap();
            let b = limit_quantile(&s, q, QuantileMethod::MonteCarlo, RngStream::new(1, 0)).unwrap();
            let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!((a.value - b.value).abs() < tol, "q={q} {a:?} {b:?}");
        }
    }

    #[test]
    fn limit_s_methods_agree() {
        let s = StableSpec::limit(StableKind::LimitS, 2.0 / 3.0).unwrap();
        for q in [0.05, 0.95] {
            let a = limit_quantile(&s, q, QuantileMethod::CfInversion, RngStream::new(2, 0)).unwrap();
            let b = limit_quantile(&s, q, QuantileMethod::MonteCarlo, RngStream::new(2, 0)).unwrap();
            assert!((a.value - b.value).abs() < 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt(), "{a:?} {b:?}");
        }
    }
}
