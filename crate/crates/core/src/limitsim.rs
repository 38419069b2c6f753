//! Brownian functionals behind the band widths: the boundary crossing series
//! for `sup_{t>=delta} |W(t)|/t`, Doob's two-line formula, and Monte Carlo
//! quantiles of Brownian bridge functionals.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect, normal_sf, quantile_type7};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantileSource {
    Series,
    MonteCarlo,
    CfInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub value: f64,
    pub level: f64,
    pub source: QuantileSource,
    /// Monte Carlo standard error, or the numerical error bound for
    /// characteristic function inversion; zero for the closed-form series.
    pub std_error: f64,
    pub n_paths: usize,
    pub grid_m: usize,
}

/// Type-7 quantile of the pooled batches and the batch-means standard error.
pub(crate) fn batch_quantile(batches: &[Vec<f64>], q: f64) -> (f64, f64) {
    let mut all: Vec<f64> = batches.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let value = quantile_type7(&all, q);
    let per: Vec<f64> = batches
        .iter()
        .map(|b| {
            let mut s = b.clone();
            s.sort_by(f64::total_cmp);
            quantile_type7(&s, q)
        })
        .collect();
    let nb = per.len() as f64;
    let mean = per.iter().sum::<f64>() / nb;
    let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nb - 1.0);
    (value, (var / nb).sqrt())
}

/// The two index layouts printed for the series of `P(sup_{t>=delta} |W(t)|/t > M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesForm {
    /// `4 sum_k [Phi((4k-1)x) - Phi((4k-3)x)]`, `x = M sqrt(delta)`.
    #[default]
    Proof,
    /// `4 sum_k [Phi((4k+1)x) - Phi((4k-1)x)]`.
    Statement,
}

/// Terms used by [`qq_sup_quantile`].
pub const SERIES_TERMS: usize = 15;

/// `Phi(b x) - Phi(a x)` for `0 <= a < b`, from the upper tail to keep
/// precision when both arguments are large.
fn phi_gap(a: f64, b: f64, x: f64) -> f64 {
    normal_sf(a * x) - normal_sf(b * x)
}

/// Partial sum with `terms` terms of the crossing series, clamped to `[0,1]`.
pub fn prop51_probability_with(m: f64, delta: f64, terms: usize, form: SeriesForm) -> Result<f64> {
    if !(m > 0.0 && delta > 0.0) || terms < 1 {
        return Err(invalid(format!("need M > 0, delta > 0, terms >= 1; got M={m}, delta={delta}, terms={terms}")));
    }
    let x = m * delta.sqrt();
    let mut s = 0.0;
    for k in 1..=terms {
        let kf = k as f64;
        s += match form {
            SeriesForm::Proof => phi_gap(4.0 * kf - 3.0, 4.0 * kf - 1.0, x),
            SeriesForm::Statement => phi_gap(4.0 * kf - 1.0, 4.0 * kf + 1.0, x),
        };
    }
    Ok((4.0 * s).clamp(0.0, 1.0))
}

/// `P(sup_{t>=delta} |W(t)|/t > M)` by the default series form.
pub fn prop51_probability(m: f64, delta: f64, terms: usize) -> Result<f64> {
    prop51_probability_with(m, delta, terms, SeriesForm::default())
}

/// `P(-(alpha t + beta) <= W(t) <= a t + b for all t >= 0)` as
/// `1 - sum_k [e^{-2A_k} + e^{-2B_k} - e^{-2C_k} - e^{-2D_k}]`, clamped to `[0,1]`.
pub fn doob_band_probability(a: f64, b: f64, alpha: f64, beta: f64, terms: usize) -> Result<f64> {
    if !(a >= 0.0 && alpha >= 0.0 && b > 0.0 && beta > 0.0) || terms < 1 {
        return Err(invalid(format!(
            "need a, alpha >= 0 and b, beta > 0; got a={a}, b={b}, alpha={alpha}, beta={beta}"
        )));
    }
    let (ab, ab2) = (a * b, alpha * beta);
    let (cross1, cross2) = (a * beta, b * alpha);
    let mut s = 0.0;
    for k in 1..=terms {
        let k = k as f64;
        let ak = k * k * ab + (k - 1.0) * (k - 1.0) * ab2 + k * (k - 1.0) * (cross1 + cross2);
        let bk = (k - 1.0) * (k - 1.0) * ab + k * k * ab2 + k * (k - 1.0) * (cross1 + cross2);
        let ck = k * k * (ab + ab2) + k * (k - 1.0) * cross1 + k * (k + 1.0) * cross2;
        let dk = k * k * (ab + ab2) + k * (k + 1.0) * cross1 + k * (k - 1.0) * cross2;
        s += (-2.0 * ak).exp() + (-2.0 * bk).exp() - (-2.0 * ck).exp() - (-2.0 * dk).exp();
    }
    Ok((1.0 - s).clamp(0.0, 1.0))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// The `level`-quantile of `sup_{t>=delta} |W(t)|/t` with `delta = eps/(1-eps)`,
/// from the 15-term series: the `M` with `P(sup > M) = 1 - level`.
pub fn qq_sup_quantile(level: f64, eps: f64) -> Result<QuantileEstimate> {
    check_unit("level", level)?;
    check_unit("eps", eps)?;
    let delta = eps / (1.0 - eps);
    let target = 1.0 - level;
    let rd = delta.sqrt();
    let f = |m: f64| prop51_probability(m, delta, SERIES_TERMS).unwrap() - target;
    let (lo, hi) = (0.35 / rd, 40.0 / rd);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::ConvergenceFailure(format!("level {level} not bracketed by the series")));
    }
    let m = bisect(f, lo, hi, 1e-13 * hi)?;
    if f(m).abs() > 1e-8 {
        return Err(Error::ConvergenceFailure(format!("series root residual {:e}", f(m))));
    }
    Ok(QuantileEstimate { value: m, level, source: QuantileSource::Series, std_error: 0.0, n_paths: 0, grid_m: 0 })
}

/// A Brownian bridge on the grid `t_j = j/m`, `j = 1..=m`; `values[j-1] = B(t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    pub m: usize,
    pub values: Vec<f64>,
}

impl BridgePath {
    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }
}

fn fill_bridge(m: usize, rng: RngStream, out: &mut Vec<f64>) {
    let mut r = rng.rng();
    let sd = (1.0 / m as f64).sqrt();
    out.clear();
    let mut w = 0.0;
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(&mut r);
        w += sd * z;
        out.push(w);
    }
    let w1 = w;
    for (j, v) in out.iter_mut().enumerate() {
        *v -= (j + 1) as f64 / m as f64 * w1;
    }
    out[m - 1] = 0.0;
}

/// Bridge `W(t) - t W(1)` from Gaussian increments of variance `1/m`.
pub fn simulate_bridge(m: usize, rng: RngStream) -> Result<BridgePath> {
    if m < 2 {
        return Err(invalid(format!("grid size must be at least 2, got {m}")));
    }
    let mut values = Vec::with_capacity(m);
    fill_bridge(m, rng, &mut values);
    Ok(BridgePath { m, values })
}

/// Grid weights for the two functionals at one shape value.
struct FunctionalWeights {
    first: usize,
    /// `xi t_j^{-(1+xi)}`
    c_coef: Vec<f64>,
    /// `int_{t_{j-1}}^{t_j} y^{-(1+xi)} B(y) dy = lo_w[j] B(t_{j-1}) + hi_w[j] B(t_j)`
    /// for piecewise linear `B`, exact.
    lo_w: Vec<f64>,
    hi_w: Vec<f64>,
    /// `xi / t_j`
    d_coef: Vec<f64>,
}

impl FunctionalWeights {
    fn new(xi: f64, eps: f64, m: usize) -> Self {
        let h = 1.0 / m as f64;
        let first = ((eps * m as f64 - 1e-9).ceil() as usize).max(1);
        let mut c_coef = Vec::with_capacity(m);
        let mut lo_w = Vec::with_capacity(m);
        let mut hi_w = Vec::with_capacity(m);
        let mut d_coef = Vec::with_capacity(m);
        for j in 1..=m {
            let t = j as f64 * h;
            c_coef.push(xi * t.powf(-(1.0 + xi)));
            d_coef.push(xi / t);
            if j == 1 {
                lo_w.push(0.0);
                hi_w.push(h.powf(-xi) / (1.0 - xi));
                continue;
            }
            let s = t - h;
            let r = (-1.0 / j as f64).ln_1p();
            // m0 = int_s^t y^{-1-xi} dy, m1 = int_s^t y^{-xi} dy
            let m0 = t.powf(-xi) * (-xi * r).exp_m1() / xi;
            let m1 = -t.powf(1.0 - xi) * ((1.0 - xi) * r).exp_m1() / (1.0 - xi);
            let lin = (m1 - s * m0) / h;
            lo_w.push(m0 - lin);
            hi_w.push(lin);
        }
        Self { first, c_coef, lo_w, hi_w, d_coef }
    }

    /// Suprema over `t_j >= eps` of `xi t^{-(1+xi)} B(t)` and of
    /// `xi t^{-1} int_0^t y^{-(1+xi)} B(y) dy`.
    fn evaluate(&self, b: &[f64], want_d: bool) -> (f64, f64) {
        let mut c = f64::NEG_INFINITY;
        for j in self.first..=b.len() {
            c = c.max(self.c_coef[j - 1] * b[j - 1]);
        }
        if !want_d {
            return (c, f64::NAN);
        }
        let mut d = f64::NEG_INFINITY;
        let mut integral = 0.0;
        let mut prev = 0.0;
        for j in 1..=b.len() {
            let cur = b[j - 1];
            integral += self.lo_w[j - 1] * prev + self.hi_w[j - 1] * cur;
            prev = cur;
            if j >= self.first {
                d = d.max(self.d_coef[j - 1] * integral);
            }
        }
        (c, d)
    }
}

/// Batches used for the batch-means standard error.
pub const MC_BATCHES: usize = 10;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_GRID: usize = 8192;

/// Simulated values of the two functionals for every shape in `xis`, on common
/// bridge paths. Path `p` is drawn from `rng.substream(p)`, so results do not
/// depend on the number of threads. Returns `(c_samples, d_samples)` per shape.
pub fn me_functional_samples(
    xis: &[f64],
    eps: f64,
    n_paths: usize,
    m: usize,
    rng: RngStream,
    want_d: bool,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_unit("eps", eps)?;
    if n_paths < MC_BATCHES * 2 || m < 2 {
        return Err(invalid(format!("need at least {} paths and m >= 2", MC_BATCHES * 2)));
    }
    for &x in xis {
        let ok = if want_d { x > 0.0 && x < 0.5 } else { x > 0.0 && x.is_finite() };
        if !ok {
            return Err(Error::RegimeMismatch(format!("xi = {x} outside the Gaussian ME regime (0, 1/2)")));
        }
    }
    let weights: Vec<FunctionalWeights> = xis.iter().map(|&x| FunctionalWeights::new(x, eps, m)).collect();
    let per_path: Vec<Vec<(f64, f64)>> = (0..n_paths as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(m),
            |buf, p| {
                fill_bridge(m, rng.substream(p), buf);
                weights.iter().map(|w| w.evaluate(buf, want_d)).collect()
            },
        )
        .collect();
    Ok((0..xis.len())
        .map(|i| per_path.iter().map(|v| v[i]).unzip())
        .collect())
}

fn estimate_from_samples(samples: &[f64], level: f64, m: usize) -> QuantileEstimate {
    let per = samples.len() / MC_BATCHES;
    let batches: Vec<Vec<f64>> = (0..MC_BATCHES)
        .map(|b| {
            let end = if b + 1 == MC_BATCHES { samples.len() } else { (b + 1) * per };
            samples[b * per..end].to_vec()
        })
        .collect();
    let (value, std_error) = batch_quantile(&batches, level);
    QuantileEstimate {
        value,
        level,
        source: QuantileSource::MonteCarlo,
        std_error,
        n_paths: samples.len(),
        grid_m: m,
    }
}

fn check_me_args(eps: f64, level: f64, n_paths: usize, m: usize) -> Result<()> {
    check_unit("eps", eps)?;
    check_unit("level", level)?;
    if n_paths < 1000 || m < 1000 {
        return Err(invalid(format!("need at least 1000 paths and grid 1000, got {n_paths} and {m}")));
    }
    Ok(())
}

/// `level`-quantiles of `sup_{eps<=t<=1} xi t^{-(1+xi)} B(t)` (c) and
/// `sup_{eps<=t<=1} xi t^{-1} int_0^t y^{-(1+xi)} B(y) dy` (d), for `0 < xi < 1/2`.
///
/// The integral is exact for the piecewise linear interpolant of the
/// simulated bridge, including the first cell `[0, 1/m]`.
pub fn me_band_quantiles(
    xi: f64,
    eps: f64,
    level: f64,
    n_paths: usize,
    m: usize,
    rng: RngStream,
) -> Result<(QuantileEstimate, QuantileEstimate)> {
    Ok(me_band_quantiles_multi(&[xi], eps, &[level], n_paths, m, rng)?.remove(0).remove(0))
}

/// [`me_band_quantiles`] for several shapes and levels at once, on shared
/// paths; entry `[i][l]` is bit-identical to the single call with `xis[i]`
/// and `levels[l]`.
pub fn me_band_quantiles_multi(
    xis: &[f64],
    eps: f64,
    levels: &[f64],
    n_paths: usize,
    m: usize,
    rng: RngStream,
) -> Result<Vec<Vec<(QuantileEstimate, QuantileEstimate)>>> {
    for &l in levels {
        check_me_args(eps, l, n_paths, m)?;
    }
    let samples = me_functional_samples(xis, eps, n_paths, m, rng, true)?;
    Ok(samples
        .iter()
        .map(|(c, d)| {
            levels
                .iter()
                .map(|&l| (estimate_from_samples(c, l, m), estimate_from_samples(d, l, m)))
                .collect()
        })
        .collect())
}

/// `level`-quantile of the horizontal functional alone, valid for any `xi > 0`.
pub fn me_c_quantile(
    xi: f64,
    eps: f64,
    level: f64,
    n_paths: usize,
    m: usize,
    rng: RngStream,
) -> Result<QuantileEstimate> {
    Ok(me_c_quantile_multi(&[xi], eps, &[level], n_paths, m, rng)?.remove(0).remove(0))
}

pub fn me_c_quantile_multi(
    xis: &[f64],
    eps: f64,
    levels: &[f64],
    n_paths: usize,
    m: usize,
    rng: RngStream,
) -> Result<Vec<Vec<QuantileEstimate>>> {
    for &l in levels {
        check_me_args(eps, l, n_paths, m)?;
    }
    let samples = me_functional_samples(xis, eps, n_paths, m, rng, false)?;
    Ok(samples
        .iter()
        .map(|(c, _)| levels.iter().map(|&l| estimate_from_samples(c, l, m)).collect())
        .collect())
}
