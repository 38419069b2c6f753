//! Samplers and analytic functions for the distributions used in the tail
//! experiments, and the stable limit laws behind the ME fluctuations.

mod inversion;
mod stable;
mod stilde;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::OrderedSample;
use crate::error::{domain, invalid, Error, Result};
use crate::numeric;
use crate::rng::RngStream;

pub use inversion::{cdf_by_inversion, limit_quantile, QuantileMethod};
pub use stable::{limit_cf, sample_stable, stable_cf, stable_draw, StableKind, StableSpec};
pub use stilde::{stilde_draw, stilde_finite_statistic, stilde_j, stilde_j_quadrature};

/// Below this magnitude the shape is treated as exactly zero.
pub const XI_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub xi: f64,
    pub beta: f64,
}

impl GpdParams {
    pub fn new(xi: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || !xi.is_finite() {
            return Err(invalid(format!("GPD needs finite xi and beta > 0, got xi={xi}, beta={beta}")));
        }
        Ok(Self { xi, beta })
    }
}

/// `1 - (1 + xi x / beta)^(-1/xi)`, or `1 - exp(-x/beta)` when `|xi| < XI_ZERO`.
pub fn gpd_cdf(p: &GpdParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain(format!("GPD cdf needs x >= 0, got {x}")));
    }
    if p.xi.abs() < XI_ZERO {
        return Ok(-(-x / p.beta).exp_m1());
    }
    if p.xi < 0.0 {
        let end = -p.beta / p.xi;
        if x > end {
            return Err(domain(format!("x = {x} beyond the right endpoint {end}")));
        }
        if x == end {
            return Ok(1.0);
        }
    }
    Ok(-((-1.0 / p.xi) * (p.xi * x / p.beta).ln_1p()).exp_m1())
}

/// Mean excess function `beta/(1-xi) + xi u/(1-xi)`.
pub fn gpd_me(p: &GpdParams, u: f64) -> Result<f64> {
    if p.xi >= 1.0 {
        return Err(domain(format!("the mean excess needs xi < 1, got {}", p.xi)));
    }
    if !(u >= 0.0) || (p.xi < 0.0 && u >= -p.beta / p.xi) {
        return Err(domain(format!("u = {u} outside the GPD support")));
    }
    Ok((p.beta + p.xi * u) / (1.0 - p.xi))
}

/// A uniform draw on `(0, 1]`.
pub(crate) fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    Ok(())
}

/// Pareto sample `U^(-xi)`, so that `P(X > x) = x^(-1/xi)` for `x >= 1`.
pub fn sample_pareto(xi: f64, n: usize, rng: RngStream) -> Result<OrderedSample> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(invalid(format!("Pareto needs xi > 0, got {xi}")));
    }
    check_n(n)?;
    let mut r = rng.rng();
    OrderedSample::from_values((0..n).map(|_| open_uniform(&mut r).powf(-xi)).collect())
}

pub fn gpd_quantile_tail(p: &GpdParams, u: f64) -> f64 {
    if p.xi.abs() < XI_ZERO {
        -p.beta * u.ln()
    } else {
        p.beta * (u.powf(-p.xi) - 1.0) / p.xi
    }
}

pub fn sample_gpd(p: &GpdParams, n: usize, rng: RngStream) -> Result<OrderedSample> {
    check_n(n)?;
    let mut r = rng.rng();
    OrderedSample::from_values((0..n).map(|_| gpd_quantile_tail(p, open_uniform(&mut r))).collect())
}

/// Tail quantile `x^(-1/5) (1 - ln(x) / 10)` of the Lambert-W law, `x` in `(0, 1]`.
pub fn nonstd_quantile_tail(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(domain(format!("tail probability must lie in (0,1], got {x}")));
    }
    Ok(x.powf(-0.2) * (1.0 - x.ln() / 10.0))
}

/// Survival function `W(2 y e^2)^5 y^(-5) / 32` for `y >= 1`.
pub fn nonstd_sf(y: f64) -> Result<f64> {
    if !(y >= 1.0) {
        return Err(domain(format!("survival function needs y >= 1, got {y}")));
    }
    let w = numeric::lambertw(2.0 * y * std::f64::consts::E.powi(2))?;
    Ok((w / y).powi(5) / 32.0)
}

pub fn sample_nonstd(n: usize, rng: RngStream) -> Result<OrderedSample> {
    check_n(n)?;
    let mut r = rng.rng();
    OrderedSample::from_values((0..n).map(|_| nonstd_quantile_tail(open_uniform(&mut r)).unwrap()).collect())
}

pub use crate::numeric::lambertw;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::empirical_me;

    #[test]
    fn gpd_cdf_examples() {
        assert_eq!(gpd_cdf(&GpdParams::new(0.0, 1.0).unwrap(), 0.0).unwrap(), 0.0);
        assert!((gpd_cdf(&GpdParams::new(1.0, 1.0).unwrap(), 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(gpd_cdf(&GpdParams::new(-0.5, 1.0).unwrap(), 2.0).unwrap(), 1.0);
        assert!(gpd_cdf(&GpdParams::new(-0.5, 1.0).unwrap(), 2.5).is_err());
        assert!(gpd_cdf(&GpdParams::new(0.5, 1.0).unwrap(), -1.0).is_err());
        let near = gpd_cdf(&GpdParams::new(1e-13, 1.0).unwrap(), 1.0).unwrap();
        assert!((near - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn gpd_me_examples() {
        assert_eq!(gpd_me(&GpdParams::new(0.0, 1.0).unwrap(), 7.0).unwrap(), 1.0);
        assert!((gpd_me(&GpdParams::new(0.25, 1.0).unwrap(), 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(gpd_me(&GpdParams::new(1.0, 1.0).unwrap(), 1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn pareto_tail_frequency() {
        let s = sample_pareto(0.25, 100_000, RngStream::new(11, 0)).unwrap();
        let p = s.values().iter().filter(|&&x| x > 2.0).count() as f64 / 1e5;
        let se = (0.0625f64 * 0.9375 / 1e5).sqrt();
        assert!((p - 0.0625).abs() < 3.0 * se, "{p}");
        assert!(s.values().iter().all(|&x| x >= 1.0));
        assert_eq!(sample_pareto(0.25, 1, RngStream::new(1, 0)), Err(Error::TooFewObservations(1)));
    }

    #[test]
    fn inverse_transform_at_median() {
        assert_eq!(0.5f64.powf(-1.0), 2.0);
        assert_eq!(gpd_quantile_tail(&GpdParams::new(1.0, 1.0).unwrap(), 0.5), 1.0);
    }

    #[test]
    fn gpd_mean_excess_is_linear() {
        let p = GpdParams::new(0.25, 1.0).unwrap();
        let s = sample_gpd(&p, 100_000, RngStream::new(5, 2)).unwrap();
        for u in [0.5, 1.0, 2.0] {
            let exc: Vec<f64> = s.values().iter().filter(|&&x| x > u).map(|x| x - u).collect();
            let m = exc.len() as f64;
            let mean = exc.iter().sum::<f64>() / m;
            let var = exc.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let want = gpd_me(&p, u).unwrap();
            assert!((empirical_me(&s, u).unwrap() - want).abs() < 3.0 * (var / m).sqrt(), "u={u}");
        }
    }

    #[test]
    fn nonstd_examples() {
        assert_eq!(nonstd_quantile_tail(1.0).unwrap(), 1.0);
        assert!((nonstd_sf(1.0).unwrap() - 1.0).abs() < 1e-14);
        for x in [0.5, 0.01, 1e-6] {
            let back = nonstd_sf(nonstd_quantile_tail(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-10 * x.max(1e-300).max(1.0), "{x} {back}");
            assert!(((back - x) / x).abs() < 1e-10);
        }
        assert!(nonstd_quantile_tail(0.0).is_err());
        assert!(nonstd_sf(0.5).is_err());
    }

    #[test]
    fn nonstd_tail_is_regularly_varying() {
        let dev = |y: f64| (nonstd_sf(2.0 * y).unwrap() / nonstd_sf(y).unwrap() - 2f64.powi(-5)).abs();
        assert!(dev(1e6) < dev(1e3));
        let s = sample_nonstd(100, RngStream::new(3, 0)).unwrap();
        assert!(s.values().iter().all(|&x| x >= 1.0));
    }
}
