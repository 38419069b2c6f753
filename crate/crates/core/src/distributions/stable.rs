use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{open_uniform, stilde};
use crate::data::OrderedSample;
use crate::error::{domain, invalid, Error, Result};
use crate::numeric::gamma;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StableKind {
    /// Plain alpha-stable law with unit scale and zero location.
    SimulationLaw,
    /// Limit of the centred top-`k` sums for `1/2 < xi < 1`.
    LimitS,
    /// Positive stable limit for `xi > 1`.
    LimitS1,
    /// Limit of the ME fluctuation with estimated normalization, `1/2 < xi < 1`.
    LimitSTilde,
}

/// A stable law by index `alpha = 1/xi`, skewness and role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSpec {
    pub alpha: f64,
    pub skew: f64,
    pub kind: StableKind,
}

impl StableSpec {
    pub fn new(alpha: f64, skew: f64, kind: StableKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0,2], got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&skew) {
            return Err(invalid(format!("skew must lie in [-1,1], got {skew}")));
        }
        let ok = match kind {
            StableKind::SimulationLaw => true,
            StableKind::LimitS | StableKind::LimitSTilde => alpha > 1.0 && alpha < 2.0,
            StableKind::LimitS1 => alpha < 1.0,
        };
        if !ok {
            return Err(domain(format!("alpha = {alpha} is not valid for {kind:?}")));
        }
        Ok(Self { alpha, skew, kind })
    }

    pub fn simulation(alpha: f64, skew: f64) -> Result<Self> {
        Self::new(alpha, skew, StableKind::SimulationLaw)
    }

    pub fn limit(kind: StableKind, xi: f64) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(invalid(format!("xi must be positive, got {xi}")));
        }
        Self::new(1.0 / xi, 1.0, kind)
    }

    pub fn xi(&self) -> f64 {
        1.0 / self.alpha
    }

    /// Scale `sigma` and skewness of the plain stable law equal to this one.
    /// `None` for `LimitSTilde`, which is not stable.
    pub(crate) fn as_plain_stable(&self) -> Option<(f64, f64)> {
        let a = self.alpha;
        let xi = self.xi();
        match self.kind {
            StableKind::SimulationLaw => Some((1.0, self.skew)),
            StableKind::LimitS => {
                let c = gamma(2.0 - a) * (FRAC_PI_2 * a).cos() / (1.0 - xi);
                Some(((-c).powf(1.0 / a), 1.0))
            }
            StableKind::LimitS1 => {
                let c = gamma(1.0 - a) * (FRAC_PI_2 * a).cos();
                Some((c.powf(1.0 / a), 1.0))
            }
            StableKind::LimitSTilde => None,
        }
    }
}

/// Characteristic function `exp(-|t|^a (1 - i b sgn(t) tan(pi a/2)))` of the
/// unit-scale stable law, with `exp(-|t| (1 + i b (2/pi) sgn(t) ln|t|))` at `a = 1`.
pub fn stable_cf(alpha: f64, skew: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let at = t.abs();
    let sg = t.signum();
    let expo = if (alpha - 1.0).abs() < 1e-12 {
        -Complex64::new(at, at * skew * 2.0 / PI * sg * at.ln())
    } else {
        -Complex64::new(1.0, -skew * sg * (FRAC_PI_2 * alpha).tan()) * at.powf(alpha)
    };
    expo.exp()
}

/// One Chambers–Mallows–Stuck draw from the unit-scale stable law with the
/// characteristic function of [`stable_cf`].
///
/// For `alpha > 1` this law already has mean zero, so no shift is applied.
pub fn stable_draw<R: Rng + ?Sized>(alpha: f64, skew: f64, rng: &mut R) -> f64 {
    let v = PI * (open_uniform(rng) - 0.5);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        let pv = FRAC_PI_2 + skew * v;
        return 2.0 / PI * (pv * v.tan() - skew * ((FRAC_PI_2 * w * v.cos()) / pv).ln());
    }
    let tan = (FRAC_PI_2 * alpha).tan();
    let b = (skew * tan).atan() / alpha;
    let s = (1.0 + skew * skew * tan * tan).powf(1.0 / (2.0 * alpha));
    let avb = alpha * (v + b);
    s * avb.sin() / v.cos().powf(1.0 / alpha) * ((v - avb).cos() / w).powf((1.0 - alpha) / alpha)
}

/// `n` draws from a `SimulationLaw` spec, sorted in decreasing order.
pub fn sample_stable(spec: &StableSpec, n: usize, rng: RngStream) -> Result<OrderedSample> {
    if spec.kind != StableKind::SimulationLaw {
        return Err(domain("sample_stable draws only from the simulation law"));
    }
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let mut r = rng.rng();
    OrderedSample::from_values((0..n).map(|_| stable_draw(spec.alpha, spec.skew, &mut r)).collect())
}

/// Characteristic function of the law described by `spec`.
///
/// `LimitS` uses `exp{(1/(1-xi)) G(2-1/xi) cos(pi/(2xi)) |t|^(1/xi) (1 - i sgn(t) tan(pi/(2xi)))}`,
/// `LimitS1` uses `exp{-G(1-1/xi) cos(pi/(2xi)) |t|^(1/xi) (1 - i sgn(t) tan(pi/(2xi)))}`,
/// `LimitSTilde` uses `e^{it} (1 + it/(1-xi) - J(t)/xi)^(-1)` with `J` from
/// [`stilde::stilde_j_quadrature`].
pub fn limit_cf(spec: &StableSpec, t: f64) -> Result<Complex64> {
    let spec = StableSpec::new(spec.alpha, spec.skew, spec.kind)?;
    match spec.kind {
        StableKind::SimulationLaw => Ok(stable_cf(spec.alpha, spec.skew, t)),
        StableKind::LimitS | StableKind::LimitS1 => {
            if t == 0.0 {
                return Ok(Complex64::new(1.0, 0.0));
            }
            let a = spec.alpha;
            let xi = spec.xi();
            let coef = if spec.kind == StableKind::LimitS {
                gamma(2.0 - a) * (FRAC_PI_2 * a).cos() / (1.0 - xi)
            } else {
                -gamma(1.0 - a) * (FRAC_PI_2 * a).cos()
            };
            let bracket = Complex64::new(1.0, -t.signum() * (FRAC_PI_2 * a).tan());
            Ok((bracket * coef * t.abs().powf(a)).exp())
        }
        StableKind::LimitSTilde => {
            let j = stilde::stilde_j_quadrature(spec.alpha, t)?;
            Ok(stilde::stilde_cf_from_j(spec.xi(), t, j))
        }
    }
}

/// Characteristic function evaluation used by the inversion routine; the
/// `LimitSTilde` branch uses the fast series/asymptotic evaluation of `J`.
pub(crate) fn cf_fast(spec: &StableSpec, t: f64) -> Complex64 {
    match spec.kind {
        StableKind::LimitSTilde => stilde::stilde_cf_from_j(spec.xi(), t, stilde::stilde_j(spec.alpha, t)),
        _ => limit_cf(spec, t).expect("validated spec"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cf_normalization_and_symmetry() {
        for kind in [StableKind::LimitS, StableKind::LimitSTilde] {
            let s = StableSpec::limit(kind, 2.0 / 3.0).unwrap();
            assert_eq!(limit_cf(&s, 0.0).unwrap(), Complex64::new(1.0, 0.0));
            for t in [0.3, 1.0, 4.5] {
                let (a, b) = (limit_cf(&s, t).unwrap(), limit_cf(&s, -t).unwrap());
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
        let s1 = StableSpec::limit(StableKind::LimitS1, 1.5).unwrap();
        assert_eq!(limit_cf(&s1, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cf_modulus_bounded() {
        for (kind, xi) in [(StableKind::LimitS, 2.0 / 3.0), (StableKind::LimitS1, 1.5), (StableKind::LimitSTilde, 0.7)] {
            let s = StableSpec::limit(kind, xi).unwrap();
            for i in -100..=100 {
                let t = i as f64 / 10.0;
                assert!(limit_cf(&s, t).unwrap().norm() <= 1.0 + 1e-12, "{kind:?} t={t}");
            }
        }
    }

    #[test]
    fn gamma_anchor() {
        assert!((gamma(2.0 - 1.5) - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn limit_s_matches_plain_stable_with_mapped_scale() {
        let s = StableSpec::limit(StableKind::LimitS, 2.0 / 3.0).unwrap();
        let (sigma, b) = s.as_plain_stable().unwrap();
        for t in [-3.0, -0.4, 0.7, 2.0] {
            let d = limit_cf(&s, t).unwrap() - stable_cf(1.5, b, sigma * t);
            assert!(d.norm() < 1e-13);
        }
        let s1 = StableSpec::limit(StableKind::LimitS1, 1.5).unwrap();
        let (sigma, b) = s1.as_plain_stable().unwrap();
        for t in [-3.0, 0.7] {
            assert!((limit_cf(&s1, t).unwrap() - stable_cf(s1.alpha, b, sigma * t)).norm() < 1e-13);
        }
    }

    #[test]
    fn validation() {
        assert!(StableSpec::simulation(0.0, 0.0).is_err());
        assert!(StableSpec::simulation(1.5, 1.2).is_err());
        assert!(matches!(StableSpec::limit(StableKind::LimitSTilde, 0.4), Err(Error::InvalidParameter(_))));
        assert!(matches!(StableSpec::limit(StableKind::LimitSTilde, 1.2), Err(Error::DomainError(_))));
        assert!(matches!(StableSpec::limit(StableKind::LimitS1, 0.8), Err(Error::DomainError(_))));
    }

    fn ecf_sup_error(alpha: f64, skew: f64, seed: u64) -> f64 {
        let s = sample_stable(&StableSpec::simulation(alpha, skew).unwrap(), 100_000, RngStream::new(seed, 0)).unwrap();
        let mut worst: f64 = 0.0;
        for i in -20..=20 {
            let t = i as f64 / 10.0;
            let e: Complex64 = s.values().iter().map(|&x| Complex64::new(0.0, t * x).exp()).sum::<Complex64>() / 1e5;
            worst = worst.max((e - stable_cf(alpha, skew, t)).norm());
        }
        worst
    }

    #[test]
    fn cms_matches_cf() {
        assert!(ecf_sup_error(1.5, 1.0, 1) < 0.01);
        assert!(ecf_sup_error(0.8, -0.5, 2) < 0.01);
        assert!(ecf_sup_error(1.0, 0.7, 3) < 0.01);
    }

    #[test]
    fn gaussian_case_has_variance_two() {
        let s = sample_stable(&StableSpec::simulation(2.0, 0.0).unwrap(), 100_000, RngStream::new(4, 0)).unwrap();
        let m = s.values().iter().sum::<f64>() / 1e5;
        let v = s.values().iter().map(|x| (x - m).powi(2)).sum::<f64>() / (1e5 - 1.0);
        assert!(m.abs() < 3.0 * (2.0f64 / 1e5).sqrt());
        assert!((v - 2.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn alpha_above_one_has_zero_mean() {
        let s = sample_stable(&StableSpec::simulation(1.8, 1.0).unwrap(), 100_000, RngStream::new(6, 0)).unwrap();
        let m = s.values().iter().sum::<f64>() / 1e5;
        assert!(m.abs() < 0.05, "{m}");
    }
}
