use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::data::{empirical_me, OrderedSample};
use crate::error::{invalid, Result};
use crate::numeric::{gamma, integrate_complex};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `e^{ix} - 1 - ix` without cancellation for small `x`.
fn expm1_minus(x: f64) -> Complex64 {
    let half = (0.5 * x).sin();
    let re = -2.0 * half * half;
    let im = if x.abs() < 0.1 {
        let x2 = x * x;
        let mut term = -x * x2 / 6.0;
        let mut s = term;
        for n in (5..=15).step_by(2) {
            term *= -x2 / ((n - 1) * n) as f64;
            s += term;
        }
        s
    } else {
        x.sin() - x
    };
    Complex64::new(re, im)
}

/// `J(t) = int_0^1 (e^{i t u} - 1 - i t u) u^(-1-alpha) du` by adaptive
/// Gauss–Kronrod quadrature to relative tolerance `1e-10`.
///
/// The substitution `u = v^(2/(2-alpha))` turns the `u^(1-alpha)` endpoint
/// behaviour into a smooth integrand.
pub fn stilde_j_quadrature(alpha: f64, t: f64) -> Result<Complex64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid(format!("J needs alpha in (1,2), got {alpha}")));
    }
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = 2.0 / (2.0 - alpha);
    let f = |v: f64| {
        if v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = v.powf(p);
        expm1_minus(t * u) * (p * v.powf(p - 1.0) * u.powf(-1.0 - alpha))
    };
    let scale = t * t / (2.0 * (2.0 - alpha));
    let (v, _) = integrate_complex(f, 0.0, 1.0, 1e-13 * scale.min(1.0), 1e-10, 200_000)?;
    Ok(v)
}

fn j_series(alpha: f64, t: f64) -> Complex64 {
    let it = I * t;
    let mut pow = it;
    let mut fact = 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 2..200 {
        pow *= it;
        fact *= m as f64;
        let term = pow / (fact * (m as f64 - alpha));
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) && m > 4 {
            break;
        }
    }
    sum
}

/// Generalized exponential integral `E_p(z) = int_1^inf e^{-z s} s^(-p) ds`
/// by the modified Lentz continued fraction, for `|z|` not small.
fn expint_cf(p: f64, z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = z + p;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (p - 1.0 + i as f64);
        b += 2.0;
        d = 1.0 / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

fn j_asymptotic(alpha: f64, t: f64) -> Complex64 {
    let g = gamma(2.0 - alpha) / (alpha * (alpha - 1.0));
    let z = Complex64::new(0.0, -t);
    let power = Complex64::from_polar(t.powf(alpha), -std::f64::consts::FRAC_PI_2 * alpha);
    power * g - expint_cf(1.0 + alpha, z) + 1.0 / alpha + I * t / (alpha - 1.0)
}

/// Fast evaluation of the same `J(t)`: power series for `|t| <= 8`, otherwise
/// `G(-a)(-it)^a - E_{1+a}(-it) + 1/a + it/(a-1)`.
pub fn stilde_j(alpha: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if t.abs() <= 8.0 {
        return j_series(alpha, t);
    }
    let j = j_asymptotic(alpha, t.abs());
    if t > 0.0 {
        j
    } else {
        j.conj()
    }
}

pub(crate) fn stilde_cf_from_j(xi: f64, t: f64, j: Complex64) -> Complex64 {
    let denom = Complex64::new(1.0, t / (1.0 - xi)) - j / xi;
    Complex64::new(0.0, t).exp() / denom
}

/// Poisson terms kept exactly before the Gaussian remainder.
pub const STILDE_TERMS: usize = 256;

/// One draw of the ME fluctuation limit for `1/2 < xi < 1`.
///
/// With arrival times `G_1 < G_2 < ...` of a unit rate Poisson process,
/// `S = 1 - G_1/(1-xi) + sum_{l>=2} (G_1/G_l)^xi - int_{G_1}^inf (G_1/s)^xi ds`,
/// the compensated sum converging. The first [`STILDE_TERMS`] arrivals are
/// used exactly and the rest are replaced by their Gaussian approximation.
pub fn stilde_draw<R: Rng + ?Sized>(xi: f64, rng: &mut R) -> f64 {
    let g: f64 = Exp1.sample(rng);
    let mut arrival = g;
    let mut sum = 0.0;
    for _ in 1..STILDE_TERMS {
        let e: f64 = Exp1.sample(rng);
        arrival += e;
        sum += (xi * (g / arrival).ln()).exp();
    }
    let gx = g.powf(xi);
    let comp = gx * (arrival.powf(1.0 - xi) - g.powf(1.0 - xi)) / (1.0 - xi);
    let var = gx * gx * arrival.powf(1.0 - 2.0 * xi) / (2.0 * xi - 1.0);
    let z: f64 = StandardNormal.sample(rng);
    1.0 - g / (1.0 - xi) + sum - comp + var.sqrt() * z
}

/// The finite-sample version of the same quantity,
/// `(k X(k)/X(1)) (M(X(j))/X(k) - (xi/(1-xi)) (j/k)^(-xi)) (j/k)`.
pub fn stilde_finite_statistic(sample: &OrderedSample, k: usize, j: usize, xi: f64) -> Result<f64> {
    if !(2 <= j && j <= k && k < sample.n()) {
        return Err(invalid(format!("need 2 <= j <= k < n, got j={j}, k={k}, n={}", sample.n())));
    }
    let xk = sample.positive_order_stat(k)?;
    let x1 = sample.order_stat(1);
    let m = empirical_me(sample, sample.order_stat(j))?;
    let r = j as f64 / k as f64;
    Ok(k as f64 * xk / x1 * (m / xk - xi / (1.0 - xi) * r.powf(-xi)) * r)
}
