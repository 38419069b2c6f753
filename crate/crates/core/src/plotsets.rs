//! QQ and mean excess plot sets, their normalized versions, and a finite
//! Hausdorff distance to the limit line.

use serde::{Deserialize, Serialize};

use crate::data::{OrderedSample, TailIndexEstimate};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotConfig {
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
}

impl PlotConfig {
    pub fn new(k: usize, eps: f64, alpha: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::BadK(format!("k must be at least 2, got {k}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0,1), got {eps}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self { k, eps, alpha })
    }

    /// A configuration whose window keeps every index down to `j = 1`.
    pub fn untruncated(k: usize) -> Result<Self> {
        Self::new(k, 1e-12, 0.05)
    }

    /// Checks `k < n` for a sample of size `n`.
    pub fn check_sample(&self, n: usize) -> Result<()> {
        if self.k >= n {
            return Err(Error::BadK(format!("k = {} must be below n = {n}", self.k)));
        }
        Ok(())
    }

    /// Smallest kept index, `ceil(eps k)` and at least 1.
    pub fn first_index(&self) -> usize {
        ((self.eps * self.k as f64 - 1e-9).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Qq,
    QqNormalized,
    Me,
    MeNormalizedLtHalf,
    MeNormalizedGtHalf,
    MeNormalizedGtOne,
    Hill,
    Pickands,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Normalizers {
    pub x_k: Option<f64>,
    pub x_1: Option<f64>,
    pub xi: Option<f64>,
    pub b_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSet {
    pub kind: PlotKind,
    pub points: Vec<(f64, f64)>,
    /// Order statistic index behind each point.
    pub indices: Vec<usize>,
    pub config: Option<PlotConfig>,
    pub normalizers: Normalizers,
}

impl PlotSet {
    pub(crate) fn diagnostic(kind: PlotKind, points: Vec<(f64, f64)>) -> Self {
        let indices = points.iter().map(|p| p.0 as usize).collect();
        Self { kind, points, indices, config: None, normalizers: Normalizers::default() }
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)))
    }
}

/// `(-log(j/k), log(X(j)/X(k)))` for `j = k` down to `ceil(eps k)`.
pub fn qq_set(sample: &OrderedSample, cfg: &PlotConfig) -> Result<PlotSet> {
    cfg.check_sample(sample.n())?;
    let k = cfg.k;
    let xk = sample.positive_order_stat(k)?;
    let kf = k as f64;
    let indices: Vec<usize> = (cfg.first_index()..=k).rev().collect();
    let points = indices
        .iter()
        .map(|&j| ((kf / j as f64).ln(), (sample.order_stat(j) / xk).ln()))
        .collect();
    Ok(PlotSet {
        kind: PlotKind::Qq,
        points,
        indices,
        config: Some(*cfg),
        normalizers: Normalizers { x_k: Some(xk), ..Default::default() },
    })
}

/// The QQ points recentred by `xi` and blown up by `sqrt(k)`:
/// `(x, xi x + sqrt(k) (y - xi x))`.
pub fn qq_normalized_set(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
) -> Result<PlotSet> {
    if !(xi.xi > 0.0) {
        return Err(invalid(format!("xi must be positive, got {}", xi.xi)));
    }
    let mut set = qq_set(sample, cfg)?;
    let rk = (cfg.k as f64).sqrt();
    let x = xi.xi;
    for p in &mut set.points {
        p.1 = x * p.0 + rk * (p.1 - x * p.0);
    }
    set.kind = PlotKind::QqNormalized;
    set.normalizers.xi = Some(x);
    Ok(set)
}

/// Empirical mean excess at every order statistic `X(i)`, `i = 1..=upto`,
/// computed from running sums. `None` where the exceedance set is empty.
pub(crate) fn me_at_order_stats(sample: &OrderedSample, upto: usize) -> Vec<Option<f64>> {
    let v = sample.values();
    let mut prefix = Vec::with_capacity(upto + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in &v[..upto] {
        acc += x;
        prefix.push(acc);
    }
    (1..=upto)
        .map(|i| {
            let u = v[i - 1];
            let m = v[..i].partition_point(|&x| x > u);
            (m > 0).then(|| (prefix[m] - m as f64 * u) / m as f64)
        })
        .collect()
}

fn me_raw(sample: &OrderedSample, cfg: &PlotConfig) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>, f64)> {
    cfg.check_sample(sample.n())?;
    let k = cfg.k;
    if k < 3 {
        return Err(Error::BadK(format!("the ME plot needs k >= 3, got {k}")));
    }
    let xk = sample.positive_order_stat(k)?;
    let me = me_at_order_stats(sample, k);
    let indices: Vec<usize> = (cfg.first_index().max(2)..=k).collect();
    let mut xs = Vec::with_capacity(indices.len());
    let mut ms = Vec::with_capacity(indices.len());
    for &i in &indices {
        let u = sample.order_stat(i);
        xs.push(u);
        ms.push(me[i - 1].ok_or(Error::EmptyExceedanceSet(u))?);
    }
    Ok((indices, xs, ms, xk))
}

/// `(X(i)/X(k), M(X(i))/X(k))` for `i = max(2, ceil(eps k))..=k`.
pub fn me_set(sample: &OrderedSample, cfg: &PlotConfig) -> Result<PlotSet> {
    let (indices, xs, ms, xk) = me_raw(sample, cfg)?;
    let points = xs.iter().zip(&ms).map(|(x, m)| (x / xk, m / xk)).collect();
    Ok(PlotSet {
        kind: PlotKind::Me,
        points,
        indices,
        config: Some(*cfg),
        normalizers: Normalizers { x_k: Some(xk), ..Default::default() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeRegime {
    LtHalf,
    GtHalf,
    GtOne,
}

/// Normalized ME plot in one of the three shape regimes.
///
/// `known_b` is the tail quantile function `b(t) = F^{-1}(1 - 1/t)`, needed
/// only for `GtOne`.
pub fn me_normalized_set(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
    regime: MeRegime,
    known_b: Option<&dyn Fn(f64) -> f64>,
) -> Result<PlotSet> {
    let x = xi.xi;
    let ok = match regime {
        MeRegime::LtHalf => x > 0.0 && x < 0.5,
        MeRegime::GtHalf => x > 0.5 && x < 1.0,
        MeRegime::GtOne => x > 1.0,
    };
    if !ok {
        return Err(Error::RegimeMismatch(format!("xi = {x} is outside the {regime:?} regime")));
    }
    if regime == MeRegime::GtOne && known_b.is_none() {
        return Err(Error::MissingQuantileFunction);
    }
    let (indices, xs, ms, xk) = me_raw(sample, cfg)?;
    let k = cfg.k as f64;
    let rk = k.sqrt();
    let x1 = sample.order_stat(1);
    let slope = x / (1.0 - x);
    let b_n = known_b.map(|b| b(sample.n() as f64));
    let points = indices
        .iter()
        .zip(xs.iter().zip(&ms))
        .map(|(&i, (&xi_, &m))| {
            let t = (i as f64 / k).powf(-x);
            let first = t + rk * (xi_ / xk - t);
            let second = match regime {
                MeRegime::LtHalf => slope * t + rk * (m / xk - slope * t),
                MeRegime::GtHalf => slope * t + k * xk / x1 * (m / xk - slope * t),
                MeRegime::GtOne => m / (b_n.unwrap() / k),
            };
            (first, second)
        })
        .collect();
    let kind = match regime {
        MeRegime::LtHalf => PlotKind::MeNormalizedLtHalf,
        MeRegime::GtHalf => PlotKind::MeNormalizedGtHalf,
        MeRegime::GtOne => PlotKind::MeNormalizedGtOne,
    };
    Ok(PlotSet {
        kind,
        points,
        indices,
        config: Some(*cfg),
        normalizers: Normalizers { x_k: Some(xk), x_1: Some(x1), xi: Some(x), b_n },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    LineThroughOrigin,
    MeLine,
}

/// A segment of a line through the origin, `y = slope x` for `x` in `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSet {
    pub kind: LimitKind,
    pub slope: f64,
    pub window: (f64, f64),
}

impl LimitSet {
    /// The QQ limit `{(x, xi x)}` over the truncated window `0 <= x <= -log eps`.
    pub fn qq(xi: f64, eps: f64) -> Self {
        Self { kind: LimitKind::LineThroughOrigin, slope: xi, window: (0.0, -eps.ln()) }
    }

    /// The ME limit `{(t, xi t / (1 - xi)) : t >= 1}`.
    pub fn me(xi: f64) -> Self {
        Self { kind: LimitKind::MeLine, slope: xi / (1.0 - xi), window: (1.0, f64::INFINITY) }
    }
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Segment discretization used by [`hausdorff_to_limit`].
pub const SEGMENT_POINTS: usize = 1000;

/// Hausdorff distance between the plot points and the limit segment over the
/// plot's x-range. The segment side is evaluated on [`SEGMENT_POINTS`] evenly
/// spaced points.
pub fn hausdorff_to_limit(plot: &PlotSet, limit: &LimitSet) -> Result<f64> {
    if plot.points.is_empty() {
        return Err(invalid("empty plot"));
    }
    if !limit.slope.is_finite() {
        return Err(invalid("limit slope must be finite"));
    }
    let (lo, hi) = plot.x_range();
    let tol = 1e-12 * (1.0 + hi.abs());
    if lo < limit.window.0 - tol || hi > limit.window.1 + tol {
        return Err(Error::WindowMismatch(format!(
            "plot x-range [{lo}, {hi}] not inside limit window [{}, {}]",
            limit.window.0, limit.window.1
        )));
    }
    let a = (lo, limit.slope * lo);
    let b = (hi, limit.slope * hi);
    let to_segment = plot.points.iter().map(|&p| dist_to_segment(p, a, b)).fold(0.0, f64::max);
    let mut to_points: f64 = 0.0;
    for s in 0..SEGMENT_POINTS {
        let t = s as f64 / (SEGMENT_POINTS - 1) as f64;
        let q = (lo + t * (hi - lo), limit.slope * (lo + t * (hi - lo)));
        let d = plot
            .points
            .iter()
            .map(|p| (p.0 - q.0).hypot(p.1 - q.1))
            .fold(f64::INFINITY, f64::min);
        to_points = to_points.max(d);
    }
    Ok(to_segment.max(to_points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EstimatorKind;

    fn s(v: &[f64]) -> OrderedSample {
        OrderedSample::from_values(v.to_vec()).unwrap()
    }

    fn pareto_grid(n: usize, xi: f64) -> OrderedSample {
        s(&(1..=n).map(|j| (j as f64 / n as f64).powf(-xi)).collect::<Vec<_>>())
    }

    fn fixed(x: f64) -> TailIndexEstimate {
        TailIndexEstimate { xi: x, method: EstimatorKind::Fixed, k: 0, nonpositive: false }
    }

    #[test]
    fn qq_small_example() {
        let p = qq_set(&s(&[8.0, 4.0, 2.0, 1.0]), &PlotConfig::untruncated(2).unwrap()).unwrap();
        let l2 = 2f64.ln();
        assert_eq!(p.points, vec![(0.0, 0.0), (l2, l2)]);
        assert_eq!(p.indices, vec![2, 1]);
    }

    #[test]
    fn qq_truncation_is_inclusive() {
        let cfg = PlotConfig::new(500, 0.05, 0.05).unwrap();
        assert_eq!(cfg.first_index(), 25);
        let p = qq_set(&pareto_grid(5000, 0.25), &cfg).unwrap();
        assert_eq!(p.points.len(), 476);
        assert_eq!(*p.indices.last().unwrap(), 25);
        assert!(p.points.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn qq_exact_pareto_on_line() {
        let p = qq_set(&pareto_grid(1000, 0.3), &PlotConfig::new(200, 0.01, 0.05).unwrap()).unwrap();
        for (x, y) in p.points {
            assert!((y - 0.3 * x).abs() < 1e-13);
        }
    }

    #[test]
    fn qq_normalized_exact_pareto_collapses() {
        let cfg = PlotConfig::new(100, 0.05, 0.05).unwrap();
        let p = qq_normalized_set(&pareto_grid(1000, 0.25), &cfg, &fixed(0.25)).unwrap();
        assert_eq!(p.points[0], (0.0, 0.0));
        for (x, y) in p.points {
            assert!((y - 0.25 * x).abs() < 1e-11);
        }
    }

    #[test]
    fn me_small_example() {
        let p = me_set(&s(&[4.0, 3.0, 2.0, 1.0]), &PlotConfig::untruncated(3).unwrap()).unwrap();
        assert_eq!(p.points, vec![(1.5, 0.5), (1.0, 0.75)]);
        assert_eq!(p.indices, vec![2, 3]);
    }

    #[test]
    fn me_handles_ties_with_strict_exceedance() {
        let x = s(&[5.0, 4.0, 4.0, 2.0, 1.0]);
        let me = me_at_order_stats(&x, 4);
        assert_eq!(me[2], Some(1.0));
        assert_eq!(me[1], Some(1.0));
        assert_eq!(me[0], None);
    }

    #[test]
    fn me_normalized_regimes() {
        let cfg = PlotConfig::new(100, 0.1, 0.05).unwrap();
        let x = pareto_grid(1000, 0.25);
        let p = me_normalized_set(&x, &cfg, &fixed(0.25), MeRegime::LtHalf, None).unwrap();
        for (&i, pt) in p.indices.iter().zip(&p.points) {
            assert!((pt.0 - (i as f64 / 100.0).powf(-0.25)).abs() < 1e-12);
        }
        assert!(matches!(
            me_normalized_set(&x, &cfg, &fixed(0.25), MeRegime::GtHalf, None),
            Err(Error::RegimeMismatch(_))
        ));
        assert_eq!(
            me_normalized_set(&x, &cfg, &fixed(1.5), MeRegime::GtOne, None),
            Err(Error::MissingQuantileFunction)
        );
        let b = |t: f64| t.powf(1.5);
        let g = me_normalized_set(&pareto_grid(1000, 1.5), &cfg, &fixed(1.5), MeRegime::GtOne, Some(&b)).unwrap();
        assert_eq!(g.normalizers.b_n, Some(1000f64.powf(1.5)));
    }

    #[test]
    fn hausdorff_geometry() {
        let on_line = PlotSet::diagnostic(PlotKind::Qq, (0..=10).map(|i| (i as f64 * 0.1, 0.05 * i as f64)).collect());
        let d = hausdorff_to_limit(&on_line, &LimitSet::qq(0.5, 0.3)).unwrap();
        assert!(d < 0.06, "{d}");
        let dense = PlotSet::diagnostic(PlotKind::Qq, (0..=2000).map(|i| (i as f64 / 2000.0, 0.5 * i as f64 / 2000.0)).collect());
        assert!(hausdorff_to_limit(&dense, &LimitSet::qq(0.5, 0.3)).unwrap() < 1e-3);
        let one = PlotSet::diagnostic(PlotKind::Qq, vec![(0.5, 0.3)]);
        let d = hausdorff_to_limit(&one, &LimitSet::qq(0.0, 0.1)).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        let wide = PlotSet::diagnostic(PlotKind::Qq, vec![(0.0, 0.0), (5.0, 1.0)]);
        assert!(matches!(hausdorff_to_limit(&wide, &LimitSet::qq(0.2, 0.5)), Err(Error::WindowMismatch(_))));
    }
}
