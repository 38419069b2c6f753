//! Confidence bands around truncated QQ and ME plots, and coverage
//! experiments for them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{hill_estimate, OrderedSample, TailIndexEstimate};
use crate::distributions::{
    limit_quantile, sample_gpd, sample_nonstd, sample_pareto, sample_stable, GpdParams, QuantileMethod,
    StableKind, StableSpec,
};
use crate::error::{invalid, Error, Result};
use crate::limitsim::{
    me_band_quantiles_multi, me_c_quantile_multi, qq_sup_quantile, QuantileEstimate, DEFAULT_GRID,
    DEFAULT_PATHS,
};
use crate::numeric::normal_quantile;
use crate::plotsets::{me_set, qq_set, PlotConfig, PlotSet};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandRegime {
    Qq,
    MeLtHalf,
    MeGtHalf,
}

/// One band cell around a plot point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandCell {
    pub x: f64,
    pub y: f64,
    pub xlo: f64,
    pub xhi: f64,
    pub ylo: f64,
    pub yhi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuantilesUsed {
    pub c: Option<QuantileEstimate>,
    pub d: Option<QuantileEstimate>,
    pub stilde_lower: Option<QuantileEstimate>,
    pub stilde_upper: Option<QuantileEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub base: PlotSet,
    pub cells: Vec<BandCell>,
    /// Nominal coverage `1 - alpha`.
    pub level: f64,
    pub regime: BandRegime,
    pub xi: TailIndexEstimate,
    pub quantiles_used: QuantilesUsed,
    pub warning: Option<String>,
}

/// Monte Carlo settings for the ME band quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub n_paths: usize,
    pub grid: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { n_paths: DEFAULT_PATHS, grid: DEFAULT_GRID }
    }
}

/// Guard zone around the open case `xi = 1/2`.
pub const REGIME_GUARD: (f64, f64) = (0.48, 0.52);

/// `xi + z_{0.975} xi / sqrt(k)`, an upper confidence value for the Hill estimate.
pub fn conservative_xi(est: &TailIndexEstimate) -> TailIndexEstimate {
    let z = normal_quantile(0.975);
    TailIndexEstimate { xi: est.xi * (1.0 + z / (est.k.max(1) as f64).sqrt()), ..*est }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// QQ band for several levels; see [`qq_band`].
pub fn qq_band_levels(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
    alphas: &[f64],
) -> Result<Vec<ConfidenceBand>> {
    if !(xi.xi > 0.0) {
        return Err(invalid(format!("band width needs xi > 0, got {}", xi.xi)));
    }
    let base = qq_set(sample, cfg)?;
    let rk = (cfg.k as f64).sqrt();
    alphas
        .iter()
        .map(|&alpha| {
            check_alpha(alpha)?;
            let c = qq_sup_quantile(1.0 - alpha / 2.0, cfg.eps)?;
            let h = xi.xi * c.value / rk;
            let cells = base
                .points
                .iter()
                .map(|&(x, y)| BandCell { x, y, xlo: x, xhi: x, ylo: y - h, yhi: y + h })
                .collect();
            Ok(ConfidenceBand {
                base: base.clone(),
                cells,
                level: 1.0 - alpha,
                regime: BandRegime::Qq,
                xi: *xi,
                quantiles_used: QuantilesUsed { c: Some(c), ..Default::default() },
                warning: None,
            })
        })
        .collect()
}

/// Truncated QQ plot with vertical half-width `xi c / sqrt(k)`, where `c` is
/// the `(1 - alpha/2)`-quantile of `sup_{t>=delta} |W(t)|/t`, `delta = eps/(1-eps)`.
pub fn qq_band(sample: &OrderedSample, cfg: &PlotConfig, xi: &TailIndexEstimate) -> Result<ConfidenceBand> {
    Ok(qq_band_levels(sample, cfg, xi, &[cfg.alpha])?.remove(0))
}

/// Which ME band recipe applies to `xi`, or why none does.
pub fn me_regime(xi: f64) -> Result<BandRegime> {
    if !(xi > 0.0) {
        return Err(invalid(format!("band width needs xi > 0, got {xi}")));
    }
    if xi >= 1.0 {
        return Err(Error::MeanDoesNotExist(xi));
    }
    if xi >= REGIME_GUARD.0 && xi <= REGIME_GUARD.1 {
        return Err(Error::RegimeBoundary(xi));
    }
    Ok(if xi < 0.5 { BandRegime::MeLtHalf } else { BandRegime::MeGtHalf })
}

/// ME band for several levels from one set of simulated paths, so the bands
/// are nested; see [`me_band`].
pub fn me_band_levels(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
    alphas: &[f64],
    rng: RngStream,
    mc: McSettings,
) -> Result<Vec<ConfidenceBand>> {
    let regime = me_regime(xi.xi)?;
    for &a in alphas {
        check_alpha(a)?;
    }
    let base = me_set(sample, cfg)?;
    let rk = (cfg.k as f64).sqrt();
    let levels: Vec<f64> = alphas.iter().map(|a| 1.0 - a / 2.0).collect();
    match regime {
        BandRegime::MeLtHalf => {
            let q = me_band_quantiles_multi(&[xi.xi], cfg.eps, &levels, mc.n_paths, mc.grid, rng)?.remove(0);
            Ok(alphas
                .iter()
                .zip(q)
                .map(|(&alpha, (c, d))| {
                    let (hx, hy) = (c.value / rk, d.value / rk);
                    let cells = base
                        .points
                        .iter()
                        .map(|&(x, y)| BandCell { x, y, xlo: x - hx, xhi: x + hx, ylo: y - hy, yhi: y + hy })
                        .collect();
                    ConfidenceBand {
                        base: base.clone(),
                        cells,
                        level: 1.0 - alpha,
                        regime,
                        xi: *xi,
                        quantiles_used: QuantilesUsed { c: Some(c), d: Some(d), ..Default::default() },
                        warning: None,
                    }
                })
                .collect())
        }
        _ => {
            let cq = me_c_quantile_multi(&[xi.xi], cfg.eps, &levels, mc.n_paths, mc.grid, rng)?.remove(0);
            let spec = StableSpec::limit(StableKind::LimitSTilde, xi.xi)?;
            let x1 = sample.order_stat(1);
            let xk = sample.order_stat(cfg.k);
            alphas
                .iter()
                .zip(cq)
                .map(|(&alpha, c)| {
                    let lo = limit_quantile(&spec, alpha / 2.0, QuantileMethod::CfInversion, rng)?;
                    let hi = limit_quantile(&spec, 1.0 - alpha / 2.0, QuantileMethod::CfInversion, rng)?;
                    let hx = c.value / rk;
                    let cells = base
                        .points
                        .iter()
                        .zip(&base.indices)
                        .map(|(&(x, y), &j)| {
                            let scale = x1 / (j as f64 * xk);
                            BandCell { x, y, xlo: x - hx, xhi: x + hx, ylo: y - scale * hi.value, yhi: y - scale * lo.value }
                        })
                        .collect();
                    let warning = (alpha <= 0.01 + 1e-12).then(|| {
                        "the 99% band for 1/2 < xi < 1 is very wide and of little practical use".to_string()
                    });
                    Ok(ConfidenceBand {
                        base: base.clone(),
                        cells,
                        level: 1.0 - alpha,
                        regime,
                        xi: *xi,
                        quantiles_used: QuantilesUsed {
                            c: Some(c),
                            stilde_lower: Some(lo),
                            stilde_upper: Some(hi),
                            ..Default::default()
                        },
                        warning,
                    })
                })
                .collect()
        }
    }
}

/// Truncated ME plot with a band.
///
/// For `xi < 1/2` every point gets half-widths `c/sqrt(k)` and `d/sqrt(k)`
/// from the bridge functional quantiles at level `1 - alpha/2`. For
/// `1/2 < xi < 1` the horizontal half-width is `c/sqrt(k)` and the vertical
/// interval at index `j` is `y - X(1)/(j X(k)) [q_{1-alpha/2}, q_{alpha/2}]`
/// with `q` the quantiles of the limit law `S~`: the plotted value equals the
/// limit line plus that scale times `S~`, so the interval for the line is the
/// reflected one.
pub fn me_band(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
    rng: RngStream,
    mc: McSettings,
) -> Result<ConfidenceBand> {
    Ok(me_band_levels(sample, cfg, xi, &[cfg.alpha], rng, mc)?.remove(0))
}

/// Whether the segment `y = slope x`, `x` in `[x0, x1]`, lies in the union of
/// the band cells.
pub fn line_covered(cells: &[BandCell], slope: f64, x0: f64, x1: f64) -> bool {
    let mut spans: Vec<(f64, f64)> = cells
        .iter()
        .filter_map(|c| {
            let (a, b) = if slope > 0.0 {
                (c.xlo.max(c.ylo / slope), c.xhi.min(c.yhi / slope))
            } else if slope == 0.0 && c.ylo <= 0.0 && c.yhi >= 0.0 {
                (c.xlo, c.xhi)
            } else if slope < 0.0 {
                (c.xlo.max(c.yhi / slope), c.xhi.min(c.ylo / slope))
            } else {
                return None;
            };
            (a <= b).then_some((a, b))
        })
        .collect();
    spans.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut reach = x0;
    for (a, b) in spans {
        if a > reach {
            break;
        }
        reach = reach.max(b);
        if reach >= x1 {
            return true;
        }
    }
    reach >= x1
}

/// Whether the true limit line lies inside `band` over the plot's window.
pub fn band_covers(band: &ConfidenceBand, true_xi: f64) -> bool {
    match band.regime {
        BandRegime::Qq => band.cells.iter().all(|c| true_xi * c.x > c.ylo && true_xi * c.x < c.yhi),
        _ => {
            let (x0, x1) = band.base.x_range();
            line_covered(&band.cells, true_xi / (1.0 - true_xi), x0, x1)
        }
    }
}

/// Whether every band cell contains the limit point of its own index:
/// `(t, xi t)` with `t = -ln(j/k)` for QQ, and `(u, xi/(1-xi) u)` with
/// `u = (j/k)^(-xi)` for ME. For the `1/2 < xi < 1` ME band only the
/// vertical coordinate is checked against the line at `u`, since the
/// horizontal limit of the plot is the same as below `1/2`.
pub fn band_covers_points(band: &ConfidenceBand, true_xi: f64, k: usize) -> bool {
    let kf = k as f64;
    band.cells.iter().zip(&band.base.indices).all(|(c, &j)| {
        let t = j as f64 / kf;
        match band.regime {
            BandRegime::Qq => {
                let y = -true_xi * t.ln();
                y > c.ylo && y < c.yhi
            }
            _ => {
                let u = t.powf(-true_xi);
                let y = true_xi / (1.0 - true_xi) * u;
                u >= c.xlo && u <= c.xhi && y >= c.ylo && y <= c.yhi
            }
        }
    })
}

/// Data generating distributions with a known shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum DistSpec {
    Pareto { xi: f64 },
    Gpd { xi: f64, beta: f64 },
    /// Totally right-skewed stable law with index `1/xi`.
    Stable { xi: f64 },
    Nonstd,
}

impl DistSpec {
    pub fn true_xi(&self) -> f64 {
        match *self {
            DistSpec::Pareto { xi } | DistSpec::Gpd { xi, .. } | DistSpec::Stable { xi } => xi,
            DistSpec::Nonstd => 0.2,
        }
    }

    pub fn sample(&self, n: usize, rng: RngStream) -> Result<OrderedSample> {
        match *self {
            DistSpec::Pareto { xi } => sample_pareto(xi, n, rng),
            DistSpec::Gpd { xi, beta } => sample_gpd(&GpdParams::new(xi, beta)?, n, rng),
            DistSpec::Stable { xi } => sample_stable(&StableSpec::simulation(1.0 / xi, 1.0)?, n, rng),
            DistSpec::Nonstd => sample_nonstd(n, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotChoice {
    Qq,
    Me,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub index: usize,
    pub xi_hat: f64,
    pub covered: bool,
    /// Every cell contains the limit point of its own index.
    pub pointwise: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub dist: DistSpec,
    pub plot: PlotChoice,
    pub n: usize,
    pub config: PlotConfig,
    pub mc: McSettings,
    pub seed: u64,
    pub replications: Vec<ReplicationOutcome>,
    pub coverage: f64,
    pub pointwise_coverage: f64,
}

/// Fraction of replications whose band contains the true limit line.
///
/// The line uses the true shape, the band width uses the Hill estimate at the
/// plot's `k` in each replication. Replication `r` samples from
/// `rng.substream(r)`; ME band quantiles for all replications come from one
/// shared path set, evaluated per replication shape, so every band equals the
/// one [`me_band`] builds from the quantile stream.
pub fn coverage_experiment(
    dist: &DistSpec,
    n: usize,
    cfg: &PlotConfig,
    plot: PlotChoice,
    replications: usize,
    rng: RngStream,
    mc: McSettings,
) -> Result<CoverageReport> {
    if replications == 0 {
        return Err(invalid("need at least one replication"));
    }
    let true_xi = dist.true_xi();
    let samples: Vec<Result<(OrderedSample, TailIndexEstimate)>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let s = dist.sample(n, rng.substream(r))?;
            let h = hill_estimate(&s, cfg.k)?;
            Ok((s, h))
        })
        .collect();
    let quantile_rng = quantile_stream(rng);
    let outcomes: Vec<ReplicationOutcome> = match plot {
        PlotChoice::Qq => samples
            .into_par_iter()
            .enumerate()
            .map(|(index, r)| {
                let res = r.and_then(|(s, h)| Ok((qq_band(&s, cfg, &h)?, h.xi)));
                outcome(index, res, true_xi, cfg.k)
            })
            .collect(),
        PlotChoice::Me => {
            let level = 1.0 - cfg.alpha / 2.0;
            let lt: Vec<f64> = samples
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .filter(|(_, h)| matches!(me_regime(h.xi), Ok(BandRegime::MeLtHalf)))
                .map(|(_, h)| h.xi)
                .collect();
            let table = if lt.is_empty() {
                Vec::new()
            } else {
                me_band_quantiles_multi(&lt, cfg.eps, &[level], mc.n_paths, mc.grid, quantile_rng)?
            };
            let mut next = 0;
            samples
                .into_iter()
                .enumerate()
                .map(|(index, r)| {
                    let res = r.and_then(|(s, h)| match me_regime(h.xi)? {
                        BandRegime::MeLtHalf => {
                            let (c, d) = table[next][0];
                            next += 1;
                            Ok((band_from_quantiles(&s, cfg, &h, c, d)?, h.xi))
                        }
                        _ => Ok((me_band(&s, cfg, &h, quantile_rng, mc)?, h.xi)),
                    });
                    outcome(index, res, true_xi, cfg.k)
                })
                .collect()
        }
    };
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let pointwise = outcomes.iter().filter(|o| o.pointwise).count();
    Ok(CoverageReport {
        dist: *dist,
        plot,
        n,
        config: *cfg,
        mc,
        seed: rng.seed,
        coverage: covered as f64 / outcomes.len() as f64,
        pointwise_coverage: pointwise as f64 / outcomes.len() as f64,
        replications: outcomes,
    })
}

/// Stream used for band quantiles inside a coverage run.
pub fn quantile_stream(rng: RngStream) -> RngStream {
    rng.substream(u64::MAX)
}

fn band_from_quantiles(
    sample: &OrderedSample,
    cfg: &PlotConfig,
    xi: &TailIndexEstimate,
    c: QuantileEstimate,
    d: QuantileEstimate,
) -> Result<ConfidenceBand> {
    let base = me_set(sample, cfg)?;
    let rk = (cfg.k as f64).sqrt();
    let (hx, hy) = (c.value / rk, d.value / rk);
    let cells = base
        .points
        .iter()
        .map(|&(x, y)| BandCell { x, y, xlo: x - hx, xhi: x + hx, ylo: y - hy, yhi: y + hy })
        .collect();
    Ok(ConfidenceBand {
        base,
        cells,
        level: 1.0 - cfg.alpha,
        regime: BandRegime::MeLtHalf,
        xi: *xi,
        quantiles_used: QuantilesUsed { c: Some(c), d: Some(d), ..Default::default() },
        warning: None,
    })
}

fn outcome(index: usize, res: Result<(ConfidenceBand, f64)>, true_xi: f64, k: usize) -> ReplicationOutcome {
    match res {
        Ok((band, xi_hat)) => ReplicationOutcome {
            index,
            xi_hat,
            covered: band_covers(&band, true_xi),
            pointwise: band_covers_points(&band, true_xi, k),
            error: None,
        },
        Err(e) => ReplicationOutcome {
            index,
            xi_hat: f64::NAN,
            covered: false,
            pointwise: false,
            error: Some(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EstimatorKind;

    fn fixed(x: f64, k: usize) -> TailIndexEstimate {
        TailIndexEstimate { xi: x, method: EstimatorKind::Fixed, k, nonpositive: false }
    }

    fn small_mc() -> McSettings {
        McSettings { n_paths: 1000, grid: 1024 }
    }

    #[test]
    fn qq_band_width_law() {
        let s = sample_pareto(0.25, 20_000, RngStream::new(1, 0)).unwrap();
        let c = qq_sup_quantile(0.975, 0.05).unwrap().value;
        let b1 = qq_band(&s, &PlotConfig::new(500, 0.05, 0.05).unwrap(), &fixed(0.3, 500)).unwrap();
        let b2 = qq_band(&s, &PlotConfig::new(1000, 0.05, 0.05).unwrap(), &fixed(0.3, 1000)).unwrap();
        let h1 = b1.cells[0].yhi - b1.cells[0].y;
        let h2 = b2.cells[0].yhi - b2.cells[0].y;
        assert!((h1 - 0.3 * c / 500f64.sqrt()).abs() < 1e-15);
        assert!((h2 / h1 - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        for cell in &b1.cells {
            assert!(cell.ylo < cell.y && cell.y < cell.yhi);
        }
    }

    #[test]
    fn qq_band_scale_invariant() {
        let s = sample_pareto(0.25, 5000, RngStream::new(2, 0)).unwrap();
        let cfg = PlotConfig::new(300, 0.05, 0.05).unwrap();
        let a = qq_band(&s, &cfg, &hill_estimate(&s, 300).unwrap()).unwrap();
        let t = s.scaled(7.0);
        let b = qq_band(&t, &cfg, &hill_estimate(&t, 300).unwrap()).unwrap();
        for (p, q) in a.cells.iter().zip(&b.cells) {
            assert!((p.ylo - q.ylo).abs() < 1e-12 && (p.yhi - q.yhi).abs() < 1e-12);
        }
    }

    #[test]
    fn regime_guards() {
        assert_eq!(me_regime(0.5), Err(Error::RegimeBoundary(0.5)));
        assert_eq!(me_regime(1.2), Err(Error::MeanDoesNotExist(1.2)));
        assert_eq!(me_regime(0.3), Ok(BandRegime::MeLtHalf));
        assert_eq!(me_regime(0.6), Ok(BandRegime::MeGtHalf));
    }

    #[test]
    fn nested_levels() {
        let s = sample_pareto(0.25, 10_000, RngStream::new(3, 0)).unwrap();
        let cfg = PlotConfig::new(500, 0.1, 0.05).unwrap();
        let bands = me_band_levels(&s, &cfg, &fixed(0.25, 500), &[0.01, 0.05, 0.1], RngStream::new(4, 0), small_mc()).unwrap();
        for w in bands.windows(2) {
            for (wide, narrow) in w[0].cells.iter().zip(&w[1].cells) {
                assert!(wide.xlo <= narrow.xlo && wide.xhi >= narrow.xhi);
                assert!(wide.ylo <= narrow.ylo && wide.yhi >= narrow.yhi);
            }
        }
    }

    #[test]
    fn gt_half_band_shrinks_like_one_over_j() {
        let s = sample_pareto(2.0 / 3.0, 20_000, RngStream::new(5, 0)).unwrap();
        let cfg = PlotConfig::new(400, 0.1, 0.05).unwrap();
        let b = me_band(&s, &cfg, &fixed(2.0 / 3.0, 400), RngStream::new(6, 0), small_mc()).unwrap();
        assert_eq!(b.regime, BandRegime::MeGtHalf);
        let w: Vec<f64> = b.cells.iter().map(|c| c.yhi - c.ylo).collect();
        let (j0, j1) = (b.base.indices[0] as f64, *b.base.indices.last().unwrap() as f64);
        assert!((w[0] * j0 - w[w.len() - 1] * j1).abs() < 1e-9 * w[0] * j0);
        assert!(w.windows(2).all(|p| p[1] < p[0]));
        assert!(b.warning.is_none());
        let b99 = me_band_levels(&s, &cfg, &fixed(2.0 / 3.0, 400), &[0.01], RngStream::new(6, 0), small_mc()).unwrap();
        assert!(b99[0].warning.is_some());
    }

    #[test]
    fn line_cover_geometry() {
        let cell = |x: f64, h: f64| BandCell { x, y: x, xlo: x - h, xhi: x + h, ylo: x - h, yhi: x + h };
        let cells = vec![cell(1.0, 0.3), cell(1.5, 0.3), cell(2.0, 0.3)];
        assert!(line_covered(&cells, 1.0, 1.0, 2.0));
        let gap = vec![cell(1.0, 0.1), cell(2.0, 0.1)];
        assert!(!line_covered(&gap, 1.0, 1.0, 2.0));
        assert!(!line_covered(&cells, 3.0, 1.0, 2.0));
    }

    #[test]
    fn coverage_single_replication() {
        let cfg = PlotConfig::new(200, 0.05, 0.05).unwrap();
        let r = coverage_experiment(&DistSpec::Pareto { xi: 0.25 }, 2000, &cfg, PlotChoice::Qq, 1, RngStream::new(7, 0), small_mc()).unwrap();
        assert_eq!(r.replications.len(), 1);
        assert!(r.coverage == 0.0 || r.coverage == 1.0);
    }

    #[test]
    fn wider_level_covers_at_least_as_often() {
        let run = |alpha| {
            let cfg = PlotConfig::new(200, 0.05, alpha).unwrap();
            coverage_experiment(&DistSpec::Pareto { xi: 0.25 }, 2000, &cfg, PlotChoice::Qq, 60, RngStream::new(8, 0), small_mc())
                .unwrap()
                .coverage
        };
        assert!(run(0.01) >= run(0.05));
    }
}
