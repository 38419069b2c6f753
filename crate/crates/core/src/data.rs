//! Sample ingestion, order statistics and tail-index estimators.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plotsets::{PlotKind, PlotSet};

/// A validated sample sorted in decreasing order, `X(1) >= ... >= X(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    values: Vec<f64>,
}

/// Input layout accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One number per line.
    Plain,
    /// Comma separated file, the given 0-based column is read.
    CsvColumn(usize),
}

impl OrderedSample {
    /// Sorts `values` into decreasing order. Ties are kept.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i + 1));
        }
        if values.len() < 2 {
            return Err(Error::TooFewObservations(values.len()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The values in decreasing order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `X(i)`, 1-based as in the usual order statistic notation.
    pub fn order_stat(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Multiplies every value by `c > 0`; order is preserved.
    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect() }
    }

    /// Plain ingest format, one value per line in decreasing order.
    pub fn to_plain_text(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 20);
        for v in &self.values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    pub(crate) fn positive_order_stat(&self, i: usize) -> Result<f64> {
        let v = self.order_stat(i);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::NonPositiveOrderStatistic { index: i, value: v })
        }
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::ParseError {
        line,
        message: format!("not a number: {:?}", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue(line));
    }
    Ok(v)
}

/// Parses file contents. Blank lines and lines starting with `#` are skipped;
/// line numbers in errors are 1-based positions in the file.
pub fn parse_text(text: &str, format: InputFormat) -> Result<OrderedSample> {
    let mut values = Vec::new();
    let mut first_data_line = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match format {
            InputFormat::Plain => values.push(parse_number(t, line)?),
            InputFormat::CsvColumn(col) => {
                let field = t.split(',').nth(col).ok_or_else(|| Error::ParseError {
                    line,
                    message: format!("no column {col}"),
                })?;
                let is_header = first_data_line && field.trim().parse::<f64>().is_err();
                first_data_line = false;
                if is_header {
                    continue;
                }
                values.push(parse_number(field, line)?);
            }
        }
    }
    OrderedSample::from_values(values)
}

pub fn ingest(path: &Path, format: InputFormat) -> Result<OrderedSample> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    parse_text(&text, format)
}

/// Empirical mean excess over `u`, using the strict indicator `X > u`.
pub fn empirical_me(sample: &OrderedSample, u: f64) -> Result<f64> {
    let m = sample.values.partition_point(|&x| x > u);
    if m == 0 {
        return Err(Error::EmptyExceedanceSet(u));
    }
    let s: f64 = sample.values[..m].iter().map(|x| x - u).sum();
    Ok(s / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Hill,
    Pickands,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIndexEstimate {
    pub xi: f64,
    pub method: EstimatorKind,
    pub k: usize,
    /// Set when a Pickands estimate came out non-positive.
    pub nonpositive: bool,
}

impl TailIndexEstimate {
    /// A user-supplied shape value.
    pub fn fixed(xi: f64, k: usize) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
        }
        Ok(Self { xi, method: EstimatorKind::Fixed, k, nonpositive: false })
    }
}

fn hill_from_prefix(log_sum_k: f64, k: usize, log_x_next: f64) -> f64 {
    log_sum_k / k as f64 - log_x_next
}

/// Hill estimator `(1/k) sum_{i<=k} log(X(i) / X(k+1))`.
pub fn hill_estimate(sample: &OrderedSample, k: usize) -> Result<TailIndexEstimate> {
    let n = sample.n();
    if k < 1 || k > n - 1 {
        return Err(Error::BadK(format!("Hill needs 1 <= k <= n-1 = {}, got {k}", n - 1)));
    }
    let next = sample.positive_order_stat(k + 1)?;
    let log_sum: f64 = sample.values[..k].iter().map(|x| x.ln()).sum();
    Ok(TailIndexEstimate {
        xi: hill_from_prefix(log_sum, k, next.ln()),
        method: EstimatorKind::Hill,
        k,
        nonpositive: false,
    })
}

/// Pickands estimator `log((X(k)-X(2k)) / (X(2k)-X(4k))) / log 2`.
pub fn pickands_estimate(sample: &OrderedSample, k: usize) -> Result<TailIndexEstimate> {
    let n = sample.n();
    if k < 1 || 4 * k > n {
        return Err(Error::BadK(format!("Pickands needs 1 <= k and 4k <= n = {n}, got k = {k}")));
    }
    let a = sample.order_stat(k);
    let b = sample.order_stat(2 * k);
    let c = sample.order_stat(4 * k);
    let num = a - b;
    let den = b - c;
    if den <= 0.0 || num <= 0.0 {
        return Err(Error::DegenerateSpacings(format!(
            "X({k}) - X({}) = {num}, X({}) - X({}) = {den}",
            2 * k,
            2 * k,
            4 * k
        )));
    }
    let xi = (num / den).ln() / std::f64::consts::LN_2;
    Ok(TailIndexEstimate { xi, method: EstimatorKind::Pickands, k, nonpositive: xi <= 0.0 })
}

/// Points `(k, hill_estimate(k))` for `k = 1..=k_max`.
pub fn hill_plot(sample: &OrderedSample, k_max: usize) -> Result<PlotSet> {
    let n = sample.n();
    if k_max < 1 || k_max > n - 1 {
        return Err(Error::BadK(format!("Hill plot needs 1 <= k_max <= n-1 = {}, got {k_max}", n - 1)));
    }
    let mut points = Vec::with_capacity(k_max);
    let mut log_sum = 0.0;
    for k in 1..=k_max {
        let next = sample.positive_order_stat(k + 1)?;
        log_sum += sample.values[k - 1].ln();
        points.push((k as f64, hill_from_prefix(log_sum, k, next.ln())));
    }
    Ok(PlotSet::diagnostic(PlotKind::Hill, points))
}

/// Points `(k, pickands_estimate(k))` for `k = 1..=k_max`; values of `k` with
/// degenerate spacings are skipped.
pub fn pickands_plot(sample: &OrderedSample, k_max: usize) -> Result<PlotSet> {
    if k_max < 1 || 4 * k_max > sample.n() {
        return Err(Error::BadK(format!("Pickands plot needs 4 k_max <= n, got k_max = {k_max}")));
    }
    let points: Vec<(f64, f64)> = (1..=k_max)
        .filter_map(|k| pickands_estimate(sample, k).ok().map(|e| (k as f64, e.xi)))
        .collect();
    if points.is_empty() {
        return Err(Error::DegenerateSpacings("every k has a vanishing spacing".into()));
    }
    Ok(PlotSet::diagnostic(PlotKind::Pickands, points))
}
