//! Small least-squares helpers for reporting empirical constants.
//!
//! Nothing here asserts a bound; callers decide what to do with the fitted
//! numbers.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantFit {
    /// least-squares constant on log scale, `exp(mean log(value/shape))`
    pub constant: f64,
    /// smallest constant dominating every point
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub points: usize,
}

/// Fits `value ≈ C · shape` over pairs `(value, shape)` with positive shapes.
/// Zero values are skipped by the log fit but still count for `max_ratio`.
pub fn fit_constant(points: &[(f64, f64)]) -> Result<ConstantFit> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to fit".into()));
    }
    if points.iter().any(|&(v, s)| !(s > 0.0) || !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidArgument("fit needs finite values >= 0 and shapes > 0".into()));
    }
    let ratios: Vec<f64> = points.iter().map(|&(v, s)| v / s).collect();
    let logs: Vec<f64> = ratios.iter().filter(|&&r| r > 0.0).map(|r| r.ln()).collect();
    let constant = if logs.is_empty() {
        0.0
    } else {
        (logs.iter().sum::<f64>() / logs.len() as f64).exp()
    };
    Ok(ConstantFit {
        constant,
        max_ratio: ratios.iter().cloned().fold(f64::MIN, f64::max),
        min_ratio: ratios.iter().cloned().fold(f64::MAX, f64::min),
        points: points.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs two or more paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

/// Fits `S(X) ≈ C X (log X)^A` for the exponent `A` and `C`, by regressing
/// `log(S/X)` on `log log X`.
pub fn fit_log_power(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.iter().any(|&(x, s)| !(x > std::f64::consts::E) || !(s > 0.0)) {
        return Err(Error::InvalidArgument("log-power fit needs X > e and S > 0".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x.ln().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(x, s)| (s / x).ln()).collect();
    linear_fit(&xs, &ys)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoTermFit {
    pub a: f64,
    pub b: f64,
    /// largest `value / (a f + b g)`
    pub max_ratio: f64,
}

/// Nonnegative least squares for `value ≈ a·f + b·g` with weights `1/value²`
/// (relative error), over triples `(value, f, g)`.
pub fn fit_two_terms(points: &[(f64, f64, f64)]) -> Result<TwoTermFit> {
    if points.is_empty() || points.iter().any(|&(v, f, g)| !(v > 0.0) || f < 0.0 || g < 0.0) {
        return Err(Error::InvalidArgument("two-term fit needs positive values".into()));
    }
    let scaled: Vec<(f64, f64)> = points.iter().map(|&(v, f, g)| (f / v, g / v)).collect();
    let (mut ff, mut fg, mut gg, mut f1, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(f, g) in &scaled {
        ff += f * f;
        fg += f * g;
        gg += g * g;
        f1 += f;
        g1 += g;
    }
    let single = |sum: f64, sq: f64| if sq > 0.0 { (sum / sq).max(0.0) } else { 0.0 };
    let det = ff * gg - fg * fg;
    let (mut a, mut b) = if det.abs() > 1e-12 * (ff * gg).max(f64::MIN_POSITIVE) {
        ((f1 * gg - g1 * fg) / det, (g1 * ff - f1 * fg) / det)
    } else {
        (-1.0, -1.0)
    };
    if a < 0.0 || b < 0.0 {
        let residual = |a: f64, b: f64| -> f64 { scaled.iter().map(|&(f, g)| (a * f + b * g - 1.0).powi(2)).sum() };
        let only_a = (single(f1, ff), 0.0);
        let only_b = (0.0, single(g1, gg));
        (a, b) = if residual(only_a.0, only_a.1) <= residual(only_b.0, only_b.1) { only_a } else { only_b };
    }
    let max_ratio = points
        .iter()
        .map(|&(v, f, g)| v / (a * f + b * g))
        .fold(0.0f64, f64::max);
    Ok(TwoTermFit { a, b, max_ratio })
}

/// Median of a nonempty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}
