//! Aggregates and log-log regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares on `(ln x, ln y)`. Intercept is in natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl FitResult {
    /// Fitted `y` at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub fn ols_loglog(points: &[(f64, f64)]) -> Result<FitResult> {
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::NonPositive(x, y));
        }
        logs.push((x.ln(), y.ln()));
    }
    let n = logs.len();
    if n < 2 {
        return Err(Error::DegenerateFit);
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(lx, ly) in &logs {
        let (dx, dy) = (lx - mx, ly - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * nf {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

/// Mean and standard error `s/√n` with the unbiased sample deviation.
/// The standard error of a single sample is NaN.
pub fn mean_stderr(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, f64::NAN));
    }
    let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt() / n.sqrt()))
}

pub fn rmse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::EmptySample);
    }
    let ms = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    Ok(ms.sqrt())
}

/// RMSE together with a delta-method standard error
/// `se(mean of squares) / (2 · rmse)`.
pub fn rmse_stderr(errors: &[f64]) -> Result<(f64, f64)> {
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let (ms, ms_se) = mean_stderr(&squares)?;
    let r = ms.sqrt();
    let se = if r > 0.0 { ms_se / (2.0 * r) } else { 0.0 };
    Ok((r, se))
}
