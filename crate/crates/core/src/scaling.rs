//! Scaling-law fits over experiment tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{CellResult, MultiscaleResult};
use crate::stats::{ols_loglog, FitResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthFit {
    pub m: u32,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaltFit {
    pub m_halt: u32,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScaling {
    /// Mean terminal infidelity against mean halting time, all cells.
    pub eps_vs_nu: FitResult,
    /// Same fit restricted to the lower / upper half of the halt grid.
    pub eps_vs_nu_lower: Option<FitResult>,
    pub eps_vs_nu_upper: Option<FitResult>,
    /// Phase RMSE against total particles, one fit per depth.
    pub rmse_vs_r: Vec<DepthFit>,
    pub rmse_vs_r_mean_slope: Option<f64>,
    /// `√R · RMSE` against depth, one fit per halt threshold.
    pub gain_vs_m: Vec<HaltFit>,
    pub gain_vs_m_mean_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalScaling {
    pub eps_vs_r: FitResult,
    pub rmse_vs_r: FitResult,
    pub rmse_vs_r_upper: Option<FitResult>,
}

fn sorted_unique(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Splits a sorted grid into lower `⌈n/2⌉` and upper `⌊n/2⌋` values.
fn halves(grid: &[u32]) -> (&[u32], &[u32]) {
    grid.split_at(grid.len().div_ceil(2))
}

fn fit_where<F, P>(cells: &[CellResult], keep: F, point: P) -> Result<FitResult>
where
    F: Fn(&CellResult) -> bool,
    P: Fn(&CellResult) -> (f64, f64),
{
    let pts: Vec<_> = cells.iter().filter(|c| keep(c)).map(point).collect();
    ols_loglog(&pts)
}

fn mean_slope<T>(fits: &[T], slope: impl Fn(&T) -> f64) -> Option<f64> {
    if fits.is_empty() {
        None
    } else {
        Some(fits.iter().map(slope).sum::<f64>() / fits.len() as f64)
    }
}

pub fn local_scaling(cells: &[CellResult]) -> Result<LocalScaling> {
    if cells.is_empty() {
        return Err(Error::EmptySample);
    }
    let eps_point = |c: &CellResult| (c.nu, c.mean_eps);
    let eps_vs_nu = fit_where(cells, |_| true, eps_point)?;
    let halts = sorted_unique(cells.iter().map(|c| c.m_halt).collect());
    let (lo, hi) = halves(&halts);
    let eps_vs_nu_lower = fit_where(cells, |c| lo.contains(&c.m_halt), eps_point).ok();
    let eps_vs_nu_upper = fit_where(cells, |c| hi.contains(&c.m_halt), eps_point).ok();

    let depths = sorted_unique(cells.iter().map(|c| c.m).collect());
    let mut rmse_vs_r = Vec::new();
    for &m in &depths {
        if let Ok(fit) = fit_where(cells, |c| c.m == m, |c| (c.r_total, c.rmse_theta)) {
            rmse_vs_r.push(DepthFit { m, fit });
        }
    }
    let mut gain_vs_m = Vec::new();
    for &h in &halts {
        let gain = |c: &CellResult| (f64::from(c.m), c.r_total.sqrt() * c.rmse_theta);
        if let Ok(fit) = fit_where(cells, |c| c.m_halt == h, gain) {
            gain_vs_m.push(HaltFit { m_halt: h, fit });
        }
    }
    Ok(LocalScaling {
        eps_vs_nu,
        eps_vs_nu_lower,
        eps_vs_nu_upper,
        rmse_vs_r_mean_slope: mean_slope(&rmse_vs_r, |f| f.fit.slope),
        rmse_vs_r,
        gain_vs_m_mean_slope: mean_slope(&gain_vs_m, |f| f.fit.slope),
        gain_vs_m,
    })
}

pub fn global_scaling(cells: &[CellResult]) -> Result<GlobalScaling> {
    let eps_vs_r = fit_where(cells, |_| true, |c| (c.r_total, c.mean_eps))?;
    let rmse_vs_r = fit_where(cells, |_| true, |c| (c.r_total, c.rmse_theta))?;
    let halts = sorted_unique(cells.iter().map(|c| c.m_halt).collect());
    let (_, hi) = halves(&halts);
    let rmse_vs_r_upper = fit_where(
        cells,
        |c| hi.contains(&c.m_halt),
        |c| (c.r_total, c.rmse_theta),
    )
    .ok();
    Ok(GlobalScaling {
        eps_vs_r,
        rmse_vs_r,
        rmse_vs_r_upper,
    })
}

/// Final residual RMSE against cumulative particle cost across stages.
pub fn multiscale_scaling(results: &[MultiscaleResult]) -> Result<FitResult> {
    let pts: Vec<_> = results
        .iter()
        .map(|r| (r.r_tot_mean, r.rmse_final))
        .collect();
    ols_loglog(&pts)
}

/// For each cell at depth `m ≠ reference_m`, the ratio of its RMSE to the
/// reference-depth RMSE fitted at the same total resource. Ratios below one
/// mean the cell beats the reference at matched `R`.
pub fn rmse_ratio_at_matched_resource(
    cells: &[CellResult],
    reference: &[CellResult],
    reference_m: u32,
) -> Result<Vec<(u32, u32, f64)>> {
    let fit = fit_where(
        reference,
        |c| c.m == reference_m,
        |c| (c.r_total, c.rmse_theta),
    )?;
    Ok(cells
        .iter()
        .filter(|c| !(c.m == reference_m && c.dataset == reference[0].dataset))
        .map(|c| (c.m, c.m_halt, c.rmse_theta / fit.predict(c.r_total)))
        .collect())
}
