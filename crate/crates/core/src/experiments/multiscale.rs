//! Ideal coarse-to-fine dataset.
//!
//! Stage `j` uses depth `2^j` and runs the metric-coordinate controller to
//! halt at a fixed run length. The next stage starts from
//! `clip(2 · x_out)`, which is the same physical residual seen through a
//! fringe twice as narrow. One trajectory through stage `max_stage` yields
//! the results for every `J ≤ max_stage` at once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::metric_trial;
use super::{metric_success_prob, opt_half_width, trial_rng, BRANCH_HALF_WIDTH, DEFAULT_SEED};
use crate::error::{invalid, Error, Result};
use crate::protocol::{run_to_halt, ProtocolParams, DEFAULT_MAX_SHOTS};
use crate::stats::{mean_stderr, rmse_stderr};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiscaleConfig {
    pub max_stage: u32,
    pub m_halt: u32,
    pub trials: u64,
    pub a: f64,
    pub b: f64,
    #[serde(with = "opt_half_width")]
    pub clip_halfwidth: Option<f64>,
    pub master_seed: u64,
    pub max_shots: u64,
}

impl Default for MultiscaleConfig {
    fn default() -> Self {
        Self {
            max_stage: 7,
            m_halt: 320,
            trials: 10_000,
            a: 0.3,
            b: 0.5,
            clip_halfwidth: Some(BRANCH_HALF_WIDTH),
            master_seed: DEFAULT_SEED,
            max_shots: DEFAULT_MAX_SHOTS,
        }
    }
}

impl MultiscaleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        if self.max_stage > 52 {
            return Err(invalid("max_stage", "stage depth 2^J must stay below 2^53"));
        }
        self.params()?;
        Ok(())
    }

    fn params(&self) -> Result<ProtocolParams> {
        ProtocolParams::new(self.a, self.b, self.m_halt)?.with_clip(self.clip_halfwidth)
    }

    fn hand_off(&self, x_out: f64) -> f64 {
        let x = 2.0 * x_out;
        match self.clip_halfwidth {
            Some(w) => x.clamp(-w, w),
            None => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: u32,
    pub depth: u64,
    pub t_mean: f64,
    /// `depth · t_mean`
    pub r_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleResult {
    pub stage_max: u32,
    pub m_halt: u32,
    pub trials: u64,
    /// `Σ_j 2^j · mean(T_j)`
    pub r_tot_mean: f64,
    pub r_tot_stderr: f64,
    pub rmse_final: f64,
    pub rmse_stderr: f64,
    pub exhausted: u64,
    pub stages: Vec<StageSummary>,
}

/// Halting time and terminal `x` of each completed stage. Shorter than
/// `max_stage + 1` when a stage ran out of budget.
type StageTrace = Vec<(u64, f64)>;

fn trace_trial(
    config: &MultiscaleConfig,
    params: &ProtocolParams,
    trial: u64,
) -> Result<StageTrace> {
    let key = u64::from(config.m_halt);
    let mut trace = Vec::with_capacity(config.max_stage as usize + 1);
    // Stage 0 is exactly one local-dataset trial at the same key.
    let Some((t0, _, x0)) = metric_trial(
        params,
        &metric_success_prob,
        config.master_seed,
        key,
        trial,
        config.max_shots,
    )?
    else {
        return Ok(trace);
    };
    trace.push((t0, x0));
    if config.max_stage == 0 {
        return Ok(trace);
    }
    // Later stages continue on an independent stream of the same trial.
    let mut rng = trial_rng(config.master_seed, key | (1 << 63), trial);
    let mut x = x0;
    for _ in 1..=config.max_stage {
        match run_to_halt(
            config.hand_off(x),
            params,
            metric_success_prob,
            &mut rng,
            config.max_shots,
        ) {
            Ok(rec) => {
                x = rec.terminal_x;
                trace.push((rec.halt_time, x));
            }
            Err(Error::BudgetExhausted(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

fn depth(stage: u32) -> u64 {
    1u64 << stage
}

pub fn run_multiscale(config: &MultiscaleConfig) -> Result<Vec<MultiscaleResult>> {
    config.validate()?;
    let params = config.params()?;
    let traces = (0..config.trials)
        .into_par_iter()
        .map(|t| trace_trial(config, &params, t))
        .collect::<Result<Vec<_>>>()?;

    let mut results = Vec::with_capacity(config.max_stage as usize + 1);
    for stage_max in 0..=config.max_stage {
        let done: Vec<&StageTrace> = traces
            .iter()
            .filter(|tr| tr.len() > stage_max as usize)
            .collect();
        let exhausted = config.trials - done.len() as u64;
        let mut stages = Vec::with_capacity(stage_max as usize + 1);
        for j in 0..=stage_max {
            let times: Vec<f64> = done.iter().map(|tr| tr[j as usize].0 as f64).collect();
            let t_mean = mean_stderr(&times).map(|(m, _)| m).unwrap_or(f64::NAN);
            stages.push(StageSummary {
                stage: j,
                depth: depth(j),
                t_mean,
                r_mean: depth(j) as f64 * t_mean,
            });
        }
        let r_tot_mean = stages.iter().map(|s| s.r_mean).sum();
        let per_trial_r: Vec<f64> = done
            .iter()
            .map(|tr| {
                tr[..=stage_max as usize]
                    .iter()
                    .enumerate()
                    .map(|(j, &(t, _))| depth(j as u32) as f64 * t as f64)
                    .sum()
            })
            .collect();
        let scale = depth(stage_max) as f64;
        let residuals: Vec<f64> = done
            .iter()
            .map(|tr| tr[stage_max as usize].1 / scale)
            .collect();
        let nan = (f64::NAN, f64::NAN);
        let (_, r_tot_stderr) = mean_stderr(&per_trial_r).unwrap_or(nan);
        let (rmse_final, rmse_stderr) = rmse_stderr(&residuals).unwrap_or(nan);
        results.push(MultiscaleResult {
            stage_max,
            m_halt: config.m_halt,
            trials: config.trials,
            r_tot_mean,
            r_tot_stderr,
            rmse_final,
            rmse_stderr,
            exhausted,
            stages,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::local::{run_local_fixed_depth, LocalConfig};

    fn small(trials: u64, max_stage: u32) -> MultiscaleConfig {
        MultiscaleConfig {
            max_stage,
            trials,
            ..MultiscaleConfig::default()
        }
    }

    #[test]
    fn first_stage_is_a_local_cell() {
        let ms = run_multiscale(&small(500, 2)).unwrap();
        let local = run_local_fixed_depth(&LocalConfig {
            depths: vec![1],
            halts: vec![320],
            trials: 500,
            ..LocalConfig::default()
        })
        .unwrap();
        assert_eq!(ms[0].r_tot_mean, local[0].nu);
        assert_eq!(ms[0].rmse_final, local[0].rmse_theta);
        assert_eq!(ms[0].stages.len(), 1);
    }

    #[test]
    fn resource_is_sum_of_stage_costs() {
        let ms = run_multiscale(&small(300, 4)).unwrap();
        for r in &ms {
            let total: f64 = r.stages.iter().map(|s| s.depth as f64 * s.t_mean).sum();
            assert_eq!(r.r_tot_mean, total);
            for s in &r.stages {
                assert_eq!(s.depth, 1 << s.stage);
                assert!(s.t_mean >= 320.0);
            }
        }
    }

    #[test]
    fn monotone_in_stage_and_geometric_cost() {
        let ms = run_multiscale(&small(2000, 7)).unwrap();
        for w in ms.windows(2) {
            assert!(w[1].rmse_final < w[0].rmse_final);
            assert!(w[1].r_tot_mean > w[0].r_tot_mean);
        }
        let ratio = ms[7].r_tot_mean / ms[6].r_tot_mean;
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn rejects_zero_trials() {
        assert!(run_multiscale(&small(0, 3)).is_err());
    }
}
