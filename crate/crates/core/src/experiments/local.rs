//! Local fixed-depth dataset.
//!
//! Each trajectory starts at `x₀ ~ U[−π/2, π/2]` in the metric coordinate
//! and runs the unmodified controller on `cos²(x/2)`. The depth enters only
//! when the terminal `x` is converted back to a physical error `x/m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    draw_symmetric, metric_success_prob, opt_half_width, trial_rng, CellResult, CellTrials,
    Dataset, TrialOutcome, BRANCH_HALF_WIDTH, DEFAULT_SEED,
};
use crate::error::{invalid, Error, Result};
use crate::protocol::{run_to_halt, ProtocolParams, DEFAULT_MAX_SHOTS};

/// How trial streams are shared between depths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Streams keyed by `(seed, m_halt, trial)`: every depth sees the same
    /// metric trajectories.
    #[default]
    Shared,
    /// Streams keyed by `(seed, m, m_halt, trial)`.
    PerDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalConfig {
    pub depths: Vec<u32>,
    pub halts: Vec<u32>,
    pub trials: u64,
    pub a: f64,
    pub b: f64,
    #[serde(with = "opt_half_width")]
    pub clip_halfwidth: Option<f64>,
    pub master_seed: u64,
    pub max_shots: u64,
    pub seed_mode: SeedMode,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            depths: vec![1, 2, 4, 8],
            halts: vec![20, 40, 80, 160, 320, 640],
            trials: 10_000,
            a: 0.3,
            b: 0.5,
            clip_halfwidth: Some(BRANCH_HALF_WIDTH),
            master_seed: DEFAULT_SEED,
            max_shots: DEFAULT_MAX_SHOTS,
            seed_mode: SeedMode::Shared,
        }
    }
}

impl LocalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depths.is_empty() {
            return Err(Error::EmptyGrid("depths"));
        }
        if self.halts.is_empty() {
            return Err(Error::EmptyGrid("halts"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial per cell"));
        }
        if self.depths.contains(&0) {
            return Err(invalid("depths", "entanglement depth must be >= 1"));
        }
        for &h in &self.halts {
            self.params(h)?;
        }
        Ok(())
    }

    fn params(&self, m_halt: u32) -> Result<ProtocolParams> {
        ProtocolParams::new(self.a, self.b, m_halt)?.with_clip(self.clip_halfwidth)
    }

    fn cell_key(&self, m: u32, m_halt: u32) -> u64 {
        match self.seed_mode {
            SeedMode::Shared => u64::from(m_halt),
            SeedMode::PerDepth => (u64::from(m) << 32) | u64::from(m_halt),
        }
    }
}

/// One metric-coordinate trajectory for trial `trial` of a cell keyed by
/// `cell_key`. Shared with the first multiscale stage.
pub(crate) fn metric_trial<F>(
    params: &ProtocolParams,
    landscape: &F,
    master_seed: u64,
    cell_key: u64,
    trial: u64,
    max_shots: u64,
) -> Result<Option<(u64, f64, f64)>>
where
    F: Fn(f64) -> f64,
{
    let mut rng = trial_rng(master_seed, cell_key, trial);
    let x0 = draw_symmetric(&mut rng, BRANCH_HALF_WIDTH);
    match run_to_halt(x0, params, landscape, &mut rng, max_shots) {
        Ok(rec) => Ok(Some((
            rec.halt_time,
            rec.terminal_infidelity,
            rec.terminal_x,
        ))),
        Err(Error::BudgetExhausted(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Raw trials for every `(m, m_halt)` cell, depths outermost.
pub fn simulate_local(config: &LocalConfig) -> Result<Vec<CellTrials>> {
    simulate_local_with(config, metric_success_prob)
}

/// As [`simulate_local`] with a substitute metric-coordinate landscape.
pub fn simulate_local_with<F>(config: &LocalConfig, landscape: F) -> Result<Vec<CellTrials>>
where
    F: Fn(f64) -> f64 + Sync,
{
    config.validate()?;
    let mut cells = Vec::with_capacity(config.depths.len() * config.halts.len());
    for &m in &config.depths {
        for &m_halt in &config.halts {
            let params = config.params(m_halt)?;
            let key = config.cell_key(m, m_halt);
            let mf = f64::from(m);
            let outcomes = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let raw = metric_trial(
                        &params,
                        &landscape,
                        config.master_seed,
                        key,
                        t,
                        config.max_shots,
                    )?;
                    Ok(raw.map(|(halt_time, eps, x)| TrialOutcome {
                        halt_time,
                        terminal_infidelity: eps,
                        phase_error: x / mf,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(CellTrials {
                dataset: Dataset::Local,
                m,
                m_halt,
                outcomes,
            });
        }
    }
    Ok(cells)
}

pub fn run_local_fixed_depth(config: &LocalConfig) -> Result<Vec<CellResult>> {
    Ok(simulate_local(config)?
        .iter()
        .map(CellTrials::summarize)
        .collect())
}
