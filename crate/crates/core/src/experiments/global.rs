//! Global single-scale dataset.
//!
//! The mismatch `δ = θ − θ̃` starts anywhere on the circle and is tracked
//! in physical units, wrapped to `(−π, π]` after every update. A failure
//! moves the compensation by `(a/m)(M_S+1)^(−b) r`. Nothing is clipped, so
//! the controller is free to settle on any of the `m` fringes.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    draw_symmetric, trial_rng, CellResult, CellTrials, Dataset, TrialOutcome, DEFAULT_SEED,
};
use crate::error::{invalid, Error, Result};
use crate::protocol::{run_to_halt, ProtocolParams, DEFAULT_MAX_SHOTS};
use crate::sensing::{NoonProbe, ProbeFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalPrior {
    /// `δ₀ ~ U[−π, π)`.
    #[default]
    FullCircle,
    /// `δ₀ ~ U[−π/(2m), π/(2m)]`, i.e. inside the central fringe.
    SingleFringe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub depth: u32,
    pub halts: Vec<u32>,
    pub trials: u64,
    pub a: f64,
    pub b: f64,
    pub master_seed: u64,
    pub max_shots: u64,
    pub prior: GlobalPrior,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            depth: 8,
            halts: vec![20, 40, 80, 160, 320, 640],
            trials: 10_000,
            a: 0.3,
            b: 0.5,
            master_seed: DEFAULT_SEED,
            max_shots: DEFAULT_MAX_SHOTS,
            prior: GlobalPrior::FullCircle,
        }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.halts.is_empty() {
            return Err(Error::EmptyGrid("halts"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial per cell"));
        }
        NoonProbe::new(self.depth)?;
        for &h in &self.halts {
            self.params(h)?;
        }
        Ok(())
    }

    fn params(&self, m_halt: u32) -> Result<ProtocolParams> {
        Ok(ProtocolParams::new(self.a / f64::from(self.depth), self.b, m_halt)?.with_wrap(true))
    }
}

pub fn simulate_global(config: &GlobalConfig) -> Result<Vec<CellTrials>> {
    let probe = NoonProbe::new(config.depth)?;
    simulate_global_with(config, |delta| probe.success_prob(delta))
}

/// As [`simulate_global`] with a substitute landscape in the physical
/// mismatch.
pub fn simulate_global_with<F>(config: &GlobalConfig, landscape: F) -> Result<Vec<CellTrials>>
where
    F: Fn(f64) -> f64 + Sync,
{
    config.validate()?;
    let m = config.depth;
    let mut cells = Vec::with_capacity(config.halts.len());
    for &m_halt in &config.halts {
        let params = config.params(m_halt)?;
        let key = u64::from(m_halt);
        let outcomes = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(config.master_seed, key, t);
                let delta0 = match config.prior {
                    GlobalPrior::FullCircle => -PI + 2.0 * PI * rng.gen::<f64>(),
                    GlobalPrior::SingleFringe => {
                        draw_symmetric(&mut rng, PI / (2.0 * f64::from(m)))
                    }
                };
                match run_to_halt(delta0, &params, &landscape, &mut rng, config.max_shots) {
                    Ok(rec) => Ok(Some(TrialOutcome {
                        halt_time: rec.halt_time,
                        terminal_infidelity: rec.terminal_infidelity,
                        phase_error: rec.terminal_x,
                    })),
                    Err(Error::BudgetExhausted(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(CellTrials {
            dataset: Dataset::Global,
            m,
            m_halt,
            outcomes,
        });
    }
    Ok(cells)
}

pub fn run_global_aliasing(config: &GlobalConfig) -> Result<Vec<CellResult>> {
    Ok(simulate_global(config)?
        .iter()
        .map(CellTrials::summarize)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::local::{run_local_fixed_depth, LocalConfig};

    #[test]
    fn certain_success_keeps_the_prior() {
        let cfg = GlobalConfig {
            halts: vec![20],
            trials: 40_000,
            ..GlobalConfig::default()
        };
        let cell = &simulate_global_with(&cfg, |_| 1.0).unwrap()[0];
        let s = cell.summarize();
        assert_eq!(s.nu, 20.0);
        // second moment of U[−π, π) is π²/3
        let expected = PI / 3f64.sqrt();
        assert!(
            (s.rmse_theta - expected).abs() < 4.0 * s.rmse_stderr,
            "{}",
            s.rmse_theta
        );
        assert!(cell
            .halted()
            .all(|o| o.phase_error >= -PI && o.phase_error <= PI));
    }

    #[test]
    fn errors_stay_wrapped() {
        let cfg = GlobalConfig {
            halts: vec![20, 40],
            trials: 500,
            ..GlobalConfig::default()
        };
        for cell in simulate_global(&cfg).unwrap() {
            for o in cell.halted() {
                assert!(o.phase_error > -PI && o.phase_error <= PI);
                assert!(o.halt_time >= u64::from(cell.m_halt));
            }
        }
    }

    /// Global never clips, so the local reference runs unclipped too.
    #[test]
    fn single_fringe_prior_matches_local_dataset() {
        let halts = vec![40, 160];
        let g = run_global_aliasing(&GlobalConfig {
            halts: halts.clone(),
            trials: 4000,
            prior: GlobalPrior::SingleFringe,
            master_seed: 11,
            ..GlobalConfig::default()
        })
        .unwrap();
        let l = run_local_fixed_depth(&LocalConfig {
            depths: vec![8],
            halts,
            trials: 4000,
            master_seed: 12,
            clip_halfwidth: None,
            ..LocalConfig::default()
        })
        .unwrap();
        for (g, l) in g.iter().zip(&l) {
            let z = |a: f64, sa: f64, b: f64, sb: f64| (a - b).abs() / (sa * sa + sb * sb).sqrt();
            assert!(z(g.nu, g.nu_stderr, l.nu, l.nu_stderr) < 4.0);
            assert!(z(g.mean_eps, g.eps_stderr, l.mean_eps, l.eps_stderr) < 4.0);
            assert!(z(g.rmse_theta, g.rmse_stderr, l.rmse_theta, l.rmse_stderr) < 4.0);
        }
    }
}
