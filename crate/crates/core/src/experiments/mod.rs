//! Monte Carlo datasets for NOON-probe sensing.
//!
//! Three datasets are provided:
//!
//! * [`local`]: fixed depth inside the correct fringe, simulated in the
//!   depth-independent metric coordinate `x = m(θ − θ̃)`;
//! * [`global`]: fixed depth with a full-circle prior in the physical
//!   coordinate, wrapped to `(−π, π]`, which exposes fringe aliasing;
//! * [`multiscale`]: coarse-to-fine stages of depth `2^j` with an ideal
//!   hand-off between stages.
//!
//! Every trial draws from its own ChaCha8 stream, keyed by the master seed,
//! a per-cell key and the trial index. Results are collected in trial order
//! and reduced sequentially, so the thread count never changes a digit.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::cert_scale;
use crate::error::Result;
use crate::stats::{mean_stderr, rmse_stderr};

pub mod global;
pub mod local;
pub mod multiscale;

pub use global::{run_global_aliasing, simulate_global, GlobalConfig, GlobalPrior};
pub use local::{run_local_fixed_depth, simulate_local, LocalConfig, SeedMode};
pub use multiscale::{run_multiscale, MultiscaleConfig, MultiscaleResult, StageSummary};

/// Master seed used when none is configured.
pub const DEFAULT_SEED: u64 = 0x5353_4d4c_2026;

/// Half-width of the branch-resolved prior and of the default clip.
pub const BRANCH_HALF_WIDTH: f64 = FRAC_PI_2;

pub(crate) fn metric_success_prob(x: f64) -> f64 {
    let c = (0.5 * x).cos();
    c * c
}

/// Independent random stream for one trial.
pub fn trial_rng(master_seed: u64, cell_key: u64, trial: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&cell_key.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}

pub(crate) fn draw_symmetric<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    half_width * (2.0 * rng.gen::<f64>() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Local,
    Global,
    Multiscale,
}

impl Dataset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dataset::Local => "local",
            Dataset::Global => "global",
            Dataset::Multiscale => "multiscale",
        }
    }
}

impl std::fmt::Display for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A halted trial. `phase_error` is the physical error `θ̂ − θ` of the
/// terminal compensation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub halt_time: u64,
    pub terminal_infidelity: f64,
    pub phase_error: f64,
}

/// Raw per-trial outcomes of one grid cell, in trial order. `None` marks a
/// trial that exhausted its shot budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrials {
    pub dataset: Dataset,
    pub m: u32,
    pub m_halt: u32,
    pub outcomes: Vec<Option<TrialOutcome>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: Dataset,
    pub m: u32,
    pub m_halt: u32,
    pub trials: u64,
    pub nu: f64,
    pub nu_stderr: f64,
    /// Particles consumed, `m · nu`.
    pub r_total: f64,
    pub mean_eps: f64,
    pub eps_stderr: f64,
    pub rmse_theta: f64,
    pub rmse_stderr: f64,
    pub exhausted: u64,
}

impl CellTrials {
    pub fn halted(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.outcomes.iter().flatten()
    }

    pub fn exhausted(&self) -> u64 {
        self.outcomes.iter().filter(|o| o.is_none()).count() as u64
    }

    /// Statistics over halted trials. All-NaN when nothing halted.
    pub fn summarize(&self) -> CellResult {
        let times: Vec<f64> = self.halted().map(|o| o.halt_time as f64).collect();
        let eps: Vec<f64> = self.halted().map(|o| o.terminal_infidelity).collect();
        let errs: Vec<f64> = self.halted().map(|o| o.phase_error).collect();
        let nan = (f64::NAN, f64::NAN);
        let (nu, nu_stderr) = mean_stderr(&times).unwrap_or(nan);
        let (mean_eps, eps_stderr) = mean_stderr(&eps).unwrap_or(nan);
        let (rmse_theta, rmse_stderr) = rmse_stderr(&errs).unwrap_or(nan);
        CellResult {
            dataset: self.dataset,
            m: self.m,
            m_halt: self.m_halt,
            trials: self.outcomes.len() as u64,
            nu,
            nu_stderr,
            r_total: f64::from(self.m) * nu,
            mean_eps,
            eps_stderr,
            rmse_theta,
            rmse_stderr,
            exhausted: self.exhausted(),
        }
    }

    /// Fraction of halted trials whose terminal infidelity exceeds the
    /// certified scale at significance `eta`, with its binomial standard
    /// error.
    pub fn cert_exceedance(&self, eta: f64) -> Result<(f64, f64)> {
        let scale = cert_scale(self.m_halt, eta)?;
        let flags: Vec<f64> = self
            .halted()
            .map(|o| {
                if o.terminal_infidelity > scale {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let n = flags.len() as f64;
        let (frac, _) = mean_stderr(&flags)?;
        Ok((frac, (frac * (1.0 - frac) / n).sqrt()))
    }
}

/// Efficient-estimator error `1 / (m √ν)` for `ν` shots at depth `m`.
pub fn crb_overlay(m: u32, nu: f64) -> f64 {
    1.0 / (f64::from(m) * nu.sqrt())
}

/// Serializes an optional half-width as a number or the string `"none"`,
/// since TOML has no null.
pub(crate) mod opt_half_width {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(w) => s.serialize_f64(*w),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Option<f64>;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a non-negative number or \"none\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(Some(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(Some(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Some(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v.eq_ignore_ascii_case("none") {
                    Ok(None)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
                Ok(None)
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let draw = |s, k, t| trial_rng(s, k, t).gen::<u64>();
        assert_eq!(draw(1, 2, 3), draw(1, 2, 3));
        assert_ne!(draw(1, 2, 3), draw(1, 2, 4));
        assert_ne!(draw(1, 2, 3), draw(1, 3, 3));
        assert_ne!(draw(1, 2, 3), draw(2, 2, 3));
    }

    #[test]
    fn crb_examples() {
        assert_eq!(crb_overlay(1, 100.0), 0.1);
        assert_eq!(crb_overlay(8, 100.0), 0.0125);
        // fixed R = m ν: error ∝ m^(-1/2)
        let r = 6400.0;
        let ratio = crb_overlay(4, r / 4.0) / crb_overlay(1, r);
        assert!((ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn summary_of_exhausted_cell_is_nan() {
        let cell = CellTrials {
            dataset: Dataset::Local,
            m: 2,
            m_halt: 20,
            outcomes: vec![None, None],
        };
        let s = cell.summarize();
        assert!(s.nu.is_nan());
        assert_eq!(s.exhausted, 2);
        assert_eq!(s.trials, 2);
    }
}
