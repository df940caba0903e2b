//! The one-bit adaptive controller.
//!
//! Every shot yields a single success/failure bit. A success freezes the
//! control and extends the current run; a failure resets the run counter and
//! kicks the control by a random step whose size shrinks with the length of
//! the run that just ended. The controller halts after `m_halt` consecutive
//! successes.
//!
//! Random draws per shot, in order: one uniform `u ∈ [0, 1)` for the outcome
//! (success iff `u < p`), then, on failure only, one uniform `v ∈ [0, 1)`
//! mapped to the direction `r = 2v − 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, PartialTrajectory, Result};
use crate::sensing::wrap_phase;

/// Shot budget used when a caller does not supply one.
pub const DEFAULT_MAX_SHOTS: u64 = 1_000_000;

/// Step-size law, halting rule, and post-update constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    a: f64,
    b: f64,
    m_halt: u32,
    clip: Option<f64>,
    wrap: bool,
}

impl ProtocolParams {
    pub fn new(a: f64, b: f64, m_halt: u32) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(
                "a",
                format!("step amplitude must be positive, got {a}"),
            ));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(invalid(
                "b",
                format!("decay exponent must be >= 0, got {b}"),
            ));
        }
        if m_halt == 0 {
            return Err(invalid("m_halt", "halting run length must be >= 1"));
        }
        Ok(Self {
            a,
            b,
            m_halt,
            clip: None,
            wrap: false,
        })
    }

    /// Clamp `x` to `[-half_width, half_width]` after every failure update.
    /// A zero half-width pins the control at 0.
    pub fn with_clip(mut self, half_width: Option<f64>) -> Result<Self> {
        if let Some(w) = half_width {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid("clip", format!("half-width must be >= 0, got {w}")));
            }
        }
        self.clip = half_width;
        Ok(self)
    }

    /// Reduce `x` to `(-π, π]` after every failure update.
    pub fn with_wrap(mut self, wrap: bool) -> Self {
        self.wrap = wrap;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m_halt(&self) -> u32 {
        self.m_halt
    }

    pub fn clip(&self) -> Option<f64> {
        self.clip
    }

    pub fn wrap(&self) -> bool {
        self.wrap
    }

    /// `a · (m_s_prev + 1)^(-b)`, where `m_s_prev` is the run length held
    /// just before the failing shot resets it.
    pub fn step_size(&self, m_s_prev: u32) -> f64 {
        if self.b == 0.0 {
            return self.a;
        }
        self.a * (f64::from(m_s_prev) + 1.0).powf(-self.b)
    }

    fn constrain(&self, mut x: f64) -> f64 {
        if self.wrap {
            x = wrap_phase(x);
        }
        if let Some(w) = self.clip {
            x = x.clamp(-w, w);
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Control mismatch coordinate.
    pub x: f64,
    /// Current run of consecutive successes.
    pub m_s: u32,
    /// Shots consumed so far.
    pub n: u64,
}

impl ControllerState {
    pub fn new(x0: f64) -> Self {
        Self {
            x: x0,
            m_s: 0,
            n: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotOutcome {
    pub success: bool,
    /// Signed increment added to `x` before clipping/wrapping; zero on success.
    pub step_applied: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub halt_time: u64,
    pub terminal_x: f64,
    pub terminal_infidelity: f64,
    pub failures: u64,
}

fn checked_prob(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// Consume one shot.
pub fn step<F, R>(
    state: ControllerState,
    params: &ProtocolParams,
    success_prob_at: F,
    rng: &mut R,
) -> Result<(ControllerState, ShotOutcome)>
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    let p = checked_prob(success_prob_at(state.x))?;
    let u: f64 = rng.gen();
    if u < p {
        let next = ControllerState {
            x: state.x,
            m_s: state.m_s + 1,
            n: state.n + 1,
        };
        return Ok((
            next,
            ShotOutcome {
                success: true,
                step_applied: 0.0,
            },
        ));
    }
    let r = 2.0 * rng.gen::<f64>() - 1.0;
    let step_applied = params.step_size(state.m_s) * r;
    let next = ControllerState {
        x: params.constrain(state.x + step_applied),
        m_s: 0,
        n: state.n + 1,
    };
    Ok((
        next,
        ShotOutcome {
            success: false,
            step_applied,
        },
    ))
}

/// Run shots from `x0` until `m_halt` consecutive successes.
///
/// Returns [`Error::BudgetExhausted`] with the partial state if `max_shots`
/// pass without a halt.
pub fn run_to_halt<F, R>(
    x0: f64,
    params: &ProtocolParams,
    success_prob_at: F,
    rng: &mut R,
    max_shots: u64,
) -> Result<TrajectoryRecord>
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    if max_shots < u64::from(params.m_halt) {
        return Err(invalid(
            "max_shots",
            format!("budget {max_shots} is below m_halt = {}", params.m_halt),
        ));
    }
    let mut state = ControllerState::new(x0);
    let mut failures = 0u64;
    while state.m_s < params.m_halt {
        if state.n >= max_shots {
            return Err(Error::BudgetExhausted(PartialTrajectory {
                shots: state.n,
                x: state.x,
                run: state.m_s,
                failures,
            }));
        }
        let (next, outcome) = step(state, params, &success_prob_at, rng)?;
        if !outcome.success {
            failures += 1;
        }
        state = next;
    }
    Ok(TrajectoryRecord {
        halt_time: state.n,
        terminal_x: state.x,
        terminal_infidelity: 1.0 - success_prob_at(state.x),
        failures,
    })
}
