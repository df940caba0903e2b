//! Compensation-type probe families.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Centered finite-difference step for probes without an analytic derivative.
pub const FD_STEP: f64 = 1e-6;

/// A one-parameter probe family seen through its compensated return
/// probability. `mismatch` is always the physical offset `θ − θ̃`.
pub trait ProbeFamily {
    /// Particles per shot.
    fn depth(&self) -> u32;

    /// Quantum Fisher information per shot.
    fn qfi(&self) -> f64;

    fn success_prob(&self, mismatch: f64) -> f64;

    /// `1 − success_prob`. Override when a direct form avoids cancellation.
    fn infidelity(&self, mismatch: f64) -> f64 {
        1.0 - self.success_prob(mismatch)
    }

    fn success_prob_derivative(&self, mismatch: f64) -> f64 {
        (self.success_prob(mismatch + FD_STEP) - self.success_prob(mismatch - FD_STEP))
            / (2.0 * FD_STEP)
    }
}

/// GHZ/NOON probe of depth `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoonProbe {
    m: u32,
}

impl NoonProbe {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "entanglement depth must be >= 1"));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

impl ProbeFamily for NoonProbe {
    fn depth(&self) -> u32 {
        self.m
    }

    fn qfi(&self) -> f64 {
        let m = f64::from(self.m);
        m * m
    }

    /// `cos²(m δ / 2)`
    fn success_prob(&self, mismatch: f64) -> f64 {
        let c = (f64::from(self.m) * mismatch / 2.0).cos();
        c * c
    }

    /// `sin²(m δ / 2)`
    fn infidelity(&self, mismatch: f64) -> f64 {
        let s = (f64::from(self.m) * mismatch / 2.0).sin();
        s * s
    }

    fn success_prob_derivative(&self, mismatch: f64) -> f64 {
        let m = f64::from(self.m);
        -0.5 * m * (m * mismatch).sin()
    }
}

/// Wraps a probe and forces the finite-difference derivative.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifference<P>(pub P);

impl<P: ProbeFamily> ProbeFamily for FiniteDifference<P> {
    fn depth(&self) -> u32 {
        self.0.depth()
    }

    fn qfi(&self) -> f64 {
        self.0.qfi()
    }

    fn success_prob(&self, mismatch: f64) -> f64 {
        self.0.success_prob(mismatch)
    }

    fn infidelity(&self, mismatch: f64) -> f64 {
        self.0.infidelity(mismatch)
    }
}

/// A mismatch held in physical units, with its depth-scaled metric view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    physical: f64,
    depth: u32,
}

impl Mismatch {
    pub fn from_physical(physical: f64, depth: u32) -> Self {
        Self { physical, depth }
    }

    pub fn from_metric(metric: f64, depth: u32) -> Self {
        Self {
            physical: metric / f64::from(depth),
            depth,
        }
    }

    pub fn physical(&self) -> f64 {
        self.physical
    }

    /// `m · (θ − θ̃)`
    pub fn metric(&self) -> f64 {
        f64::from(self.depth) * self.physical
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }
}

/// Quadratic near-optimum infidelity `F_Q δ² / 4`.
pub fn local_infidelity_model(qfi: f64, delta: f64) -> f64 {
    qfi * delta * delta / 4.0
}

/// Principal value in `(−π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let w = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        PI
    } else {
        w
    }
}
