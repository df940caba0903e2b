use thiserror::Error;

/// State of a trajectory that ran out of shot budget before halting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialTrajectory {
    pub shots: u64,
    pub x: f64,
    pub run: u32,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("success probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("no halt within {} shots (x = {}, run = {})", .0.shots, .0.x, .0.run)]
    BudgetExhausted(PartialTrajectory),

    #[error("Bernoulli probability {0} is degenerate; the Fisher information is 0/0 there")]
    DegenerateProbability(f64),

    #[error("log-log fit needs strictly positive coordinates, got ({0}, {1})")]
    NonPositive(f64, f64),

    #[error("fit needs at least two distinct x values")]
    DegenerateFit,

    #[error("empty sample")]
    EmptySample,

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
