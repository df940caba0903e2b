//! Single-shot measurement learning as a self-certifying sensing estimator.
//!
//! The crate provides
//!
//! * [`protocol`]: the one-bit controller (freeze on success, random kick on
//!   failure, halt after a run of successes);
//! * [`sensing`]: probe families, NOON success landscapes and QFI;
//! * [`certificates`]: run-length certificates, monitored proxies and the
//!   Fisher information of the one-bit record;
//! * [`experiments`]: seeded, thread-count-independent Monte Carlo datasets;
//! * [`stats`] and [`scaling`]: aggregation and log-log exponent fits.

pub mod certificates;
pub mod error;
pub mod experiments;
pub mod protocol;
pub mod scaling;
pub mod sensing;
pub mod stats;

pub use certificates::{
    cert_scale, cert_scale_asymptotic, classical_fisher, fisher_matching_curve, param_certificate,
    Certificate, FisherRow,
};
pub use error::{Error, PartialTrajectory, Result};
pub use experiments::{
    crb_overlay, run_global_aliasing, run_local_fixed_depth, run_multiscale, CellResult,
    CellTrials, Dataset, GlobalConfig, LocalConfig, MultiscaleConfig, MultiscaleResult,
};
pub use protocol::{
    run_to_halt, step, ControllerState, ProtocolParams, ShotOutcome, TrajectoryRecord,
};
pub use sensing::{wrap_phase, Mismatch, NoonProbe, ProbeFamily};
pub use stats::{mean_stderr, ols_loglog, rmse, FitResult};
