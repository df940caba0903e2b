//! Run-length evidence and Fisher information of the one-bit record.
//!
//! A halted controller has just seen `m_halt` successes at a frozen control,
//! so the terminal run is a plain Bernoulli sequence. Its probability under
//! the null `ε ≥ ε₀` is at most `(1 − ε₀)^m_halt`, which fixes the certified
//! infidelity scale `1 − η^(1/m_halt)` at significance `η`. Near the optimum
//! the QFI converts that scale into a parameter half-width.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sensing::ProbeFamily;

/// Probability of `m_halt` consecutive successes at fixed infidelity `eps`.
pub fn run_probability(eps: f64, m_halt: u32) -> f64 {
    (1.0 - eps).powf(f64::from(m_halt))
}

/// Largest terminal-run probability compatible with the null `ε ≥ eps0`.
/// The run probability is decreasing in `ε`, so the supremum sits at `eps0`.
pub fn null_bound(eps0: f64, m_halt: u32) -> f64 {
    run_probability(eps0, m_halt)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "eta",
            format!("significance must lie in (0, 1], got {eta}"),
        ))
    }
}

fn check_m_halt(m_halt: u32) -> Result<()> {
    if m_halt == 0 {
        Err(invalid("m_halt", "run length must be >= 1"))
    } else {
        Ok(())
    }
}

/// `1 − η^(1/m_halt)`, evaluated as `−expm1(ln η / m_halt)` so long runs keep
/// full relative precision.
pub fn cert_scale(m_halt: u32, eta: f64) -> Result<f64> {
    check_m_halt(m_halt)?;
    check_eta(eta)?;
    Ok(-(eta.ln() / f64::from(m_halt)).exp_m1())
}

/// Leading-order `ln(1/η) / m_halt`.
pub fn cert_scale_asymptotic(m_halt: u32, eta: f64) -> Result<f64> {
    check_m_halt(m_halt)?;
    check_eta(eta)?;
    Ok(-eta.ln() / f64::from(m_halt))
}

fn check_qfi(qfi: f64) -> Result<()> {
    if qfi > 0.0 && qfi.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            "qfi",
            format!("Fisher information must be positive, got {qfi}"),
        ))
    }
}

/// Certified parameter half-width `(2/√F_Q) · √ε_cert`.
pub fn param_certificate(m_halt: u32, eta: f64, qfi: f64) -> Result<f64> {
    check_qfi(qfi)?;
    Ok(2.0 / qfi.sqrt() * cert_scale(m_halt, eta)?.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub m_halt: u32,
    pub significance: f64,
    pub eps_cert: f64,
    pub eps_cert_asymptotic: f64,
    pub param_cert: Option<f64>,
}

impl Certificate {
    pub fn new(m_halt: u32, eta: f64, qfi: Option<f64>) -> Result<Self> {
        let eps_cert = cert_scale(m_halt, eta)?;
        let param_cert = match qfi {
            Some(f) => {
                check_qfi(f)?;
                Some(2.0 / f.sqrt() * eps_cert.sqrt())
            }
            None => None,
        };
        Ok(Self {
            m_halt,
            significance: eta,
            eps_cert,
            eps_cert_asymptotic: cert_scale_asymptotic(m_halt, eta)?,
            param_cert,
        })
    }
}

/// Running infidelity proxy `1 / (1 + m_s)`.
pub fn monitored_infidelity(m_s: u32) -> f64 {
    1.0 / (1.0 + f64::from(m_s))
}

/// Running parameter proxy `(2/√F_Q) / √(1 + m_s)`.
pub fn monitored_param(m_s: u32, qfi: f64) -> Result<f64> {
    check_qfi(qfi)?;
    Ok(2.0 / qfi.sqrt() / (1.0 + f64::from(m_s)).sqrt())
}

/// Same proxy for a real-valued (e.g. averaged) run length.
pub fn monitored_infidelity_at(run_length: f64) -> f64 {
    1.0 / (1.0 + run_length)
}

/// Mean run length `(1 − ε)/ε` before the next failure at frozen `ε`.
pub fn expected_run_length(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps <= 1.0 {
        Ok((1.0 - eps) / eps)
    } else {
        Err(invalid(
            "eps",
            format!("infidelity must lie in (0, 1], got {eps}"),
        ))
    }
}

/// Fisher information `dp² / (p(1−p))` of one Bernoulli outcome.
pub fn classical_fisher(p: f64, dp: f64) -> Result<f64> {
    bernoulli_fisher(p, 1.0 - p, dp)
}

/// As [`classical_fisher`] with `1 − p` supplied separately, for callers
/// that have it without cancellation.
pub fn bernoulli_fisher(p: f64, q: f64, dp: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0 && p <= 1.0 && q <= 1.0) {
        return Err(Error::DegenerateProbability(p));
    }
    Ok(dp * dp / (p * q))
}

/// Value of the one-bit Fisher information at a point where `p ∈ {0, 1}`.
///
/// At a bright fringe (`p = 1`) the limit is the QFI. Elsewhere it is taken
/// as the mean of the two one-sided neighbours at `±10⁻⁴ / depth`.
pub fn classical_fisher_limit<P: ProbeFamily>(probe: &P, mismatch: f64) -> f64 {
    if probe.infidelity(mismatch) == 0.0 {
        return probe.qfi();
    }
    let h = 1e-4 / f64::from(probe.depth());
    let side = |d: f64| {
        bernoulli_fisher(
            probe.success_prob(d),
            probe.infidelity(d),
            probe.success_prob_derivative(d),
        )
        .unwrap_or(f64::NAN)
    };
    0.5 * (side(mismatch - h) + side(mismatch + h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherRow {
    pub delta: f64,
    pub i_cl: f64,
    pub f_q: f64,
    /// True when `i_cl` came from [`classical_fisher_limit`].
    pub limit: bool,
}

/// One-bit Fisher information along a mismatch grid, beside the probe QFI.
pub fn fisher_matching_curve<P: ProbeFamily>(probe: &P, deltas: &[f64]) -> Vec<FisherRow> {
    let f_q = probe.qfi();
    deltas
        .iter()
        .map(|&delta| {
            let direct = bernoulli_fisher(
                probe.success_prob(delta),
                probe.infidelity(delta),
                probe.success_prob_derivative(delta),
            );
            match direct {
                Ok(i_cl) => FisherRow {
                    delta,
                    i_cl,
                    f_q,
                    limit: false,
                },
                Err(_) => FisherRow {
                    delta,
                    i_cl: classical_fisher_limit(probe, delta),
                    f_q,
                    limit: true,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{FiniteDifference, NoonProbe};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn run_probability_examples() {
        assert_eq!(run_probability(0.0, 17), 1.0);
        assert_eq!(run_probability(0.5, 3), 0.125);
        assert_eq!(run_probability(1.0, 1), 0.0);
        assert_eq!(null_bound(0.5, 3), 0.125);
        assert_eq!(null_bound(0.0, 40), 1.0);
    }

    #[test]
    fn null_bound_is_the_supremum_over_the_null() {
        for m_halt in [1, 5, 20, 320] {
            for i in 0..100 {
                let eps0 = f64::from(i) / 100.0;
                let bound = null_bound(eps0, m_halt);
                for j in i..=100 {
                    assert!(run_probability(f64::from(j) / 100.0, m_halt) <= bound);
                }
                let prev = if i > 0 {
                    null_bound(f64::from(i - 1) / 100.0, m_halt)
                } else {
                    1.0
                };
                assert!(bound <= prev);
                if i > 0 && bound > f64::MIN_POSITIVE {
                    assert!(bound < prev);
                }
            }
        }
    }

    #[test]
    fn cert_scale_examples() {
        assert_relative_eq!(cert_scale(1, 0.1).unwrap(), 0.9, max_relative = 1e-15);
        assert_eq!(cert_scale(37, 1.0).unwrap(), 0.0);
        // 1 − 0.05^(1/20), 40-digit reference
        assert_relative_eq!(
            cert_scale(20, 0.05).unwrap(),
            0.139_108_340_668_265_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            cert_scale(10_000, 0.01).unwrap(),
            4.604_109_969_121_545e-4,
            max_relative = 1e-14
        );
    }

    #[test]
    fn cert_scale_rejects_bad_significance() {
        assert!(cert_scale(10, 0.0).is_err());
        assert!(cert_scale(10, -0.1).is_err());
        assert!(cert_scale(10, 1.5).is_err());
        assert!(cert_scale(0, 0.1).is_err());
    }

    #[test]
    fn asymptotic_examples_and_sandwich() {
        assert_relative_eq!(
            cert_scale_asymptotic(320, 0.05).unwrap(),
            0.009_361_663_354_856_222,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            cert_scale_asymptotic(1, (-1f64).exp()).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        for m_halt in 1..2000 {
            for eta in [0.3, 0.1, 0.05, 0.01, 1e-6] {
                let c = cert_scale_asymptotic(m_halt, eta).unwrap();
                let e = cert_scale(m_halt, eta).unwrap();
                assert!(c - c * c / 2.0 <= e && e <= c, "M={m_halt} η={eta}");
            }
        }
    }

    #[test]
    fn cert_scale_monotone() {
        for eta in [0.1, 0.05, 0.01] {
            let mut prev = f64::INFINITY;
            for m_halt in 1..5000 {
                let e = cert_scale(m_halt, eta).unwrap();
                assert!(e < prev);
                prev = e;
            }
        }
        let mut prev = f64::INFINITY;
        for k in 1..=1000 {
            let e = cert_scale(50, f64::from(k) / 1000.0).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn param_certificate_examples() {
        assert_relative_eq!(
            param_certificate(320, 0.05, 64.0).unwrap(),
            0.024_132_420_372_918_56,
            max_relative = 1e-13
        );
        assert_eq!(param_certificate(99, 1.0, 9.0).unwrap(), 0.0);
        for m in [1.0, 2.0, 8.0] {
            let wide = param_certificate(80, 0.05, m * m).unwrap();
            let narrow = param_certificate(80, 0.05, 4.0 * m * m).unwrap();
            assert_relative_eq!(narrow, wide / 2.0, max_relative = 1e-15);
        }
        assert!(param_certificate(80, 0.05, 0.0).is_err());
    }

    #[test]
    fn certificate_struct_is_consistent() {
        let c = Certificate::new(320, 0.05, Some(64.0)).unwrap();
        assert_eq!(c.eps_cert, cert_scale(320, 0.05).unwrap());
        assert_eq!(c.param_cert.unwrap(), 2.0 / 8.0 * c.eps_cert.sqrt());
        assert!(Certificate::new(320, 0.05, None)
            .unwrap()
            .param_cert
            .is_none());
    }

    #[test]
    fn monitored_proxies() {
        assert_eq!(monitored_infidelity(0), 1.0);
        assert_relative_eq!(monitored_infidelity(9), 0.1, max_relative = 1e-15);
        assert_eq!(monitored_param(0, 4.0).unwrap(), 1.0);
        assert_eq!(monitored_param(3, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            monitored_param(99, 64.0).unwrap(),
            0.025,
            max_relative = 1e-15
        );
    }

    #[test]
    fn proxy_inverts_expected_run_length() {
        for k in 1..=1000 {
            let eps = f64::from(k) / 1000.0;
            let run = expected_run_length(eps).unwrap();
            assert_relative_eq!(monitored_infidelity_at(run), eps, max_relative = 1e-14);
        }
    }

    #[test]
    fn expected_run_length_examples() {
        assert_eq!(expected_run_length(0.5).unwrap(), 1.0);
        assert_eq!(expected_run_length(1.0).unwrap(), 0.0);
        assert!(expected_run_length(0.0).is_err());
        assert!(expected_run_length(1.2).is_err());
    }

    #[test]
    fn geometric_sampling_matches_run_length() {
        // Count successes before the first failure by direct Bernoulli draws.
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let eps = 0.1;
        let n = 1_000_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let mut run = 0u32;
                while rng.gen::<f64>() >= eps {
                    run += 1;
                }
                f64::from(run)
            })
            .collect();
        let (mean, se) = crate::stats::mean_stderr(&samples).unwrap();
        let expected = expected_run_length(eps).unwrap();
        assert_relative_eq!(expected, 9.0, max_relative = 1e-14);
        assert!((mean - expected).abs() < 4.0 * se);
    }

    #[test]
    fn classical_fisher_examples() {
        assert_relative_eq!(
            classical_fisher(0.5, 0.25).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        assert!(matches!(
            classical_fisher(1.0, 0.0),
            Err(Error::DegenerateProbability(_))
        ));
        assert!(classical_fisher(0.0, 0.0).is_err());
    }

    #[test]
    fn noon_fisher_is_constant() {
        for m in [1u32, 2, 3, 4, 8] {
            let probe = NoonProbe::new(m).unwrap();
            let mf = f64::from(m);
            for k in 1..500 {
                let delta = f64::from(k) * 1.7e-3;
                let p = (mf * delta / 2.0).cos().powi(2);
                if p < 1e-10 || 1.0 - p < 1e-10 {
                    continue;
                }
                let dp = -(mf / 2.0) * (mf * delta).sin();
                let i_cl = classical_fisher(p, dp).unwrap();
                assert_relative_eq!(i_cl, mf * mf, max_relative = 1e-5);
                let row = &fisher_matching_curve(&probe, &[delta])[0];
                assert_relative_eq!(row.i_cl, mf * mf, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn matching_curve_examples() {
        let probe = NoonProbe::new(2).unwrap();
        let rows = fisher_matching_curve(&probe, &[0.0, 1e-3, 1e-2, 1e-1]);
        assert!(rows[0].limit);
        assert_eq!(rows[0].i_cl, 4.0);
        for row in &rows[1..] {
            assert!(!row.limit);
            assert_relative_eq!(row.i_cl, 4.0, max_relative = 1e-4);
            assert_eq!(row.f_q, 4.0);
        }
        let fd = FiniteDifference(probe);
        for row in fisher_matching_curve(&fd, &[1e-3, 1e-2, 1e-1]) {
            assert_relative_eq!(row.i_cl, 4.0, max_relative = 1e-4);
        }
        let ones = fisher_matching_curve(&NoonProbe::new(1).unwrap(), &[0.0, 1e-4, 0.3, 1.0, 2.5]);
        for row in ones {
            assert_relative_eq!(row.i_cl, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn dark_fringe_limit() {
        // p = 0 exactly is unreachable in floating point at π/m, but the
        // helper must still return the QFI from either side.
        let probe = NoonProbe::new(4).unwrap();
        let lim = classical_fisher_limit(&probe, std::f64::consts::PI / 4.0);
        assert_relative_eq!(lim, 16.0, max_relative = 1e-6);
    }
}
