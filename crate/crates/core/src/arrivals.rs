//! Batch-arrival models: how many users contend in one frame.
//!
//! Every model produces a finite [`ArrivalPmf`] over batch sizes
//! `0..=n_max`, truncated once the cumulative mass reaches
//! `1 - tail_tolerance`; the cut-off mass is recorded so downstream
//! consumers can account for it (they treat it pessimistically).
//!
//! The Beta model follows the 3GPP bursty-activation traffic model: each
//! of `n_tot` devices activates at an instant drawn from a Beta(alpha,
//! beta) profile over an activation window, and activations are gated
//! into frame-length intervals. The per-frame batch is binomial given the
//! interval, and the model reports the time-averaged mixture across
//! intervals. Averaging the per-interval pmfs before mixing with any
//! per-batch quantity is exact, because every downstream use is linear in
//! the conditional pmf.

use crate::error::{Error, Result};
use crate::numeric::{ln_gamma, reg_inc_beta};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Finite pmf of the number of arrived users in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPmf {
    masses: Vec<f64>,
    truncated_tail: f64,
    mean: f64,
}

impl ArrivalPmf {
    /// Build a pmf from raw parts, checking non-negativity and
    /// normalization (`sum + tail` within 1e-12 of one).
    pub fn from_parts(masses: Vec<f64>, truncated_tail: f64, mean: f64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter {
                name: "masses",
                reason: "pmf needs at least the n=0 entry".into(),
            });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) || truncated_tail < 0.0 {
            return Err(Error::InvalidParameter {
                name: "masses",
                reason: "masses must be finite and non-negative".into(),
            });
        }
        let sum: f64 = masses.iter().sum();
        if (sum + truncated_tail - 1.0).abs() > 1e-12 {
            return Err(Error::PmfNotNormalized {
                sum,
                tail: truncated_tail,
            });
        }
        Ok(Self {
            masses,
            truncated_tail,
            mean,
        })
    }

    /// Mass at batch size `n`; zero beyond the truncated support.
    pub fn mass(&self, n: u32) -> f64 {
        self.masses.get(n as usize).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Largest batch size in the truncated support.
    pub fn n_max(&self) -> u32 {
        (self.masses.len() - 1) as u32
    }

    /// Probability mass cut off by truncation.
    pub fn truncated_tail(&self) -> f64 {
        self.truncated_tail
    }

    /// Mean of the untruncated distribution (analytic, not the truncated
    /// sum).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Mean of the truncated support, `sum(n * mass[n])`.
    pub fn weighted_mean(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(n, m)| n as f64 * m)
            .sum()
    }
}

/// Degenerate pmf: the batch size is known exactly.
pub fn known_pmf(n: u32) -> ArrivalPmf {
    let mut masses = vec![0.0; n as usize + 1];
    masses[n as usize] = 1.0;
    ArrivalPmf {
        masses,
        truncated_tail: 0.0,
        mean: n as f64,
    }
}

/// Poisson batch arrivals with a configurable truncation tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonModel {
    lambda: f64,
    tail_tolerance: f64,
}

impl PoissonModel {
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_tail_tolerance(lambda, DEFAULT_TAIL_TOLERANCE)
    }

    pub fn with_tail_tolerance(lambda: f64, tail_tolerance: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be positive and finite, got {lambda}"),
            });
        }
        check_tail_tolerance(tail_tolerance)?;
        Ok(Self {
            lambda,
            tail_tolerance,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// `mass[n] = lambda^n e^(-lambda) / n!`, truncated at cumulative mass
    /// `1 - tail_tolerance`. Evaluated in the log domain so large means
    /// stay finite.
    pub fn pmf(&self) -> ArrivalPmf {
        let lambda = self.lambda;
        let mut masses = Vec::new();
        let mut cum = 0.0f64;
        let mut n = 0u64;
        loop {
            let ln_mass = n as f64 * lambda.ln() - lambda - ln_gamma(n as f64 + 1.0);
            let mass = ln_mass.exp();
            masses.push(mass);
            cum += mass;
            if 1.0 - cum <= self.tail_tolerance {
                break;
            }
            // Tolerance unreachable in float arithmetic: stop once the
            // terms have vanished past the mode.
            if mass < f64::MIN_POSITIVE && n as f64 > lambda {
                break;
            }
            n += 1;
        }
        ArrivalPmf {
            masses,
            truncated_tail: (1.0 - cum).max(0.0),
            mean: lambda,
        }
    }
}

/// 3GPP Beta activation traffic gated into frame-length intervals.
///
/// `n_tot` devices each activate once inside an activation window of
/// `activation_time_s` seconds, at an instant with density proportional
/// to t^(alpha-1) (T_A - t)^(beta-1). The window splits into
/// `activation_time_s / interval_s` equal intervals (one frame each);
/// the split must be exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBatchModel {
    n_tot: u64,
    alpha: f64,
    beta: f64,
    activation_time_s: f64,
    interval_s: f64,
    tail_tolerance: f64,
}

/// Default shape and window of the 3GPP model.
pub const THREE_GPP_ALPHA: f64 = 3.0;
pub const THREE_GPP_BETA: f64 = 4.0;
pub const THREE_GPP_ACTIVATION_TIME_S: f64 = 10.0;
/// Default frame duration used with the 3GPP model (10 ms).
pub const THREE_GPP_INTERVAL_S: f64 = 0.01;

impl BetaBatchModel {
    pub fn new(
        n_tot: u64,
        alpha: f64,
        beta: f64,
        activation_time_s: f64,
        interval_s: f64,
    ) -> Result<Self> {
        Self::with_tail_tolerance(
            n_tot,
            alpha,
            beta,
            activation_time_s,
            interval_s,
            DEFAULT_TAIL_TOLERANCE,
        )
    }

    /// The standard 3GPP parameterization: alpha=3, beta=4, 10 s window,
    /// 10 ms intervals.
    pub fn three_gpp(n_tot: u64) -> Result<Self> {
        Self::new(
            n_tot,
            THREE_GPP_ALPHA,
            THREE_GPP_BETA,
            THREE_GPP_ACTIVATION_TIME_S,
            THREE_GPP_INTERVAL_S,
        )
    }

    pub fn with_tail_tolerance(
        n_tot: u64,
        alpha: f64,
        beta: f64,
        activation_time_s: f64,
        interval_s: f64,
        tail_tolerance: f64,
    ) -> Result<Self> {
        if n_tot == 0 {
            return Err(Error::InvalidParameter {
                name: "n_tot",
                reason: "population must be at least 1".into(),
            });
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("shape must be positive and finite, got {v}"),
                });
            }
        }
        for (name, v) in [
            ("activation_time_s", activation_time_s),
            ("interval_s", interval_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("duration must be positive and finite, got {v}"),
                });
            }
        }
        check_tail_tolerance(tail_tolerance)?;
        let ratio = activation_time_s / interval_s;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::NonIntegerIntervalCount {
                activation_time_s,
                interval_s,
            });
        }
        Ok(Self {
            n_tot,
            alpha,
            beta,
            activation_time_s,
            interval_s,
            tail_tolerance,
        })
    }

    pub fn n_tot(&self) -> u64 {
        self.n_tot
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn activation_time_s(&self) -> f64 {
        self.activation_time_s
    }

    pub fn interval_s(&self) -> f64 {
        self.interval_s
    }

    /// Number of frame-length intervals in the activation window.
    pub fn interval_count(&self) -> u64 {
        (self.activation_time_s / self.interval_s).round() as u64
    }

    /// Probability that one device activates inside interval `t_s`:
    /// the Beta density integrated over [t_s*interval, (t_s+1)*interval],
    /// via the regularized incomplete beta function.
    pub fn interval_mass(&self, t_s: u64) -> Result<f64> {
        let count = self.interval_count();
        if t_s >= count {
            return Err(Error::IntervalIndexOutOfRange {
                index: t_s,
                count,
            });
        }
        let lo = t_s as f64 / count as f64;
        let hi = (t_s + 1) as f64 / count as f64;
        let mass = reg_inc_beta(self.alpha, self.beta, hi) - reg_inc_beta(self.alpha, self.beta, lo);
        Ok(mass.max(0.0))
    }

    /// All interval activation probabilities, in time order.
    pub fn interval_masses(&self) -> Vec<f64> {
        (0..self.interval_count())
            .map(|t_s| self.interval_mass(t_s).expect("index in range"))
            .collect()
    }

    /// Time-averaged mixture pmf of the per-frame batch size:
    /// `mass[n]` = mean over intervals of `Binomial(n; n_tot, P[t_s])`,
    /// truncated at cumulative mass `1 - tail_tolerance`.
    ///
    /// Binomial terms are evaluated in the log domain so populations in
    /// the tens of thousands stay finite. The exact mixture mean is
    /// `n_tot / interval_count`.
    pub fn pmf(&self) -> ArrivalPmf {
        let count = self.interval_count();
        let probs = self.interval_masses();
        let inv_count = 1.0 / count as f64;
        // Per-interval logs; intervals with zero mass only ever produce
        // n = 0 and are handled separately.
        let logs: Vec<Option<(f64, f64)>> = probs
            .iter()
            .map(|&p| {
                if p > 0.0 && p < 1.0 {
                    Some((p.ln(), (-p).ln_1p()))
                } else {
                    None
                }
            })
            .collect();
        let max_mean = self
            .n_tot as f64
            * probs.iter().copied().fold(0.0f64, f64::max);

        let mut masses = Vec::new();
        let mut cum = 0.0f64;
        let mut ln_choose = 0.0f64; // ln C(n_tot, 0)
        let mut n: u64 = 0;
        loop {
            let nf = n as f64;
            let rem = (self.n_tot - n) as f64;
            let mut mass = 0.0f64;
            for (ts, log) in logs.iter().enumerate() {
                match log {
                    Some((ln_p, ln_1mp)) => {
                        mass += (ln_choose + nf * ln_p + rem * ln_1mp).exp();
                    }
                    None => {
                        // p == 0 puts all mass at n = 0; p == 1 at n_tot.
                        let p = probs[ts];
                        if (p == 0.0 && n == 0) || (p == 1.0 && n == self.n_tot) {
                            mass += 1.0;
                        }
                    }
                }
            }
            mass *= inv_count;
            masses.push(mass);
            cum += mass;
            if 1.0 - cum <= self.tail_tolerance || n == self.n_tot {
                break;
            }
            if mass < f64::MIN_POSITIVE && nf > max_mean {
                break;
            }
            ln_choose += rem.ln() - (nf + 1.0).ln();
            n += 1;
        }
        ArrivalPmf {
            masses,
            truncated_tail: (1.0 - cum).max(0.0),
            mean: self.n_tot as f64 * inv_count,
        }
    }
}

fn check_tail_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_tolerance",
            reason: format!("must lie in (0, 1), got {tol}"),
        });
    }
    Ok(())
}
