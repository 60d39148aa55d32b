//! Resolved users per slot under a reliability-latency requirement, for
//! the two knowledge regimes:
//!
//! * **known batch size** — every batch is served with its own minimal
//!   channel count (optionally inflated against estimation error);
//! * **distribution only** — one channel count serves every batch, chosen
//!   from the mixture reliability.
//!
//! Each throughput is reported in two flavors: with the reliability
//! actually achieved at the selected channel count (what a simulator
//! measures) and with the bare target as the resolution factor (the
//! granularity-free idealization). The two differ only by the overshoot
//! that integer channel counts force.
//!
//! Batches that no admissible channel count can serve contribute zero
//! throughput; their probability mass is reported so the caller can
//! decide whether to renormalize.

use crate::arrivals::ArrivalPmf;
use crate::dimensioning::{
    dimension_mixture, overprovisioned_dimension, DimensionResult, EstimationErrorModel,
    RequirementSpec,
};
use crate::error::{Error, Result};
use crate::reliability;

/// Known-batch-size regime throughput (users per slot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownThroughput {
    /// Throughput weighted by the reliability achieved at each selected
    /// channel count.
    pub rate: f64,
    /// Throughput with the target reliability as the resolution factor.
    pub rate_target_factor: f64,
    /// Probability mass of batch sizes with no feasible channel count
    /// (includes the truncated pmf tail).
    pub infeasible_mass: f64,
}

impl KnownThroughput {
    /// `rate` renormalized over the feasible mass, the alternative
    /// convention for handling infeasible batches.
    pub fn rate_renormalized(&self) -> f64 {
        if self.infeasible_mass < 1.0 {
            self.rate / (1.0 - self.infeasible_mass)
        } else {
            0.0
        }
    }

    pub fn rate_target_factor_renormalized(&self) -> f64 {
        if self.infeasible_mass < 1.0 {
            self.rate_target_factor / (1.0 - self.infeasible_mass)
        } else {
            0.0
        }
    }
}

/// Distribution-only regime throughput (users per slot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureThroughput {
    /// Achieved mixture reliability times mean load over frame slots.
    pub rate: f64,
    /// Same with the bare target in place of the achieved reliability.
    pub rate_target_factor: f64,
    /// Exact expectation of resolved users per slot at the selected
    /// channel count — the quantity a frame simulator estimates.
    pub expected_user_rate: f64,
    pub feasible: bool,
    pub dimension: DimensionResult,
}

/// Per-batch dimensioning: every batch size is served at its own minimal
/// (over-provisioned) channel count; infeasible sizes contribute zero and
/// accumulate into `infeasible_mass`.
pub fn throughput_known(
    pmf: &ArrivalPmf,
    req: &RequirementSpec,
    err: &EstimationErrorModel,
) -> KnownThroughput {
    let l = req.latency_slots() as f64;
    let mut rate = 0.0f64;
    let mut rate_target = 0.0f64;
    let mut infeasible_mass = pmf.truncated_tail();
    for (n, &mass) in pmf.masses().iter().enumerate().skip(1) {
        if mass == 0.0 {
            continue;
        }
        let n = n as u32;
        let dim = overprovisioned_dimension(n, err, req).expect("n >= 1");
        if !dim.feasible {
            infeasible_mass += mass;
            continue;
        }
        let cfg = req.protocol(dim.g_min);
        // Reliability of the true batch at the (possibly inflated)
        // channel count.
        let r = reliability::known_count(&cfg, n).expect("feasible g has superslots");
        let denom = dim.g_min as f64 * l;
        rate += mass * n as f64 * r / denom;
        rate_target += mass * n as f64 * req.target_reliability() / denom;
    }
    KnownThroughput {
        rate,
        rate_target_factor: rate_target,
        infeasible_mass,
    }
}

/// Single-dimensioning regime: one channel count from the mixture
/// reliability serves every batch.
pub fn throughput_mixture(pmf: &ArrivalPmf, req: &RequirementSpec) -> MixtureThroughput {
    let dim = dimension_mixture(pmf, req);
    if !dim.feasible {
        return MixtureThroughput {
            rate: 0.0,
            rate_target_factor: 0.0,
            expected_user_rate: 0.0,
            feasible: false,
            dimension: dim,
        };
    }
    let cfg = req.protocol(dim.g_min);
    let denom = dim.g_min as f64 * req.latency_slots() as f64;
    let expected_resolved: f64 = pmf
        .masses()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &mass)| mass > 0.0)
        .map(|(n, &mass)| {
            mass * n as f64 * reliability::known_count(&cfg, n as u32).expect("superslots exist")
        })
        .sum();
    MixtureThroughput {
        rate: dim.achieved_reliability * pmf.mean() / denom,
        rate_target_factor: req.target_reliability() * pmf.mean() / denom,
        expected_user_rate: expected_resolved / denom,
        feasible: true,
        dimension: dim,
    }
}

/// Relative throughput benefit of knowing the batch size,
/// `(t_known - t_star) / t_star`.
///
/// Infinite when only the known regime carries throughput; an error when
/// neither does.
pub fn normalized_gain(t_known: f64, t_star: f64, star_feasible: bool) -> Result<f64> {
    if star_feasible && t_star > 0.0 {
        Ok((t_known - t_star) / t_star)
    } else if t_known > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Err(Error::GainUndefined)
    }
}

/// Both regimes plus their normalized gain in one report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub t_known: f64,
    pub t_star: f64,
    /// `(t_known - t_star)/t_star`; +inf when only the known regime is
    /// feasible.
    pub gain: f64,
    pub infeasible_mass_known: f64,
    pub star_feasible: bool,
}

pub fn throughput_report(
    pmf: &ArrivalPmf,
    req: &RequirementSpec,
    err: &EstimationErrorModel,
) -> Result<ThroughputReport> {
    let known = throughput_known(pmf, req, err);
    let star = throughput_mixture(pmf, req);
    let gain = normalized_gain(known.rate, star.rate, star.feasible)?;
    Ok(ThroughputReport {
        t_known: known.rate,
        t_star: star.rate,
        gain,
        infeasible_mass_known: known.infeasible_mass,
        star_feasible: star.feasible,
    })
}
