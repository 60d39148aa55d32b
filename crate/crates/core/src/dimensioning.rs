//! Minimal-channel optimization under a reliability target, inflation of
//! estimated batch sizes against estimation error, and capacity searches
//! (the largest load a fixed frame can admit).
//!
//! With integer channel counts the target can rarely be met with
//! equality, so "minimal" means the smallest channel count whose
//! reliability is at or above the target; the achieved value is reported
//! alongside so the overshoot is visible.

use crate::arrivals::{ArrivalPmf, BetaBatchModel, PoissonModel};
use crate::error::{Error, Result};
use crate::protocol::ProtocolConfig;
use crate::reliability;

pub const DEFAULT_MAX_CHANNELS: u32 = 40;

/// A reliability-latency requirement: resolve each active user within
/// `latency_slots` with probability at least `target_reliability`, using
/// at most `max_channels` frequency channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementSpec {
    target_reliability: f64,
    latency_slots: u32,
    mpr_order: u32,
    max_channels: u32,
}

impl RequirementSpec {
    pub fn new(target_reliability: f64, latency_slots: u32, mpr_order: u32) -> Result<Self> {
        if !(target_reliability > 0.0 && target_reliability < 1.0) {
            return Err(Error::InvalidParameter {
                name: "target_reliability",
                reason: format!("must lie in (0, 1), got {target_reliability}"),
            });
        }
        if latency_slots == 0 || mpr_order == 0 {
            return Err(Error::InvalidParameter {
                name: "latency_slots/mpr_order",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            target_reliability,
            latency_slots,
            mpr_order,
            max_channels: DEFAULT_MAX_CHANNELS,
        })
    }

    pub fn with_max_channels(mut self, max_channels: u32) -> Result<Self> {
        if max_channels == 0 {
            return Err(Error::InvalidParameter {
                name: "max_channels",
                reason: "must be at least 1".into(),
            });
        }
        self.max_channels = max_channels;
        Ok(self)
    }

    pub fn target_reliability(&self) -> f64 {
        self.target_reliability
    }

    pub fn latency_slots(&self) -> u32 {
        self.latency_slots
    }

    pub fn mpr_order(&self) -> u32 {
        self.mpr_order
    }

    pub fn max_channels(&self) -> u32 {
        self.max_channels
    }

    /// The frame obtained by granting `channels` channels under this
    /// requirement's latency and MPR order.
    pub fn protocol(&self, channels: u32) -> ProtocolConfig {
        ProtocolConfig::new(channels, self.latency_slots, self.mpr_order)
            .expect("validated fields")
    }
}

/// Outcome of a minimal-channel search. `g_min = 0` encodes
/// infeasibility; for feasible results `achieved_reliability` is the
/// value at `g_min`, for infeasible ones the best value seen at the
/// channel cap (0 when no candidate count had a whole superslot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionResult {
    pub feasible: bool,
    pub g_min: u32,
    pub achieved_reliability: f64,
}

impl DimensionResult {
    fn infeasible(best: f64) -> Self {
        Self {
            feasible: false,
            g_min: 0,
            achieved_reliability: best,
        }
    }
}

/// Relative error bound of a batch-size estimator; dimensioning inflates
/// the estimate by `1 + epsilon_max` to stay on the safe side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationErrorModel {
    epsilon_max: f64,
}

impl EstimationErrorModel {
    pub fn new(epsilon_max: f64) -> Result<Self> {
        if !(epsilon_max >= 0.0 && epsilon_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon_max",
                reason: format!("must be finite and non-negative, got {epsilon_max}"),
            });
        }
        Ok(Self { epsilon_max })
    }

    pub fn exact() -> Self {
        Self { epsilon_max: 0.0 }
    }

    pub fn epsilon_max(&self) -> f64 {
        self.epsilon_max
    }

    /// ceil(n * (1 + epsilon_max)), with a snap-to-integer guard so exact
    /// products are not pushed up by float rounding.
    pub fn inflate(&self, n: u32) -> u32 {
        let raw = n as f64 * (1.0 + self.epsilon_max);
        let nearest = raw.round();
        let inflated = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
            nearest
        } else {
            raw.ceil()
        };
        inflated.min(u32::MAX as f64) as u32
    }
}

/// Smallest channel count in `[1, max_channels]` whose known-batch
/// reliability reaches the target. Channel counts whose frame holds no
/// superslot are skipped.
pub fn dimension_known_n(n: u32, req: &RequirementSpec) -> Result<DimensionResult> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(search_channels(req, |cfg| {
        reliability::known_count(cfg, n).expect("n >= 1 and superslots checked by caller")
    }))
}

/// Smallest channel count whose mixture reliability over the arrival pmf
/// reaches the target.
pub fn dimension_mixture(pmf: &ArrivalPmf, req: &RequirementSpec) -> DimensionResult {
    search_channels(req, |cfg| {
        reliability::mixture(cfg, pmf).expect("superslots checked by caller")
    })
}

/// Dimension for an estimated batch size inflated by the error bound:
/// the channel count for `ceil(n_estimate * (1 + epsilon_max))` users.
pub fn overprovisioned_dimension(
    n_estimate: u32,
    err: &EstimationErrorModel,
    req: &RequirementSpec,
) -> Result<DimensionResult> {
    if n_estimate == 0 {
        return Err(Error::EmptyBatch);
    }
    dimension_known_n(err.inflate(n_estimate), req)
}

fn search_channels<F: Fn(&ProtocolConfig) -> f64>(req: &RequirementSpec, rel: F) -> DimensionResult {
    let mut best = 0.0f64;
    for g in 1..=req.max_channels {
        let cfg = req.protocol(g);
        if cfg.superslot_count().is_err() {
            continue;
        }
        let r = rel(&cfg);
        best = r;
        if r >= req.target_reliability {
            return DimensionResult {
                feasible: true,
                g_min: g,
                achieved_reliability: r,
            };
        }
    }
    DimensionResult::infeasible(best)
}

/// Largest batch size a fixed frame admits at the target reliability.
///
/// Exploits that reliability does not increase with the batch size past
/// the MPR order; the returned value is verified against its defining
/// inequality pair (feasible at the value, infeasible one above) and the
/// search fails rather than return a wrong extremum.
pub fn capacity_known_n(channels: u32, req: &RequirementSpec) -> Result<u32> {
    let cfg = req.protocol(channels);
    cfg.superslot_count()?;
    let rel = |n: u32| reliability::known_count(&cfg, n).expect("n >= 1, superslots exist");

    // n <= K is always resolved, so capacity is at least the MPR order.
    let mut lo = req.mpr_order;
    let mut hi = lo.saturating_mul(2).max(lo + 1);
    while rel(hi) >= req.target_reliability {
        lo = hi;
        if hi > u32::MAX / 2 {
            return Err(Error::MonotonicityViolation { at: hi as f64 });
        }
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if rel(mid) >= req.target_reliability {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if rel(lo) >= req.target_reliability && rel(lo + 1) < req.target_reliability {
        Ok(lo)
    } else {
        Err(Error::MonotonicityViolation { at: lo as f64 })
    }
}

/// Largest Poisson mean the frame admits, located by bisection to an
/// absolute tolerance `tol` on the mean.
pub fn capacity_poisson(channels: u32, req: &RequirementSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive and finite, got {tol}"),
        });
    }
    let cfg = req.protocol(channels);
    cfg.superslot_count()?;
    let rel = |lambda: f64| -> Result<f64> {
        let pmf = PoissonModel::new(lambda)?.pmf();
        reliability::mixture(&cfg, &pmf)
    };

    let mut lo = tol;
    if rel(lo)? < req.target_reliability {
        return Err(Error::NoFeasibleCapacity);
    }
    let mut hi = lo.max(1.0);
    while rel(hi)? >= req.target_reliability {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::MonotonicityViolation { at: hi });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rel(mid)? >= req.target_reliability {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The defining pair: feasible at the result, infeasible a tolerance above.
    if rel(lo)? >= req.target_reliability && rel(lo + tol)? < req.target_reliability {
        Ok(lo)
    } else {
        Err(Error::MonotonicityViolation { at: lo })
    }
}

/// Largest 3GPP Beta population (`n_tot`) the frame admits, by integer
/// bisection to within `tol` users. Shapes and windows are the 3GPP
/// defaults (alpha=3, beta=4, 10 s activation, 10 ms intervals).
pub fn capacity_beta(channels: u32, req: &RequirementSpec, tol: u64) -> Result<u64> {
    if tol == 0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be at least 1 user".into(),
        });
    }
    let cfg = req.protocol(channels);
    cfg.superslot_count()?;
    let rel = |n_tot: u64| -> Result<f64> {
        let pmf = BetaBatchModel::three_gpp(n_tot)?.pmf();
        reliability::mixture(&cfg, &pmf)
    };

    let mut lo = 1u64;
    if rel(lo)? < req.target_reliability {
        return Err(Error::NoFeasibleCapacity);
    }
    let mut hi = 2u64;
    while rel(hi)? >= req.target_reliability {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::MonotonicityViolation { at: hi as f64 });
        }
    }
    while hi - lo > tol {
        let mid = lo + (hi - lo) / 2;
        if rel(mid)? >= req.target_reliability {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if rel(lo)? >= req.target_reliability && rel(lo + tol)? < req.target_reliability {
        Ok(lo)
    } else {
        Err(Error::MonotonicityViolation { at: lo as f64 })
    }
}
