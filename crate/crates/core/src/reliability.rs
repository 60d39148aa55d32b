//! Closed-form per-user resolution probability of framed slotted ALOHA
//! with K-multipacket reception.
//!
//! With `m` superslots, selection probability `q = 1/m`, and `n` users in
//! the batch, a tagged user is resolved exactly when at most `K - 1` of
//! the other `n - 1` users land in its superslot:
//!
//! ```text
//! r = (1-q)^(n-1) * sum_{i=0}^{K-1} C(n-1, i) (q/(1-q))^i
//! ```
//!
//! Equivalently `r = m * E[resolved per superslot] / n`; the two routes
//! are kept and cross-checked in tests.
//!
//! Conventions pinned here:
//! * `n <= K` resolves everyone, so `r = 1` exactly (the sum above
//!   telescopes to the same value, but the branch avoids float noise);
//! * a single superslot (`q = 1`) resolves all of `n <= K` and nothing
//!   otherwise, bypassing the singular `q/(1-q)` factor;
//! * an empty batch has no user to fail; mixtures score it as success.
//!
//! Evaluation runs in the log domain with iterating term ratios, so batch
//! sizes in the tens of thousands neither overflow nor lose the leading
//! digits.

use crate::arrivals::ArrivalPmf;
use crate::error::{Error, Result};
use crate::numeric::{ln_binomial, log_sum_exp};
use crate::protocol::ProtocolConfig;

/// Probability that one given user of a batch of `n` is resolved.
///
/// Errors on an empty batch and on frames with no superslot.
pub fn known_count(cfg: &ProtocolConfig, n: u32) -> Result<f64> {
    let m = cfg.superslot_count()?;
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(known_count_from_superslots(m, cfg.mpr_order(), n))
}

/// Same quantity parameterized directly by the superslot count.
pub(crate) fn known_count_from_superslots(m: u64, mpr_order: u32, n: u32) -> f64 {
    debug_assert!(m >= 1 && n >= 1);
    if n <= mpr_order {
        return 1.0;
    }
    if m == 1 {
        // Everyone shares the lone superslot and n > K.
        return 0.0;
    }
    let q = 1.0 / m as f64;
    let ln_ratio = q.ln() - (-q).ln_1p(); // ln(q / (1-q))
    let terms = mpr_order as usize; // i = 0..=K-1; every C(n-1, i) > 0 since n > K
    let mut log_terms = Vec::with_capacity(terms);
    let mut lt = 0.0f64; // ln C(n-1, 0) * ratio^0
    for i in 0..terms {
        if i > 0 {
            lt += ((n as f64 - i as f64) / i as f64).ln() + ln_ratio;
        }
        log_terms.push(lt);
    }
    let r = (log_sum_exp(&log_terms) + (n as f64 - 1.0) * (-q).ln_1p()).exp();
    r.clamp(0.0, 1.0)
}

/// Reliability under a batch-size distribution: the pmf-weighted average
/// of the known-count reliability.
///
/// The empty-batch term contributes its mass as success (no user can
/// fail); mass lost to truncation is counted as failure, so the result
/// is a slight underestimate rather than an overestimate.
pub fn mixture(cfg: &ProtocolConfig, pmf: &ArrivalPmf) -> Result<f64> {
    let m = cfg.superslot_count()?;
    let mut acc = pmf.mass(0);
    for (n, &mass) in pmf.masses().iter().enumerate().skip(1) {
        if mass == 0.0 {
            continue;
        }
        acc += mass * known_count_from_superslots(m, cfg.mpr_order(), n as u32);
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Expected number of users resolved in one given superslot, for a batch
/// of `n` users each picking that superslot with probability `q`.
///
/// For `n >= K` this is `sum_{i=1}^{K} i C(n,i) q^i (1-q)^(n-i)`; below
/// `K` every present user is resolved, so the expectation is just the
/// expected occupancy `q*n`.
pub fn expected_resolved_per_superslot(n: u32, q: f64, mpr_order: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q) && q > 0.0);
    debug_assert!(mpr_order >= 1);
    if n == 0 {
        return 0.0;
    }
    if n < mpr_order {
        return q * n as f64;
    }
    let ln_q = q.ln();
    let ln_1mq = (-q).ln_1p();
    let mut acc = 0.0f64;
    for i in 1..=mpr_order.min(n) {
        let survivors = (n - i) as f64;
        // At q = 1 the (1-q) factor only matters when survivors > 0.
        let tail = if survivors > 0.0 {
            survivors * ln_1mq
        } else {
            0.0
        };
        let ln_term =
            (i as f64).ln() + ln_binomial(n as u64, i as u64) + i as f64 * ln_q + tail;
        acc += ln_term.exp();
    }
    acc
}
