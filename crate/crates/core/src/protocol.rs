//! The contention frame: channels, latency budget, and superslot grouping.

use crate::error::{Error, Result};

/// One frame of the access protocol: `channels` frequency channels over a
/// latency budget of `latency_slots` time slots, with slots grouped into
/// superslots of `mpr_order` slots each.
///
/// A superslot resolves up to `mpr_order` simultaneous transmissions;
/// with more than `mpr_order` it resolves none. Leftover slots
/// (`channels*latency_slots mod mpr_order`) carry no superslot but still
/// count toward the frame's resource total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    channels: u32,
    latency_slots: u32,
    mpr_order: u32,
}

impl ProtocolConfig {
    pub fn new(channels: u32, latency_slots: u32, mpr_order: u32) -> Result<Self> {
        for (name, v) in [
            ("channels", channels),
            ("latency_slots", latency_slots),
            ("mpr_order", mpr_order),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be at least 1".into(),
                });
            }
        }
        Ok(Self {
            channels,
            latency_slots,
            mpr_order,
        })
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn latency_slots(&self) -> u32 {
        self.latency_slots
    }

    pub fn mpr_order(&self) -> u32 {
        self.mpr_order
    }

    /// Total slots in the frame, including any leftover that doesn't fill
    /// a superslot.
    pub fn slot_count(&self) -> u64 {
        self.channels as u64 * self.latency_slots as u64
    }

    /// Number of whole superslots in the frame. Errors when the frame is
    /// smaller than a single superslot.
    pub fn superslot_count(&self) -> Result<u64> {
        let count = self.slot_count() / self.mpr_order as u64;
        if count == 0 {
            return Err(Error::ZeroSuperslots {
                channels: self.channels,
                latency_slots: self.latency_slots,
                mpr_order: self.mpr_order,
            });
        }
        Ok(count)
    }

    /// Probability that a user picks any one given superslot (uniform
    /// selection), `1 / superslot_count`.
    pub fn selection_probability(&self) -> Result<f64> {
        Ok(1.0 / self.superslot_count()? as f64)
    }
}
