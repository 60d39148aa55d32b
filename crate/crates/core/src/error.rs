use thiserror::Error;

/// Errors produced by model constructors, analytic routines and the
/// simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The frame is smaller than one superslot (`g*L < K`).
    #[error("frame of {channels} channels x {latency_slots} slots holds no superslot of {mpr_order} slots")]
    ZeroSuperslots {
        channels: u32,
        latency_slots: u32,
        mpr_order: u32,
    },

    #[error("batch size must be at least 1")]
    EmptyBatch,

    #[error("interval index {index} out of range (model has {count} intervals)")]
    IntervalIndexOutOfRange { index: u64, count: u64 },

    /// The activation window must split into an integer number of
    /// frame-length intervals.
    #[error("activation time {activation_time_s} s is not an integer multiple of the interval {interval_s} s")]
    NonIntegerIntervalCount {
        activation_time_s: f64,
        interval_s: f64,
    },

    #[error("probability masses do not normalize: sum {sum} + tail {tail}")]
    PmfNotNormalized { sum: f64, tail: f64 },

    /// A capacity search found no feasible load at the lower end of the
    /// bracket.
    #[error("no feasible load: reliability target cannot be met even at the smallest load")]
    NoFeasibleCapacity,

    /// A search that relies on monotone reliability found the defining
    /// inequality pair violated and refuses to return a wrong extremum.
    #[error("monotonicity violated near {at}: search result would be unreliable")]
    MonotonicityViolation { at: f64 },

    #[error("throughput gain undefined: both knowledge regimes are infeasible")]
    GainUndefined,

    /// Guard against absurd superslot counts that would make the
    /// per-frame occupancy histogram unreasonably large.
    #[error("superslot count {count} too large to simulate")]
    FrameTooLarge { count: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
