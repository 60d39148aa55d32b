//! Analysis and simulation of grant-free random access over a slotted
//! time-frequency grid.
//!
//! The model: a batch of users contends inside one frame of `g` frequency
//! channels by `L` time slots. Slots are grouped into superslots of `K`
//! slots; a superslot decodes up to `K` simultaneous transmissions
//! (K-multipacket reception) and none beyond that. Each active user picks
//! one superslot uniformly at random.
//!
//! The crate provides:
//!
//! * [`arrivals`] — batch-size distributions (known count, Poisson, and the
//!   bursty 3GPP Beta activation model gated into frame-length intervals);
//! * [`reliability`] — closed-form per-user resolution probability for a
//!   known batch size and for a batch-size distribution;
//! * [`dimensioning`] — minimal channel counts meeting a reliability
//!   target, over-provisioning under estimation error, and capacity
//!   searches;
//! * [`throughput`] — resolved users per slot under both knowledge regimes
//!   and the normalized gain of knowing the realized batch size;
//! * [`sim`] — a seeded, deterministic Monte Carlo simulator used to
//!   validate every analytic quantity.
//!
//! All analytic routines are pure functions; values are immutable after
//! construction and safe to share across threads.

pub mod arrivals;
pub mod dimensioning;
pub mod error;
pub mod numeric;
pub mod protocol;
pub mod reliability;
pub mod sim;
pub mod throughput;

pub use arrivals::{known_pmf, ArrivalPmf, BetaBatchModel, PoissonModel};
pub use dimensioning::{
    capacity_beta, capacity_known_n, capacity_poisson, dimension_known_n, dimension_mixture,
    overprovisioned_dimension, DimensionResult, EstimationErrorModel, RequirementSpec,
};
pub use error::{Error, Result};
pub use protocol::ProtocolConfig;
pub use sim::{simulate_frame, simulate_scenario, ArrivalProcess, SimConfig, SimResult};
pub use throughput::{
    normalized_gain, throughput_known, throughput_mixture, throughput_report, KnownThroughput,
    MixtureThroughput, ThroughputReport,
};
