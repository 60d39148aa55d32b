//! Seeded discrete-time Monte Carlo simulation of one contention frame
//! per iteration, validating the analytic reliability and throughput.
//!
//! Determinism contract: iteration `i` draws from an RNG stream derived
//! only from `(master_seed, i)`, iterations are grouped into fixed-size
//! chunks, and chunk summaries are folded in chunk order. Results are
//! therefore bit-identical for a given seed regardless of how many
//! worker threads rayon uses (`RAYON_NUM_THREADS` only changes wall
//! time).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::arrivals::{BetaBatchModel, PoissonModel};
use crate::error::{Error, Result};
use crate::protocol::ProtocolConfig;

/// Iterations per deterministic work unit. Fixed so that the summation
/// order cannot depend on the thread count.
const CHUNK: u64 = 4096;

/// Largest occupancy histogram we are willing to allocate per worker.
const MAX_SUPERSLOTS: u64 = 1 << 24;

/// Batch-size process driving the per-iteration draws.
#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalProcess {
    /// Every frame carries exactly `n` users.
    Known(u32),
    Poisson(PoissonModel),
    Beta(BetaBatchModel),
}

/// Number of iterations used when nothing is specified: enough for
/// three-sigma agreement checks at desk scale.
pub const DEFAULT_ITERATIONS: u64 = 100_000;
/// The precision-grade iteration count for final figures.
pub const FULL_ITERATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub iterations: u64,
    pub master_seed: u64,
    pub protocol: ProtocolConfig,
    pub arrivals: ArrivalProcess,
}

impl SimConfig {
    pub fn new(protocol: ProtocolConfig, arrivals: ArrivalProcess) -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            master_seed: 0,
            protocol,
            arrivals,
        }
    }

    pub fn with_iterations(mut self, iterations: u64) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }
}

/// Point estimates with normal-approximation standard errors.
///
/// `empirical_reliability` averages `resolved/n` over frames with at
/// least one arrival; `empirical_throughput` averages `resolved/(g*L)`
/// over all frames. Frames with an empty batch are counted in
/// `zero_arrival_frames` and excluded from the per-user reliability
/// average; [`SimResult::reliability_vs_mixture`] folds them back in as
/// vacuous successes, which is the estimator whose expectation equals
/// the analytic mixture reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub empirical_reliability: f64,
    pub reliability_stderr: f64,
    pub empirical_throughput: f64,
    pub throughput_stderr: f64,
    pub iterations_used: u64,
    pub zero_arrival_frames: u64,
    /// Total resolved users over the run (integer accumulator, part of
    /// the determinism contract).
    pub resolved_total: u64,
    /// Total arrived users over the run.
    pub arrived_total: u64,
    ratio_sum: f64,
    ratio_sq_sum: f64,
}

impl SimResult {
    /// Reliability estimator whose expectation is the analytic mixture
    /// value: empty frames count as success. Returns (estimate, stderr).
    pub fn reliability_vs_mixture(&self) -> (f64, f64) {
        let n = self.iterations_used as f64;
        let sum = self.ratio_sum + self.zero_arrival_frames as f64;
        let sq = self.ratio_sq_sum + self.zero_arrival_frames as f64;
        mean_and_stderr(sum, sq, n)
    }
}

fn mean_and_stderr(sum: f64, sq_sum: f64, count: f64) -> (f64, f64) {
    if count < 1.0 {
        return (1.0, 0.0);
    }
    let mean = sum / count;
    if count < 2.0 {
        return (mean, 0.0);
    }
    let var = ((sq_sum - sum * sum / count) / (count - 1.0)).max(0.0);
    (mean, (var / count).sqrt())
}

/// One frame: each of `n` users picks one of the superslots uniformly;
/// returns how many land in superslots with at most `K` occupants.
pub fn simulate_frame<R: Rng>(n: u32, protocol: &ProtocolConfig, rng: &mut R) -> Result<u32> {
    let m = checked_superslots(protocol)?;
    let mut scratch = FrameScratch::new(m);
    Ok(scratch.run(n, protocol.mpr_order(), rng))
}

fn checked_superslots(protocol: &ProtocolConfig) -> Result<usize> {
    let m = protocol.superslot_count()?;
    if m > MAX_SUPERSLOTS {
        return Err(Error::FrameTooLarge { count: m });
    }
    Ok(m as usize)
}

/// Reusable occupancy histogram; only touched entries are reset.
struct FrameScratch {
    occupancy: Vec<u32>,
    touched: Vec<usize>,
}

impl FrameScratch {
    fn new(superslots: usize) -> Self {
        Self {
            occupancy: vec![0; superslots],
            touched: Vec::with_capacity(64),
        }
    }

    fn run<R: Rng>(&mut self, n: u32, mpr_order: u32, rng: &mut R) -> u32 {
        if n <= mpr_order {
            // No assignment can overload a superslot.
            return n;
        }
        let m = self.occupancy.len();
        self.touched.clear();
        for _ in 0..n {
            let idx = rng.random_range(0..m);
            if self.occupancy[idx] == 0 {
                self.touched.push(idx);
            }
            self.occupancy[idx] += 1;
        }
        let mut resolved = 0u32;
        for &idx in &self.touched {
            let occ = self.occupancy[idx];
            if occ <= mpr_order {
                resolved += occ;
            }
            self.occupancy[idx] = 0;
        }
        resolved
    }
}

/// Per-iteration batch sampler, prepared once per scenario.
enum BatchSampler {
    Known(u32),
    Poisson(Poisson<f64>),
    Beta { per_interval: Vec<Binomial> },
}

impl BatchSampler {
    fn prepare(arrivals: &ArrivalProcess) -> Result<Self> {
        Ok(match arrivals {
            ArrivalProcess::Known(n) => BatchSampler::Known(*n),
            ArrivalProcess::Poisson(model) => BatchSampler::Poisson(
                Poisson::new(model.lambda()).map_err(|e| Error::InvalidParameter {
                    name: "lambda",
                    reason: e.to_string(),
                })?,
            ),
            ArrivalProcess::Beta(model) => {
                let per_interval = model
                    .interval_masses()
                    .into_iter()
                    .map(|p| {
                        Binomial::new(model.n_tot(), p.clamp(0.0, 1.0)).map_err(|e| {
                            Error::InvalidParameter {
                                name: "interval_mass",
                                reason: e.to_string(),
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                BatchSampler::Beta { per_interval }
            }
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        match self {
            BatchSampler::Known(n) => *n,
            BatchSampler::Poisson(dist) => dist.sample(rng) as u32,
            BatchSampler::Beta { per_interval } => {
                let idx = rng.random_range(0..per_interval.len());
                per_interval[idx].sample(rng) as u32
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkAccum {
    frames: u64,
    zero_frames: u64,
    resolved: u64,
    resolved_sq: u128,
    arrived: u64,
    ratio_sum: f64,
    ratio_sq_sum: f64,
}

impl ChunkAccum {
    fn merge(mut self, other: &ChunkAccum) -> ChunkAccum {
        self.frames += other.frames;
        self.zero_frames += other.zero_frames;
        self.resolved += other.resolved;
        self.resolved_sq += other.resolved_sq;
        self.arrived += other.arrived;
        self.ratio_sum += other.ratio_sum;
        self.ratio_sq_sum += other.ratio_sq_sum;
        self
    }
}

/// SplitMix64-style stream derivation: the RNG seed of iteration `i`.
fn stream_seed(master_seed: u64, iteration: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add((iteration.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the scenario and aggregate the frame statistics.
///
/// Deterministic in `(master_seed, iterations, scenario)`; thread count
/// does not enter the result.
pub fn simulate_scenario(cfg: &SimConfig) -> Result<SimResult> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter {
            name: "iterations",
            reason: "must be at least 1".into(),
        });
    }
    let superslots = checked_superslots(&cfg.protocol)?;
    let sampler = BatchSampler::prepare(&cfg.arrivals)?;
    let mpr_order = cfg.protocol.mpr_order();
    let chunk_count = cfg.iterations.div_ceil(CHUNK);

    let chunks: Vec<ChunkAccum> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk_idx| {
            let start = chunk_idx * CHUNK;
            let end = (start + CHUNK).min(cfg.iterations);
            let mut scratch = FrameScratch::new(superslots);
            let mut acc = ChunkAccum::default();
            for i in start..end {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.master_seed, i));
                let n = sampler.sample(&mut rng);
                let resolved = scratch.run(n, mpr_order, &mut rng);
                acc.frames += 1;
                acc.arrived += n as u64;
                acc.resolved += resolved as u64;
                acc.resolved_sq += (resolved as u128) * (resolved as u128);
                if n == 0 {
                    acc.zero_frames += 1;
                } else {
                    let ratio = resolved as f64 / n as f64;
                    acc.ratio_sum += ratio;
                    acc.ratio_sq_sum += ratio * ratio;
                }
            }
            acc
        })
        .collect();

    // Chunk order is fixed, so this fold gives the same floats for any
    // worker count.
    let total = chunks
        .iter()
        .fold(ChunkAccum::default(), |acc, c| acc.merge(c));

    let slots = cfg.protocol.slot_count() as f64;
    let frames = total.frames as f64;
    let active_frames = (total.frames - total.zero_frames) as f64;
    let (rel_mean, rel_stderr) =
        mean_and_stderr(total.ratio_sum, total.ratio_sq_sum, active_frames);
    let tp_mean = total.resolved as f64 / (frames * slots);
    let tp_var = ((total.resolved_sq as f64
        - (total.resolved as f64) * (total.resolved as f64) / frames)
        / (frames - 1.0).max(1.0))
        / (slots * slots);
    let tp_stderr = (tp_var.max(0.0) / frames).sqrt();

    Ok(SimResult {
        empirical_reliability: rel_mean,
        reliability_stderr: rel_stderr,
        empirical_throughput: tp_mean,
        throughput_stderr: tp_stderr,
        iterations_used: total.frames,
        zero_arrival_frames: total.zero_frames,
        resolved_total: total.resolved,
        arrived_total: total.arrived,
        ratio_sum: total.ratio_sum,
        ratio_sq_sum: total.ratio_sq_sum,
    })
}
