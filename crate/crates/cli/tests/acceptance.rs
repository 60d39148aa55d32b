//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`).
//!
//! Criteria 1-4 and 6-8 verify the tool against independent oracles
//! (exhaustive enumeration, closed forms, its own Monte Carlo simulator,
//! byte-level determinism). Criterion 5 compares the normalized-gain
//! grid against the published reference values; the cells that the
//! published table derived with conventions not recoverable from its
//! description are expected to miss tolerance, and the test reports
//! every convention variant side by side to localize each discrepancy.

use std::process::Command;

use gfaloha_core::{
    capacity_beta, capacity_known_n, capacity_poisson, reliability, simulate_scenario,
    ArrivalPmf, ArrivalProcess, BetaBatchModel, EstimationErrorModel, PoissonModel,
    ProtocolConfig, RequirementSpec, SimConfig,
};

const LATENCY: u32 = 5;
const TARGET: f64 = 0.99;
const STRICT_TARGET: f64 = 0.99999;

fn req(target: f64, k: u32) -> RequirementSpec {
    RequirementSpec::new(target, LATENCY, k).unwrap()
}

fn poisson_pmf(mean: f64) -> ArrivalPmf {
    PoissonModel::new(mean).unwrap().pmf()
}

fn beta_pmf(n_tot: u64) -> ArrivalPmf {
    BetaBatchModel::three_gpp(n_tot).unwrap().pmf()
}

/// Six standard arrival cases: Poisson and 3GPP Beta at matched mean
/// loads of 3, 9 and 15 users per frame.
fn standard_cases() -> Vec<(String, ArrivalPmf, ArrivalProcess)> {
    let mut cases = Vec::new();
    for mean in [3.0, 9.0, 15.0] {
        let model = PoissonModel::new(mean).unwrap();
        cases.push((
            format!("poisson_{mean}"),
            model.pmf(),
            ArrivalProcess::Poisson(model),
        ));
    }
    for n_tot in [3000u64, 9000, 15000] {
        let model = BetaBatchModel::three_gpp(n_tot).unwrap();
        cases.push((
            format!("beta_{n_tot}"),
            model.pmf(),
            ArrivalProcess::Beta(model),
        ));
    }
    cases
}

// --- Criterion 1 ------------------------------------------------------

fn enumerate_reliability(m: u32, k: u32, n: u32) -> f64 {
    let total = (m as u64).pow(n);
    let mut resolved_sum = 0u64;
    let mut choice = vec![0u32; n as usize];
    for _ in 0..total {
        let mut occupancy = vec![0u32; m as usize];
        for &c in &choice {
            occupancy[c as usize] += 1;
        }
        resolved_sum += occupancy
            .iter()
            .filter(|&&occ| occ > 0 && occ <= k)
            .map(|&occ| occ as u64)
            .sum::<u64>();
        for slot in choice.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    resolved_sum as f64 / (total as f64 * n as f64)
}

#[test]
fn criterion_1_exhaustive_enumeration_equivalence() {
    let started = std::time::Instant::now();
    for m in 1u32..=4 {
        for k in 1u32..=3 {
            // g = m channels over L = k slots puts exactly m superslots
            // in the frame.
            let cfg = ProtocolConfig::new(m, k, k).unwrap();
            assert_eq!(cfg.superslot_count().unwrap(), m as u64);
            for n in 1u32..=6 {
                let exact = enumerate_reliability(m, k, n);
                let analytic = reliability::known_count(&cfg, n).unwrap();
                assert!(
                    (analytic - exact).abs() <= 1e-12,
                    "criterion 1 (enumeration equivalence): FAIL at m={m} K={k} n={n}: {analytic} vs {exact}"
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 1 exceeded 1 s: {elapsed:?}");
    println!("criterion 1 (enumeration equivalence, n<=6, m<=4, K<=3, 1e-12): PASS ({elapsed:?})");
}

// --- Criterion 2 ------------------------------------------------------

#[test]
fn criterion_2_fixed_frame_reliability_properties() {
    let started = std::time::Instant::now();
    const KS: [u32; 6] = [1, 2, 5, 10, 25, 50];
    // r = 1 for every batch within the MPR order.
    for &k in &KS {
        let cfg = ProtocolConfig::new(10, LATENCY, k).unwrap();
        for n in 1..=k {
            assert_eq!(
                reliability::known_count(&cfg, n).unwrap(),
                1.0,
                "criterion 2: r != 1 at K={k} n={n}"
            );
        }
    }
    // The single-superslot frame resolves every batch up to 50, exactly.
    let cfg50 = ProtocolConfig::new(10, LATENCY, 50).unwrap();
    for n in 1u32..=50 {
        assert_eq!(reliability::known_count(&cfg50, n).unwrap(), 1.0);
    }
    // Raising the MPR order never hurts any batch of 2..=50.
    for n in 2u32..=50 {
        let mut prev = -1.0;
        for &k in &KS {
            let cfg = ProtocolConfig::new(10, LATENCY, k).unwrap();
            let r = reliability::known_count(&cfg, n).unwrap();
            assert!(
                r >= prev,
                "criterion 2: monotonicity in K fails at n={n} K={k}: {r} < {prev}"
            );
            prev = r;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 2 exceeded 1 s: {elapsed:?}");
    println!("criterion 2 (fixed-frame reliability properties): PASS ({elapsed:?})");
}

// --- Criterion 3 ------------------------------------------------------

#[test]
fn criterion_3_dimensioning_feasibility_pattern() {
    let started = std::time::Instant::now();
    for (label, pmf, _) in standard_cases() {
        for k in [1u32, 2, 3, 5, 10] {
            let rq = req(TARGET, k);
            let dim = gfaloha_core::dimension_mixture(&pmf, &rq);
            if k == 1 {
                assert!(
                    !dim.feasible,
                    "criterion 3: K=1 should be infeasible for {label} at g_max=40"
                );
            }
            if dim.feasible {
                let cfg = rq.protocol(dim.g_min);
                let r = reliability::mixture(&cfg, &pmf).unwrap();
                assert!(
                    r >= TARGET,
                    "criterion 3: feasible ({label}, K={k}) has r*({}) = {r} < {TARGET}",
                    dim.g_min
                );
                assert_eq!(dim.achieved_reliability, r);
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 3 exceeded 10 s: {elapsed:?}");
    println!("criterion 3 (mixture dimensioning feasibility pattern): PASS ({elapsed:?})");
}

// --- Criterion 4 ------------------------------------------------------

#[test]
fn criterion_4_analytics_simulation_agreement() {
    let started = std::time::Instant::now();
    const ITERATIONS: u64 = 100_000;
    const SEED: u64 = 0xACCE_0004;
    let mut comparisons = 0usize;
    let mut failures: Vec<String> = Vec::new();

    for (label, pmf, process) in standard_cases() {
        for k in [2u32, 3, 5, 10] {
            let rq = req(TARGET, k);
            let star = gfaloha_core::throughput_mixture(&pmf, &rq);
            if !star.feasible {
                continue;
            }
            let cfg = rq.protocol(star.dimension.g_min);
            let sim = SimConfig {
                iterations: ITERATIONS,
                master_seed: SEED,
                protocol: cfg,
                arrivals: process.clone(),
            };
            let res = simulate_scenario(&sim).unwrap();

            let (sim_r, r_stderr) = res.reliability_vs_mixture();
            comparisons += 1;
            if (sim_r - star.dimension.achieved_reliability).abs() > 3.0 * r_stderr {
                failures.push(format!(
                    "{label} K={k} reliability: sim {sim_r} vs analytic {} (3se = {})",
                    star.dimension.achieved_reliability,
                    3.0 * r_stderr
                ));
            }
            comparisons += 1;
            if (res.empirical_throughput - star.expected_user_rate).abs()
                > 3.0 * res.throughput_stderr
            {
                failures.push(format!(
                    "{label} K={k} throughput: sim {} vs analytic {} (3se = {})",
                    res.empirical_throughput,
                    star.expected_user_rate,
                    3.0 * res.throughput_stderr
                ));
            }
        }
    }

    let allowed = (comparisons as f64 * 0.05).floor() as usize;
    let elapsed = started.elapsed();
    assert!(
        failures.len() <= allowed,
        "criterion 4: {} of {comparisons} grid comparisons outside 3 standard errors (allowance {allowed}):\n{}",
        failures.len(),
        failures.join("\n")
    );
    assert!(elapsed.as_secs_f64() < 300.0, "criterion 4 exceeded 5 min: {elapsed:?}");
    println!(
        "criterion 4 (analytics-simulation agreement, {comparisons} comparisons at 3se, {} outliers allowed {allowed}): PASS ({elapsed:?})",
        failures.len()
    );
}

// --- Criterion 5 ------------------------------------------------------

/// Published normalized-gain grid being reproduced; `None` marks the
/// cells published as infinite (distribution-only regime infeasible).
struct ReferenceRow {
    target: f64,
    label: &'static str,
    cells: [Option<f64>; 4], // K = 1, 3, 5, 10
}

const REFERENCE: [ReferenceRow; 8] = [
    ReferenceRow { target: TARGET, label: "poisson_3", cells: [Some(0.0374), Some(0.0743), Some(0.0036), Some(0.0224)] },
    ReferenceRow { target: TARGET, label: "poisson_15", cells: [None, Some(0.0731), Some(0.1793), Some(0.2870)] },
    ReferenceRow { target: TARGET, label: "beta_3000", cells: [None, Some(0.3650), Some(0.2049), Some(0.1274)] },
    ReferenceRow { target: TARGET, label: "beta_15000", cells: [None, Some(0.2095), Some(0.4491), Some(0.3779)] },
    ReferenceRow { target: STRICT_TARGET, label: "poisson_3", cells: [None, Some(7.7919), Some(3.0286), Some(0.1488)] },
    ReferenceRow { target: STRICT_TARGET, label: "poisson_15", cells: [None, None, None, Some(0.5767)] },
    ReferenceRow { target: STRICT_TARGET, label: "beta_3000", cells: [None, None, Some(3.5643), Some(0.6601)] },
    ReferenceRow { target: STRICT_TARGET, label: "beta_15000", cells: [None, None, None, Some(0.9521)] },
];

/// Minimal channel count with at least `min_superslots` whole superslots
/// meeting the target; 0 when none does.
fn dimension_floor(
    rq: &RequirementSpec,
    min_superslots: u64,
    rel: impl Fn(&ProtocolConfig) -> f64,
) -> u32 {
    for g in 1..=rq.max_channels() {
        let cfg = rq.protocol(g);
        match cfg.superslot_count() {
            Ok(m) if m >= min_superslots => {}
            _ => continue,
        }
        if rel(&cfg) >= rq.target_reliability() {
            return g;
        }
    }
    0
}

struct CellVariants {
    star_feasible: bool,
    known_feasible: bool,
    /// Target-factor gain, infeasible batches contribute zero.
    primary: Option<f64>,
    /// Target-factor gain over renormalized feasible mass.
    renormalized: Option<f64>,
    /// Achieved-reliability flavor.
    achieved: Option<f64>,
    /// Both searches restricted to frames with at least two superslots.
    min_two: Option<f64>,
}

fn gain_variants(pmf: &ArrivalPmf, rq: &RequirementSpec) -> CellVariants {
    let l = rq.latency_slots() as f64;
    let known = |min_m: u64| -> (f64, f64, f64) {
        let mut target_sum = 0.0;
        let mut achieved_sum = 0.0;
        let mut infeasible = pmf.truncated_tail();
        for (n, &mass) in pmf.masses().iter().enumerate().skip(1) {
            if mass == 0.0 {
                continue;
            }
            let g = dimension_floor(rq, min_m, |cfg| {
                reliability::known_count(cfg, n as u32).unwrap()
            });
            if g == 0 {
                infeasible += mass;
                continue;
            }
            let r = reliability::known_count(&rq.protocol(g), n as u32).unwrap();
            target_sum += mass * n as f64 * rq.target_reliability() / (g as f64 * l);
            achieved_sum += mass * n as f64 * r / (g as f64 * l);
        }
        (target_sum, achieved_sum, infeasible)
    };
    let star = |min_m: u64| -> Option<(u32, f64)> {
        let g = dimension_floor(rq, min_m, |cfg| reliability::mixture(cfg, pmf).unwrap());
        (g > 0).then(|| {
            let r = reliability::mixture(&rq.protocol(g), pmf).unwrap();
            (g, r)
        })
    };

    let (kt, ka, im) = known(1);
    let star1 = star(1);
    let min_two = match star(2) {
        Some((g2, _)) => {
            let (kt2, _, _) = known(2);
            let ts2 = rq.target_reliability() * pmf.mean() / (g2 as f64 * l);
            Some(kt2 / ts2 - 1.0)
        }
        None => None,
    };
    match star1 {
        Some((g_star, r_star)) => {
            let ts_target = rq.target_reliability() * pmf.mean() / (g_star as f64 * l);
            let ts_achieved = r_star * pmf.mean() / (g_star as f64 * l);
            CellVariants {
                star_feasible: true,
                known_feasible: kt > 0.0,
                primary: Some(kt / ts_target - 1.0),
                renormalized: (im < 1.0).then(|| kt / (1.0 - im) / ts_target - 1.0),
                achieved: Some(ka / ts_achieved - 1.0),
                min_two,
            }
        }
        None => CellVariants {
            star_feasible: false,
            known_feasible: kt > 0.0,
            primary: None,
            renormalized: None,
            achieved: None,
            min_two,
        },
    }
}

#[test]
fn criterion_5_normalized_gain_table() {
    let started = std::time::Instant::now();
    let mut report: Vec<String> = Vec::new();
    let mut misses = 0usize;
    let mut cells = 0usize;

    for row in &REFERENCE {
        let pmf = match row.label {
            "poisson_3" => poisson_pmf(3.0),
            "poisson_15" => poisson_pmf(15.0),
            "beta_3000" => beta_pmf(3000),
            _ => beta_pmf(15000),
        };
        for (col, k) in [1u32, 3, 5, 10].into_iter().enumerate() {
            cells += 1;
            let rq = req(row.target, k);
            let v = gain_variants(&pmf, &rq);
            let fmt = |x: Option<f64>| x.map_or("inf".to_string(), |g| format!("{g:+.4}"));
            match row.cells[col] {
                None => {
                    // Published as infinite: the distribution-only regime
                    // must be infeasible while the known regime carries
                    // throughput.
                    if v.star_feasible || !v.known_feasible {
                        misses += 1;
                        report.push(format!(
                            "R={} {} K={k}: expected star-infeasible/known-feasible, got star_feasible={} known_feasible={}",
                            row.target, row.label, v.star_feasible, v.known_feasible
                        ));
                    }
                }
                Some(reference) => {
                    // The anomalous low cell gets the wider band.
                    let tol = if row.target == TARGET {
                        if row.label == "poisson_3" && k == 5 {
                            0.25
                        } else {
                            0.10
                        }
                    } else {
                        0.15
                    };
                    let ok = v
                        .primary
                        .map(|g| (g / reference - 1.0).abs() <= tol)
                        .unwrap_or(false);
                    if !ok {
                        misses += 1;
                        report.push(format!(
                            "R={} {} K={k}: reference {reference}, primary {} (tol {:.0}%) | variants: renormalized {}, achieved {}, min_two_superslots {}",
                            row.target,
                            row.label,
                            fmt(v.primary),
                            tol * 100.0,
                            fmt(v.renormalized),
                            fmt(v.achieved),
                            fmt(v.min_two),
                        ));
                    }
                }
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 5 exceeded 2 min: {elapsed:?}");
    if misses == 0 {
        println!("criterion 5 (normalized-gain table reproduction): PASS ({elapsed:?})");
    } else {
        println!("criterion 5 (normalized-gain table reproduction): FAIL ({misses}/{cells} cells)");
        panic!(
            "criterion 5: {misses} of {cells} cells outside tolerance. Every convention variant \
             is emitted for localization (see `gfaloha reproduce table1`):\n{}",
            report.join("\n")
        );
    }
}

// --- Criterion 6 ------------------------------------------------------

#[test]
fn criterion_6_capacity_spot_checks() {
    let started = std::time::Instant::now();
    // Collision channel closed form: (1 - 1/200)^(n-1) >= 0.99 up to n=3.
    assert_eq!(
        capacity_known_n(40, &req(TARGET, 1)).unwrap(),
        3,
        "criterion 6: collision-channel capacity"
    );
    for target in [TARGET, STRICT_TARGET] {
        let mut prev = (0u32, 0.0f64, 0u64);
        for k in [1u32, 2, 5, 10] {
            let rq = req(target, k);
            let known = capacity_known_n(40, &rq).unwrap();
            let poisson = capacity_poisson(40, &rq, 1e-3).unwrap();
            let beta = capacity_beta(40, &rq, 1).unwrap();
            assert!(
                known >= prev.0 && poisson >= prev.1 && beta >= prev.2,
                "criterion 6: capacity not nondecreasing at R={target} K={k}: known {known} poisson {poisson} beta {beta} vs {prev:?}"
            );
            assert!(
                beta as f64 / 1000.0 <= poisson,
                "criterion 6: Beta per-frame capacity {} above Poisson {poisson} at R={target} K={k}",
                beta as f64 / 1000.0
            );
            prev = (known, poisson, beta);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 6 exceeded 1 min: {elapsed:?}");
    println!("criterion 6 (capacity spot checks and trends): PASS ({elapsed:?})");
}

// --- Criterion 7 ------------------------------------------------------

#[test]
fn criterion_7_overprovisioning_directionality() {
    let started = std::time::Instant::now();
    let poisson_grid: Vec<(String, ArrivalPmf)> = [3.0, 15.0]
        .into_iter()
        .map(|m| (format!("poisson_{m}"), poisson_pmf(m)))
        .collect();
    let beta_grid: Vec<(String, ArrivalPmf)> = [3000u64, 15000]
        .into_iter()
        .map(|n| (format!("beta_{n}"), beta_pmf(n)))
        .collect();

    // Over-provisioning never increases the known-regime throughput.
    for grid in [&poisson_grid, &beta_grid] {
        for (label, pmf) in grid {
            for target in [TARGET, STRICT_TARGET] {
                for k in [1u32, 2, 3, 5, 10] {
                    let rq = req(target, k);
                    let mut prev = f64::INFINITY;
                    for eps in [0.0, 0.2, 0.4] {
                        let err = EstimationErrorModel::new(eps).unwrap();
                        let t = gfaloha_core::throughput_known(pmf, &rq, &err);
                        assert!(
                            t.rate <= prev + 1e-12,
                            "criterion 7: t_known rises with eps at {label} R={target} K={k} eps={eps}"
                        );
                        prev = t.rate;
                    }
                }
            }
        }
    }

    // Beta at the strict target: even 40% over-provisioning beats the
    // distribution-only regime wherever the latter is feasible, and K=1
    // carries positive known-regime throughput (exact estimates) where
    // the distribution-only regime is infeasible.
    for (label, pmf) in &beta_grid {
        for k in [1u32, 2, 3, 5, 10] {
            let rq = req(STRICT_TARGET, k);
            let star = gfaloha_core::throughput_mixture(pmf, &rq);
            if star.feasible {
                let err = EstimationErrorModel::new(0.4).unwrap();
                let t = gfaloha_core::throughput_known(pmf, &rq, &err);
                assert!(
                    t.rate > star.rate,
                    "criterion 7: t_known(0.4) = {} not above t_star = {} at {label} K={k}",
                    t.rate,
                    star.rate
                );
            }
            if k == 1 {
                assert!(!star.feasible, "criterion 7: K=1 unexpectedly feasible at {label}");
                let t = gfaloha_core::throughput_known(pmf, &rq, &EstimationErrorModel::exact());
                assert!(
                    t.rate > 0.0,
                    "criterion 7: K=1 known-regime throughput not positive at {label}"
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 7 exceeded 2 min: {elapsed:?}");
    println!("criterion 7 (over-provisioning directionality): PASS ({elapsed:?})");
}

// --- Criterion 8 ------------------------------------------------------

#[test]
fn criterion_8_byte_level_determinism() {
    let started = std::time::Instant::now();
    let args = [
        "simulate", "--g", "12", "--l", "5", "--k", "5", "--beta-n-tot", "3000",
        "--iterations", "40000", "--seed", "99",
    ];
    let run = |workers: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gfaloha"));
        cmd.args(args);
        if let Some(w) = workers {
            cmd.env("RAYON_NUM_THREADS", w);
        }
        let out = cmd.output().expect("binary runs");
        assert!(out.status.success());
        out.stdout
    };
    let base = run(None);
    assert_eq!(base, run(None), "criterion 8: same seed, different bytes");
    for workers in ["1", "2", "5"] {
        assert_eq!(
            base,
            run(Some(workers)),
            "criterion 8: RAYON_NUM_THREADS={workers} changed the output"
        );
    }
    let elapsed = started.elapsed();
    println!("criterion 8 (byte-identical CSV across seeds and worker counts): PASS ({elapsed:?})");
}
