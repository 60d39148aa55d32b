//! Canned experiment grids behind `gfaloha reproduce <target>`: each
//! target emits the CSV underlying one figure or table of the study this
//! tool reproduces, at desk-scale simulation precision by default.

use gfaloha_core::sim::FULL_ITERATIONS;
use gfaloha_core::{
    capacity_beta, capacity_known_n, capacity_poisson, reliability, simulate_scenario,
    ArrivalPmf, ArrivalProcess, BetaBatchModel, EstimationErrorModel, PoissonModel,
    ProtocolConfig, RequirementSpec, SimConfig,
};
use rayon::prelude::*;

use crate::table::{fnv1a64, Cell, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table1,
}

impl Target {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fig2" => Target::Fig2,
            "fig3" => Target::Fig3,
            "fig4" => Target::Fig4,
            "fig5" => Target::Fig5,
            "fig6" => Target::Fig6,
            "fig7" => Target::Fig7,
            "table1" => Target::Table1,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Fig7 => "fig7",
            Target::Table1 => "table1",
        }
    }
}

pub struct ReproduceSettings {
    pub seed: u64,
    pub iterations: u64,
}

impl ReproduceSettings {
    pub fn new(seed: u64, iterations: Option<u64>, full: bool) -> Self {
        let iterations = iterations.unwrap_or(if full {
            FULL_ITERATIONS
        } else {
            gfaloha_core::sim::DEFAULT_ITERATIONS
        });
        Self { seed, iterations }
    }
}

const LATENCY: u32 = 5;
const MPR_SWEEP: [u32; 5] = [1, 2, 3, 5, 10];
const MEAN_LOADS: [f64; 3] = [3.0, 9.0, 15.0];

fn meta(table: &mut ResultTable, target: Target, settings: &ReproduceSettings, sims: bool) {
    table.meta("tool", format!("gfaloha {}", env!("CARGO_PKG_VERSION")));
    table.meta("target", target.name());
    table.meta(
        "scenario_hash",
        format!(
            "{:016x}",
            fnv1a64(format!("{}:{}:{}", target.name(), settings.seed, settings.iterations).as_bytes())
        ),
    );
    if sims {
        table.meta("seed", settings.seed);
        table.meta("iterations", settings.iterations);
    } else {
        table.meta("seed", "-");
        table.meta("iterations", "-");
    }
}

pub fn run(target: Target, settings: &ReproduceSettings) -> ResultTable {
    match target {
        Target::Fig2 => fig2(settings),
        Target::Fig3 => fig3_fig4(settings, Target::Fig3),
        Target::Fig4 => fig3_fig4(settings, Target::Fig4),
        Target::Fig5 => fig5_fig6(settings, Target::Fig5),
        Target::Fig6 => fig5_fig6(settings, Target::Fig6),
        Target::Fig7 => fig7(settings),
        Target::Table1 => table1(settings),
    }
}

/// Reliability over the batch size for a fixed 10x5 frame, one column
/// per MPR order dividing the 50 slots.
fn fig2(settings: &ReproduceSettings) -> ResultTable {
    const KS: [u32; 6] = [1, 2, 5, 10, 25, 50];
    let mut headers = vec!["n".to_string()];
    headers.extend(KS.iter().map(|k| format!("r_k{k}")));
    let mut table = ResultTable::new(headers);
    meta(&mut table, Target::Fig2, settings, false);
    for n in 1u32..=200 {
        let mut row = vec![Cell::Int(n as i64)];
        for &k in &KS {
            let cfg = ProtocolConfig::new(10, LATENCY, k).unwrap();
            row.push(Cell::Float(reliability::known_count(&cfg, n).unwrap()));
        }
        table.push(row);
    }
    table
}

struct ArrivalCase {
    label: String,
    mean: f64,
    pmf: ArrivalPmf,
    process: ArrivalProcess,
}

fn standard_arrivals() -> Vec<ArrivalCase> {
    let mut cases = Vec::new();
    for mean in MEAN_LOADS {
        let model = PoissonModel::new(mean).unwrap();
        cases.push(ArrivalCase {
            label: format!("poisson_{mean}"),
            mean,
            pmf: model.pmf(),
            process: ArrivalProcess::Poisson(model),
        });
    }
    for n_tot in [3000u64, 9000, 15000] {
        let model = BetaBatchModel::three_gpp(n_tot).unwrap();
        let pmf = model.pmf();
        cases.push(ArrivalCase {
            label: format!("beta_{n_tot}"),
            mean: pmf.mean(),
            pmf,
            process: ArrivalProcess::Beta(model),
        });
    }
    cases
}

/// Mixture reliability (fig3) and mixture throughput (fig4) at the
/// dimensioned channel count, analytic and simulated side by side.
fn fig3_fig4(settings: &ReproduceSettings, which: Target) -> ResultTable {
    let headers: Vec<&str> = match which {
        Target::Fig3 => vec![
            "arrival",
            "mean_load",
            "k",
            "g_star",
            "r_star",
            "one_minus_r_star",
            "sim_r_star",
            "sim_stderr",
        ],
        _ => vec![
            "arrival",
            "mean_load",
            "k",
            "g_star",
            "t_star",
            "t_star_target_factor",
            "t_star_expected_rate",
            "sim_t_star",
            "sim_stderr",
        ],
    };
    let mut table = ResultTable::new(headers);
    meta(&mut table, which, settings, true);

    let cases = standard_arrivals();
    let grid: Vec<(usize, u32)> = (0..cases.len())
        .flat_map(|i| MPR_SWEEP.iter().map(move |&k| (i, k)))
        .collect();
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(case_idx, k)| {
            let case = &cases[case_idx];
            let req = RequirementSpec::new(0.99, LATENCY, k).unwrap();
            let star = gfaloha_core::throughput_mixture(&case.pmf, &req);
            let mut row = vec![
                Cell::Text(case.label.clone()),
                Cell::Float(case.mean),
                Cell::Int(k as i64),
                Cell::Int(star.dimension.g_min as i64),
            ];
            if !star.feasible {
                let cols = if which == Target::Fig3 { 4 } else { 5 };
                row.extend(std::iter::repeat_n(Cell::Infeasible, cols));
                return row;
            }
            let cfg = req.protocol(star.dimension.g_min);
            let sim = SimConfig {
                iterations: settings.iterations,
                master_seed: settings.seed,
                protocol: cfg,
                arrivals: case.process.clone(),
            };
            let res = simulate_scenario(&sim).expect("valid scenario");
            match which {
                Target::Fig3 => {
                    let r_star = star.dimension.achieved_reliability;
                    let (sim_r, sim_se) = res.reliability_vs_mixture();
                    row.extend([
                        Cell::Float(r_star),
                        Cell::Float(1.0 - r_star),
                        Cell::Float(sim_r),
                        Cell::Float(sim_se),
                    ]);
                }
                _ => {
                    row.extend([
                        Cell::Float(star.rate),
                        Cell::Float(star.rate_target_factor),
                        Cell::Float(star.expected_user_rate),
                        Cell::Float(res.empirical_throughput),
                        Cell::Float(res.throughput_stderr),
                    ]);
                }
            }
            row
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    table
}

/// Known-size vs distribution-only throughput with over-provisioning,
/// Poisson (fig5) or Beta (fig6) arrivals.
fn fig5_fig6(settings: &ReproduceSettings, which: Target) -> ResultTable {
    let mut table = ResultTable::new(vec![
        "r_target",
        "arrival",
        "mean_load",
        "k",
        "epsilon_max",
        "t_known",
        "t_known_target_factor",
        "t_known_renormalized",
        "infeasible_mass_known",
        "t_star",
        "gain",
    ]);
    meta(&mut table, which, settings, false);

    let arrivals: Vec<(String, f64, ArrivalPmf)> = match which {
        Target::Fig5 => [3.0, 15.0]
            .into_iter()
            .map(|mean| {
                (
                    format!("poisson_{mean}"),
                    mean,
                    PoissonModel::new(mean).unwrap().pmf(),
                )
            })
            .collect(),
        _ => [3000u64, 15000]
            .into_iter()
            .map(|n_tot| {
                let pmf = BetaBatchModel::three_gpp(n_tot).unwrap().pmf();
                (format!("beta_{n_tot}"), pmf.mean(), pmf)
            })
            .collect(),
    };

    for target in [0.99, 0.99999] {
        for (label, mean, pmf) in &arrivals {
            for k in MPR_SWEEP {
                let req = RequirementSpec::new(target, LATENCY, k).unwrap();
                let star = gfaloha_core::throughput_mixture(pmf, &req);
                for eps in [0.0, 0.2, 0.4] {
                    let err = EstimationErrorModel::new(eps).unwrap();
                    let known = gfaloha_core::throughput_known(pmf, &req, &err);
                    let gain =
                        match gfaloha_core::normalized_gain(known.rate, star.rate, star.feasible) {
                            Ok(v) => Cell::Fixed(v, 4),
                            Err(_) => Cell::Infeasible,
                        };
                    table.push(vec![
                        Cell::Float(target),
                        Cell::Text(label.clone()),
                        Cell::Float(*mean),
                        Cell::Int(k as i64),
                        Cell::Float(eps),
                        Cell::Float(known.rate),
                        Cell::Float(known.rate_target_factor),
                        Cell::Float(known.rate_renormalized()),
                        Cell::Float(known.infeasible_mass),
                        if star.feasible {
                            Cell::Float(star.rate)
                        } else {
                            Cell::Infeasible
                        },
                        gain,
                    ]);
                }
            }
        }
    }
    table
}

/// Users supported per frame at a fixed 40x5 frame: the largest known
/// batch, the largest Poisson mean, and the largest Beta population.
fn fig7(settings: &ReproduceSettings) -> ResultTable {
    let mut table = ResultTable::new(vec![
        "r_target",
        "k",
        "capacity_known",
        "capacity_poisson_lambda",
        "capacity_beta_n_tot",
        "capacity_beta_per_frame",
    ]);
    meta(&mut table, Target::Fig7, settings, false);
    let grid: Vec<(f64, u32)> = [0.99, 0.99999]
        .into_iter()
        .flat_map(|t| MPR_SWEEP.iter().map(move |&k| (t, k)))
        .collect();
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(target, k)| {
            let req = RequirementSpec::new(target, LATENCY, k).unwrap();
            let known = match capacity_known_n(40, &req) {
                Ok(v) => Cell::Int(v as i64),
                Err(_) => Cell::Infeasible,
            };
            let poisson = match capacity_poisson(40, &req, 1e-3) {
                Ok(v) => Cell::Float(v),
                Err(_) => Cell::Infeasible,
            };
            let (beta_tot, beta_frame) = match capacity_beta(40, &req, 1) {
                Ok(v) => (
                    Cell::Int(v as i64),
                    Cell::Float(v as f64 / 1000.0),
                ),
                Err(_) => (Cell::Infeasible, Cell::Infeasible),
            };
            vec![
                Cell::Float(target),
                Cell::Int(k as i64),
                known,
                poisson,
                beta_tot,
                beta_frame,
            ]
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    table
}

/// One gain scan per channel-count convention, for a batch-size search
/// restricted to frames with at least `min_superslots` whole superslots.
fn dimension_with_floor(
    req: &RequirementSpec,
    min_superslots: u64,
    rel: impl Fn(&ProtocolConfig) -> f64,
) -> (u32, f64) {
    for g in 1..=req.max_channels() {
        let cfg = req.protocol(g);
        match cfg.superslot_count() {
            Ok(m) if m >= min_superslots => {}
            _ => continue,
        }
        let r = rel(&cfg);
        if r >= req.target_reliability() {
            return (g, r);
        }
    }
    (0, 0.0)
}

struct GainVariants {
    gain_target: Cell,
    gain_target_renorm: Cell,
    gain_achieved: Cell,
    gain_min_two: Cell,
    t_known: Cell,
    t_star: Cell,
    g_star: Cell,
    infeasible_mass: Cell,
}

fn table1_cell(pmf: &ArrivalPmf, req: &RequirementSpec) -> GainVariants {
    let known_sum = |min_m: u64| -> (f64, f64, f64) {
        // (target-factor sum, achieved-factor sum, infeasible mass)
        let l = req.latency_slots() as f64;
        let mut target = 0.0;
        let mut achieved = 0.0;
        let mut infeasible = pmf.truncated_tail();
        for (n, &mass) in pmf.masses().iter().enumerate().skip(1) {
            if mass == 0.0 {
                continue;
            }
            let n = n as u32;
            let (g, _) = dimension_with_floor(req, min_m, |cfg| {
                reliability::known_count(cfg, n).unwrap()
            });
            if g == 0 {
                infeasible += mass;
                continue;
            }
            let cfg = req.protocol(g);
            let r = reliability::known_count(&cfg, n).unwrap();
            target += mass * n as f64 * req.target_reliability() / (g as f64 * l);
            achieved += mass * n as f64 * r / (g as f64 * l);
        }
        (target, achieved, infeasible)
    };

    let star = |min_m: u64| -> Option<(u32, f64)> {
        let (g, r) = dimension_with_floor(req, min_m, |cfg| {
            reliability::mixture(cfg, pmf).unwrap()
        });
        (g > 0).then_some((g, r))
    };

    let (kt, ka, im) = known_sum(1);
    let (kt2, _, _) = known_sum(2);
    let denom = |g: u32| g as f64 * req.latency_slots() as f64;

    match star(1) {
        Some((g_star, r_star)) => {
            let ts_target = req.target_reliability() * pmf.mean() / denom(g_star);
            let ts_achieved = r_star * pmf.mean() / denom(g_star);
            let min_two = match star(2) {
                Some((g2, _)) => {
                    let ts2 = req.target_reliability() * pmf.mean() / denom(g2);
                    Cell::Fixed(kt2 / ts2 - 1.0, 4)
                }
                None => Cell::Inf,
            };
            GainVariants {
                gain_target: Cell::Fixed(kt / ts_target - 1.0, 4),
                gain_target_renorm: if im < 1.0 {
                    Cell::Fixed(kt / (1.0 - im) / ts_target - 1.0, 4)
                } else {
                    Cell::Infeasible
                },
                gain_achieved: Cell::Fixed(ka / ts_achieved - 1.0, 4),
                gain_min_two: min_two,
                t_known: Cell::Float(ka),
                t_star: Cell::Float(ts_achieved),
                g_star: Cell::Int(g_star as i64),
                infeasible_mass: Cell::Float(im),
            }
        }
        None => GainVariants {
            gain_target: if kt > 0.0 { Cell::Inf } else { Cell::Infeasible },
            gain_target_renorm: if kt > 0.0 { Cell::Inf } else { Cell::Infeasible },
            gain_achieved: if ka > 0.0 { Cell::Inf } else { Cell::Infeasible },
            gain_min_two: Cell::Inf,
            t_known: Cell::Float(ka),
            t_star: Cell::Infeasible,
            g_star: Cell::Int(0),
            infeasible_mass: Cell::Float(im),
        },
    }
}

/// The normalized-gain grid: two reliability targets by four arrival
/// processes by four MPR orders, with every evaluation convention the
/// tool supports emitted side by side.
fn table1(settings: &ReproduceSettings) -> ResultTable {
    let mut table = ResultTable::new(vec![
        "r_target",
        "arrival",
        "mean_load",
        "k",
        "gain",
        "gain_renormalized",
        "gain_achieved",
        "gain_min_two_superslots",
        "t_known",
        "t_star",
        "g_star",
        "infeasible_mass_known",
    ]);
    meta(&mut table, Target::Table1, settings, false);

    let arrivals: Vec<(String, ArrivalPmf)> = vec![
        ("poisson_3".into(), PoissonModel::new(3.0).unwrap().pmf()),
        ("poisson_15".into(), PoissonModel::new(15.0).unwrap().pmf()),
        (
            "beta_3000".into(),
            BetaBatchModel::three_gpp(3000).unwrap().pmf(),
        ),
        (
            "beta_15000".into(),
            BetaBatchModel::three_gpp(15000).unwrap().pmf(),
        ),
    ];

    for target in [0.99, 0.99999] {
        for (label, pmf) in &arrivals {
            for k in [1u32, 3, 5, 10] {
                let req = RequirementSpec::new(target, LATENCY, k).unwrap();
                let v = table1_cell(pmf, &req);
                table.push(vec![
                    Cell::Float(target),
                    Cell::Text(label.clone()),
                    Cell::Float(pmf.mean()),
                    Cell::Int(k as i64),
                    v.gain_target,
                    v.gain_target_renorm,
                    v.gain_achieved,
                    v.gain_min_two,
                    v.t_known,
                    v.t_star,
                    v.g_star,
                    v.infeasible_mass,
                ]);
            }
        }
    }
    table
}
