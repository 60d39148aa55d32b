//! Command-line harness: reliability curves, channel dimensioning,
//! throughput comparisons, capacity searches, Monte Carlo validation,
//! scenario files, and canned figure/table reproductions, all emitted as
//! CSV with '#'-prefixed metadata.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 every feasibility-
//! bearing result in the run was infeasible (the CSV is still written).

mod reproduce;
mod scenario;
mod table;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfaloha_core::{
    capacity_beta, capacity_known_n, capacity_poisson, dimension_mixture, normalized_gain,
    overprovisioned_dimension, reliability, simulate_scenario, EstimationErrorModel,
    ProtocolConfig, RequirementSpec, SimConfig,
};

use reproduce::{ReproduceSettings, Target};
use scenario::{ArrivalSpec, Scenario};
use table::{fnv1a64, Cell, ResultTable};

#[derive(Parser)]
#[command(
    name = "gfaloha",
    version,
    about = "Grant-free framed slotted ALOHA with K-multipacket reception: analysis, dimensioning and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reliability of a frame for a known batch size or an arrival model.
    Reliability {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        arrival: ArrivalArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimal channel count meeting a reliability target.
    Dimension {
        #[command(flatten)]
        req: ReqArgs,
        #[command(flatten)]
        arrival: ArrivalArgs,
        /// Estimation-error bounds to over-provision against
        /// (known-batch arrivals only).
        #[arg(long, value_delimiter = ',', default_value = "0.0")]
        epsilon: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Known-batch vs distribution-only throughput and normalized gain.
    Throughput {
        #[command(flatten)]
        req: ReqArgs,
        #[command(flatten)]
        arrival: ArrivalArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.0")]
        epsilon: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Largest admissible load at a fixed channel count.
    Capacity {
        /// Channel counts to evaluate.
        #[arg(long, value_delimiter = ',', required = true)]
        g: Vec<u32>,
        #[command(flatten)]
        req: ReqArgs,
        /// Load model searched: known | poisson | beta.
        #[arg(long, default_value = "known")]
        mode: String,
        /// Absolute tolerance on the Poisson mean search.
        #[arg(long, default_value_t = 1e-3)]
        tol_lambda: f64,
        /// Tolerance in users on the Beta population search.
        #[arg(long, default_value_t = 1)]
        tol_users: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo estimate of reliability and throughput.
    Simulate {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        arrival: ArrivalArgs,
        #[arg(long, default_value_t = gfaloha_core::sim::DEFAULT_ITERATIONS)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Emit the CSV underlying a canned exhibit:
    /// fig2|fig3|fig4|fig5|fig6|fig7|table1.
    Reproduce {
        target: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the simulation iteration count.
        #[arg(long)]
        iterations: Option<u64>,
        /// Use the precision-grade iteration count (10^6).
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Execute a scenario file (JSON).
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Channel counts.
    #[arg(long, value_delimiter = ',', required = true)]
    g: Vec<u32>,
    /// Latency budget in slots.
    #[arg(long)]
    l: u32,
    /// MPR orders (superslot sizes).
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
}

#[derive(Args)]
struct ReqArgs {
    /// Latency budget in slots.
    #[arg(long)]
    l: u32,
    /// MPR orders (superslot sizes).
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    /// Target reliability in (0, 1).
    #[arg(long)]
    target: f64,
    /// Largest channel count the search may grant.
    #[arg(long, default_value_t = gfaloha_core::dimensioning::DEFAULT_MAX_CHANNELS)]
    g_max: u32,
}

#[derive(Args)]
struct ArrivalArgs {
    /// Known batch size.
    #[arg(long, conflicts_with_all = ["lambda", "beta_n_tot"])]
    n: Option<u32>,
    /// Poisson mean arrivals per frame.
    #[arg(long, conflicts_with = "beta_n_tot")]
    lambda: Option<f64>,
    /// Beta-traffic population size.
    #[arg(long)]
    beta_n_tot: Option<u64>,
    /// Beta shape alpha.
    #[arg(long, default_value_t = gfaloha_core::arrivals::THREE_GPP_ALPHA)]
    alpha: f64,
    /// Beta shape beta.
    #[arg(long, default_value_t = gfaloha_core::arrivals::THREE_GPP_BETA)]
    beta: f64,
    /// Beta activation window in seconds.
    #[arg(long, default_value_t = gfaloha_core::arrivals::THREE_GPP_ACTIVATION_TIME_S)]
    activation_s: f64,
    /// Beta gating interval in milliseconds.
    #[arg(long, default_value_t = 10.0)]
    interval_ms: f64,
}

impl ArrivalArgs {
    fn spec(&self) -> Result<ArrivalSpec, String> {
        match (self.n, self.lambda, self.beta_n_tot) {
            (Some(n), None, None) => Ok(ArrivalSpec::Known { n }),
            (None, Some(lambda), None) => Ok(ArrivalSpec::Poisson {
                lambda,
                tail_tolerance: None,
            }),
            (None, None, Some(n_tot)) => Ok(ArrivalSpec::Beta {
                n_tot,
                alpha: self.alpha,
                beta: self.beta,
                activation_time_s: self.activation_s,
                interval_ms: self.interval_ms,
                tail_tolerance: None,
            }),
            _ => Err("exactly one of --n, --lambda, --beta-n-tot is required".to_string()),
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, String> {
    let (table, out) = match cli.command {
        Command::Reliability { grid, arrival, out } => (cmd_reliability(grid, arrival)?, out),
        Command::Dimension {
            req,
            arrival,
            epsilon,
            out,
        } => (cmd_dimension(req, arrival, epsilon)?, out),
        Command::Throughput {
            req,
            arrival,
            epsilon,
            out,
        } => (cmd_throughput(req, arrival, epsilon)?, out),
        Command::Capacity {
            g,
            req,
            mode,
            tol_lambda,
            tol_users,
            out,
        } => (cmd_capacity(g, req, mode, tol_lambda, tol_users)?, out),
        Command::Simulate {
            grid,
            arrival,
            iterations,
            seed,
            out,
        } => (cmd_simulate(grid, arrival, iterations, seed)?, out),
        Command::Reproduce {
            target,
            seed,
            iterations,
            full,
            out,
        } => {
            let target = Target::parse(&target)
                .ok_or_else(|| format!("unknown reproduce target `{target}`"))?;
            let settings = ReproduceSettings::new(seed, iterations, full);
            (reproduce::run(target, &settings), out)
        }
        Command::Run { scenario, out } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| format!("{}: {e}", scenario.display()))?;
            let parsed = Scenario::parse(&text)?;
            (parsed.run(&text)?, out)
        }
    };

    let csv = table.to_csv();
    match &out.out {
        Some(path) => fs::write(path, csv.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv.as_bytes()).map_err(|e| e.to_string())?;
        }
    }
    Ok(if table.all_infeasible() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn base_meta(table: &mut ResultTable, descriptor: &str) {
    table.meta("tool", format!("gfaloha {}", env!("CARGO_PKG_VERSION")));
    table.meta("scenario", descriptor);
    table.meta(
        "scenario_hash",
        format!("{:016x}", fnv1a64(descriptor.as_bytes())),
    );
    table.meta("seed", "-");
    table.meta("iterations", "-");
}

fn cmd_reliability(grid: GridArgs, arrival: ArrivalArgs) -> Result<ResultTable, String> {
    let spec = arrival.spec()?;
    let pmf = spec.pmf()?;
    let mut table = ResultTable::new(vec!["arrival", "g", "l", "k", "reliability"]);
    base_meta(
        &mut table,
        &format!("reliability {} g={:?} l={} k={:?}", spec.describe(), grid.g, grid.l, grid.k),
    );
    for &k in &grid.k {
        for &g in &grid.g {
            let cfg = ProtocolConfig::new(g, grid.l, k).map_err(|e| e.to_string())?;
            let cell = match cfg.superslot_count() {
                Ok(_) => Cell::Float(reliability::mixture(&cfg, &pmf).expect("superslots")),
                Err(_) => Cell::Infeasible,
            };
            table.push(vec![
                Cell::Text(spec.describe()),
                Cell::Int(g as i64),
                Cell::Int(grid.l as i64),
                Cell::Int(k as i64),
                cell,
            ]);
        }
    }
    Ok(table)
}

fn requirement(req: &ReqArgs, k: u32) -> Result<RequirementSpec, String> {
    RequirementSpec::new(req.target, req.l, k)
        .and_then(|r| r.with_max_channels(req.g_max))
        .map_err(|e| e.to_string())
}

fn cmd_dimension(req: ReqArgs, arrival: ArrivalArgs, epsilon: Vec<f64>) -> Result<ResultTable, String> {
    let spec = arrival.spec()?;
    let mut table = ResultTable::new(vec![
        "arrival",
        "l",
        "k",
        "epsilon_max",
        "g_min",
        "achieved_reliability",
    ]);
    base_meta(
        &mut table,
        &format!(
            "dimension {} target={} l={} k={:?} eps={:?}",
            spec.describe(),
            req.target,
            req.l,
            req.k,
            epsilon
        ),
    );
    let pmf = spec.pmf()?;
    for &k in &req.k {
        let rq = requirement(&req, k)?;
        match spec.known_count() {
            Some(n) => {
                if n == 0 {
                    return Err("--n: dimensioning requires a batch of at least 1".into());
                }
                for &eps in &epsilon {
                    let err = EstimationErrorModel::new(eps).map_err(|e| e.to_string())?;
                    let dim = overprovisioned_dimension(n, &err, &rq).map_err(|e| e.to_string())?;
                    push_dim_row(&mut table, &spec, req.l, k, Some(eps), dim);
                }
            }
            None => {
                let dim = dimension_mixture(&pmf, &rq);
                push_dim_row(&mut table, &spec, req.l, k, None, dim);
            }
        }
    }
    Ok(table)
}

fn push_dim_row(
    table: &mut ResultTable,
    spec: &ArrivalSpec,
    l: u32,
    k: u32,
    eps: Option<f64>,
    dim: gfaloha_core::DimensionResult,
) {
    table.push(vec![
        Cell::Text(spec.describe()),
        Cell::Int(l as i64),
        Cell::Int(k as i64),
        eps.map_or(Cell::Text("-".into()), Cell::Float),
        Cell::Int(dim.g_min as i64),
        if dim.feasible {
            Cell::Float(dim.achieved_reliability)
        } else {
            Cell::Infeasible
        },
    ]);
}

fn cmd_throughput(req: ReqArgs, arrival: ArrivalArgs, epsilon: Vec<f64>) -> Result<ResultTable, String> {
    let spec = arrival.spec()?;
    let pmf = spec.pmf()?;
    let mut table = ResultTable::new(vec![
        "arrival",
        "l",
        "k",
        "epsilon_max",
        "t_known",
        "t_known_target_factor",
        "infeasible_mass_known",
        "t_star",
        "g_star",
        "gain",
    ]);
    base_meta(
        &mut table,
        &format!(
            "throughput {} target={} l={} k={:?} eps={:?}",
            spec.describe(),
            req.target,
            req.l,
            req.k,
            epsilon
        ),
    );
    for &k in &req.k {
        let rq = requirement(&req, k)?;
        let star = gfaloha_core::throughput_mixture(&pmf, &rq);
        for &eps in &epsilon {
            let err = EstimationErrorModel::new(eps).map_err(|e| e.to_string())?;
            let known = gfaloha_core::throughput_known(&pmf, &rq, &err);
            let gain = match normalized_gain(known.rate, star.rate, star.feasible) {
                Ok(v) => Cell::Fixed(v, 4),
                Err(_) => Cell::Infeasible,
            };
            table.push(vec![
                Cell::Text(spec.describe()),
                Cell::Int(req.l as i64),
                Cell::Int(k as i64),
                Cell::Float(eps),
                Cell::Float(known.rate),
                Cell::Float(known.rate_target_factor),
                Cell::Float(known.infeasible_mass),
                if star.feasible {
                    Cell::Float(star.rate)
                } else {
                    Cell::Infeasible
                },
                Cell::Int(star.dimension.g_min as i64),
                gain,
            ]);
        }
    }
    Ok(table)
}

fn cmd_capacity(
    g: Vec<u32>,
    req: ReqArgs,
    mode: String,
    tol_lambda: f64,
    tol_users: u64,
) -> Result<ResultTable, String> {
    if !["known", "poisson", "beta"].contains(&mode.as_str()) {
        return Err(format!("--mode: unknown load model `{mode}`"));
    }
    let mut table = ResultTable::new(vec!["mode", "g", "l", "k", "capacity"]);
    base_meta(
        &mut table,
        &format!("capacity mode={mode} target={} g={g:?} l={} k={:?}", req.target, req.l, req.k),
    );
    for &k in &req.k {
        let rq = requirement(&req, k)?;
        for &gv in &g {
            let cell = match mode.as_str() {
                "known" => capacity_known_n(gv, &rq)
                    .map(|v| Cell::Int(v as i64))
                    .unwrap_or(Cell::Infeasible),
                "poisson" => capacity_poisson(gv, &rq, tol_lambda)
                    .map(Cell::Float)
                    .unwrap_or(Cell::Infeasible),
                _ => capacity_beta(gv, &rq, tol_users)
                    .map(|v| Cell::Int(v as i64))
                    .unwrap_or(Cell::Infeasible),
            };
            table.push(vec![
                Cell::Text(mode.clone()),
                Cell::Int(gv as i64),
                Cell::Int(req.l as i64),
                Cell::Int(k as i64),
                cell,
            ]);
        }
    }
    Ok(table)
}

fn cmd_simulate(
    grid: GridArgs,
    arrival: ArrivalArgs,
    iterations: u64,
    seed: u64,
) -> Result<ResultTable, String> {
    let spec = arrival.spec()?;
    let mut table = ResultTable::new(vec![
        "arrival",
        "g",
        "l",
        "k",
        "sim_reliability",
        "sim_reliability_stderr",
        "sim_reliability_with_empty",
        "sim_throughput",
        "sim_throughput_stderr",
        "zero_arrival_frames",
        "resolved_total",
    ]);
    table.meta("tool", format!("gfaloha {}", env!("CARGO_PKG_VERSION")));
    let descriptor = format!(
        "simulate {} g={:?} l={} k={:?}",
        spec.describe(),
        grid.g,
        grid.l,
        grid.k
    );
    table.meta("scenario", &descriptor);
    table.meta("scenario_hash", format!("{:016x}", fnv1a64(descriptor.as_bytes())));
    table.meta("seed", seed);
    table.meta("iterations", iterations);

    for &k in &grid.k {
        for &g in &grid.g {
            let cfg = ProtocolConfig::new(g, grid.l, k).map_err(|e| e.to_string())?;
            let sim = SimConfig {
                iterations,
                master_seed: seed,
                protocol: cfg,
                arrivals: spec.process().map_err(|e| e.to_string())?,
            };
            match simulate_scenario(&sim) {
                Ok(res) => {
                    let (with_empty, _) = res.reliability_vs_mixture();
                    table.push(vec![
                        Cell::Text(spec.describe()),
                        Cell::Int(g as i64),
                        Cell::Int(grid.l as i64),
                        Cell::Int(k as i64),
                        Cell::Float(res.empirical_reliability),
                        Cell::Float(res.reliability_stderr),
                        Cell::Float(with_empty),
                        Cell::Float(res.empirical_throughput),
                        Cell::Float(res.throughput_stderr),
                        Cell::Int(res.zero_arrival_frames as i64),
                        Cell::Int(res.resolved_total as i64),
                    ]);
                }
                Err(gfaloha_core::Error::ZeroSuperslots { .. }) => {
                    table.push(vec![
                        Cell::Text(spec.describe()),
                        Cell::Int(g as i64),
                        Cell::Int(grid.l as i64),
                        Cell::Int(k as i64),
                        Cell::Infeasible,
                        Cell::Infeasible,
                        Cell::Infeasible,
                        Cell::Infeasible,
                        Cell::Infeasible,
                        Cell::Infeasible,
                        Cell::Infeasible,
                    ]);
                }
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(table)
}
