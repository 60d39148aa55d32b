//! Scenario files: one JSON document describing a named experiment over
//! a protocol sweep, executed into one long-format result table.

use gfaloha_core::{
    capacity_beta, capacity_known_n, capacity_poisson, dimension_mixture,
    normalized_gain, overprovisioned_dimension, reliability, simulate_scenario, throughput_known,
    throughput_mixture, ArrivalPmf, ArrivalProcess, BetaBatchModel, EstimationErrorModel,
    PoissonModel, ProtocolConfig, RequirementSpec, SimConfig,
};
use serde::Deserialize;

use crate::table::{fnv1a64, Cell, ResultTable};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub outputs: Vec<Output>,
    pub sweep: Sweep,
    #[serde(default)]
    pub requirement: Option<Requirement>,
    pub arrival: ArrivalSpec,
    #[serde(default)]
    pub epsilon_max: Vec<f64>,
    #[serde(default)]
    pub sim: Option<SimSettings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Reliability,
    Dimension,
    Throughput,
    Capacity,
    Simulate,
}

impl Output {
    fn name(&self) -> &'static str {
        match self {
            Output::Reliability => "reliability",
            Output::Dimension => "dimension",
            Output::Throughput => "throughput",
            Output::Capacity => "capacity",
            Output::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub g: Vec<u32>,
    pub l: Vec<u32>,
    pub k: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub target_reliability: f64,
    #[serde(default = "default_g_max")]
    pub g_max: u32,
}

fn default_g_max() -> u32 {
    gfaloha_core::dimensioning::DEFAULT_MAX_CHANNELS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub iterations: u64,
    #[serde(default)]
    pub seed: u64,
}

/// Tagged arrival-model record, shared between scenario files and the
/// direct CLI flags.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrivalSpec {
    Poisson {
        lambda: f64,
        #[serde(default)]
        tail_tolerance: Option<f64>,
    },
    Beta {
        n_tot: u64,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_activation")]
        activation_time_s: f64,
        #[serde(default = "default_interval_ms")]
        interval_ms: f64,
        #[serde(default)]
        tail_tolerance: Option<f64>,
    },
    Known {
        n: u32,
    },
}

fn default_alpha() -> f64 {
    gfaloha_core::arrivals::THREE_GPP_ALPHA
}
fn default_beta() -> f64 {
    gfaloha_core::arrivals::THREE_GPP_BETA
}
fn default_activation() -> f64 {
    gfaloha_core::arrivals::THREE_GPP_ACTIVATION_TIME_S
}
fn default_interval_ms() -> f64 {
    gfaloha_core::arrivals::THREE_GPP_INTERVAL_S * 1000.0
}

impl ArrivalSpec {
    pub fn describe(&self) -> String {
        match self {
            ArrivalSpec::Poisson { lambda, .. } => format!("poisson({lambda})"),
            ArrivalSpec::Beta { n_tot, .. } => format!("beta({n_tot})"),
            ArrivalSpec::Known { n } => format!("known({n})"),
        }
    }

    pub fn known_count(&self) -> Option<u32> {
        match self {
            ArrivalSpec::Known { n } => Some(*n),
            _ => None,
        }
    }

    pub fn pmf(&self) -> Result<ArrivalPmf, String> {
        match self {
            ArrivalSpec::Poisson {
                lambda,
                tail_tolerance,
            } => {
                let model = match tail_tolerance {
                    Some(tol) => PoissonModel::with_tail_tolerance(*lambda, *tol),
                    None => PoissonModel::new(*lambda),
                }
                .map_err(|e| format!("arrival.lambda: {e}"))?;
                Ok(model.pmf())
            }
            ArrivalSpec::Beta { .. } => Ok(self.beta_model()?.pmf()),
            ArrivalSpec::Known { n } => Ok(gfaloha_core::known_pmf(*n)),
        }
    }

    pub fn beta_model(&self) -> Result<BetaBatchModel, String> {
        match self {
            ArrivalSpec::Beta {
                n_tot,
                alpha,
                beta,
                activation_time_s,
                interval_ms,
                tail_tolerance,
            } => {
                let interval_s = interval_ms / 1000.0;
                match tail_tolerance {
                    Some(tol) => BetaBatchModel::with_tail_tolerance(
                        *n_tot,
                        *alpha,
                        *beta,
                        *activation_time_s,
                        interval_s,
                        *tol,
                    ),
                    None => {
                        BetaBatchModel::new(*n_tot, *alpha, *beta, *activation_time_s, interval_s)
                    }
                }
                .map_err(|e| format!("arrival: {e}"))
            }
            _ => Err("arrival: not a beta model".to_string()),
        }
    }

    pub fn process(&self) -> Result<ArrivalProcess, String> {
        Ok(match self {
            ArrivalSpec::Poisson { lambda, .. } => ArrivalProcess::Poisson(
                PoissonModel::new(*lambda).map_err(|e| format!("arrival.lambda: {e}"))?,
            ),
            ArrivalSpec::Beta { .. } => ArrivalProcess::Beta(self.beta_model()?),
            ArrivalSpec::Known { n } => ArrivalProcess::Known(*n),
        })
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, String> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| e.to_string())?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), String> {
        if self.outputs.is_empty() {
            return Err("outputs: must list at least one computation".into());
        }
        if self.sweep.l.is_empty() {
            return Err("sweep.l: must be non-empty".into());
        }
        if self.sweep.k.is_empty() {
            return Err("sweep.k: must be non-empty".into());
        }
        let needs_g = [Output::Reliability, Output::Capacity, Output::Simulate];
        if self
            .outputs
            .iter()
            .any(|o| needs_g.contains(o))
            && self.sweep.g.is_empty()
        {
            return Err("sweep.g: must be non-empty for reliability/capacity/simulate".into());
        }
        let needs_req = [Output::Dimension, Output::Throughput, Output::Capacity];
        if self.outputs.iter().any(|o| needs_req.contains(o)) && self.requirement.is_none() {
            return Err("requirement: required for dimension/throughput/capacity".into());
        }
        if self.outputs.contains(&Output::Simulate) && self.sim.is_none() {
            return Err("sim: required for the simulate output".into());
        }
        if let Some(req) = &self.requirement {
            if !(req.target_reliability > 0.0 && req.target_reliability < 1.0) {
                return Err("requirement.target_reliability: must lie in (0, 1)".into());
            }
        }
        Ok(())
    }

    fn epsilons(&self) -> Vec<f64> {
        if self.epsilon_max.is_empty() {
            vec![0.0]
        } else {
            self.epsilon_max.clone()
        }
    }

    fn requirement(&self, l: u32, k: u32) -> Result<RequirementSpec, String> {
        let req = self.requirement.as_ref().expect("validated");
        RequirementSpec::new(req.target_reliability, l, k)
            .and_then(|r| r.with_max_channels(req.g_max))
            .map_err(|e| format!("requirement: {e}"))
    }

    /// Execute every requested computation over the sweep grid; rows in
    /// deterministic grid order.
    pub fn run(&self, raw_text: &str) -> Result<ResultTable, String> {
        let mut table = ResultTable::new(vec![
            "output", "arrival", "g", "l", "k", "epsilon_max", "metric", "value",
        ]);
        table.meta("tool", format!("gfaloha {}", env!("CARGO_PKG_VERSION")));
        table.meta("scenario", &self.name);
        table.meta("scenario_hash", format!("{:016x}", fnv1a64(raw_text.as_bytes())));
        if let Some(sim) = &self.sim {
            table.meta("seed", sim.seed);
            table.meta("iterations", sim.iterations);
        } else {
            table.meta("seed", "-");
            table.meta("iterations", "-");
        }

        let arrival = self.arrival.describe();
        let pmf = self.arrival.pmf()?;
        for &output in &self.outputs {
            for &l in &self.sweep.l {
                for &k in &self.sweep.k {
                    match output {
                        Output::Reliability => {
                            for &g in &self.sweep.g {
                                let cfg = ProtocolConfig::new(g, l, k)
                                    .map_err(|e| format!("sweep: {e}"))?;
                                let value = match cfg.superslot_count() {
                                    Ok(_) => Cell::Float(
                                        reliability::mixture(&cfg, &pmf).expect("superslots"),
                                    ),
                                    Err(_) => Cell::Infeasible,
                                };
                                table.push(row(
                                    output, &arrival, Some(g), l, k, None, "reliability", value,
                                ));
                            }
                        }
                        Output::Dimension => {
                            let req = self.requirement(l, k)?;
                            match self.arrival.known_count() {
                                Some(0) => {
                                    return Err(
                                        "arrival.n: dimensioning requires a batch of at least 1"
                                            .into(),
                                    )
                                }
                                Some(n) => {
                                    for eps in self.epsilons() {
                                        let err = EstimationErrorModel::new(eps)
                                            .map_err(|e| format!("epsilon_max: {e}"))?;
                                        let dim = overprovisioned_dimension(n, &err, &req)
                                            .map_err(|e| format!("dimension: {e}"))?;
                                        push_dimension(&mut table, output, &arrival, l, k, Some(eps), dim);
                                    }
                                }
                                None => {
                                    let dim = dimension_mixture(&pmf, &req);
                                    push_dimension(&mut table, output, &arrival, l, k, None, dim);
                                }
                            }
                        }
                        Output::Throughput => {
                            let req = self.requirement(l, k)?;
                            let star = throughput_mixture(&pmf, &req);
                            for eps in self.epsilons() {
                                let err = EstimationErrorModel::new(eps)
                                    .map_err(|e| format!("epsilon_max: {e}"))?;
                                let known = throughput_known(&pmf, &req, &err);
                                table.push(row(
                                    output,
                                    &arrival,
                                    None,
                                    l,
                                    k,
                                    Some(eps),
                                    "t_known",
                                    Cell::Float(known.rate),
                                ));
                                table.push(row(
                                    output,
                                    &arrival,
                                    None,
                                    l,
                                    k,
                                    Some(eps),
                                    "infeasible_mass_known",
                                    Cell::Float(known.infeasible_mass),
                                ));
                                table.push(row(
                                    output,
                                    &arrival,
                                    None,
                                    l,
                                    k,
                                    Some(eps),
                                    "t_star",
                                    if star.feasible {
                                        Cell::Float(star.rate)
                                    } else {
                                        Cell::Infeasible
                                    },
                                ));
                                let gain = match normalized_gain(known.rate, star.rate, star.feasible)
                                {
                                    Ok(v) => Cell::Fixed(v, 4),
                                    Err(_) => Cell::Infeasible,
                                };
                                table.push(row(output, &arrival, None, l, k, Some(eps), "gain", gain));
                            }
                        }
                        Output::Capacity => {
                            let req = self.requirement(l, k)?;
                            for &g in &self.sweep.g {
                                let known = match capacity_known_n(g, &req) {
                                    Ok(v) => Cell::Int(v as i64),
                                    Err(_) => Cell::Infeasible,
                                };
                                table.push(row(
                                    output, &arrival, Some(g), l, k, None, "capacity_known", known,
                                ));
                                match &self.arrival {
                                    ArrivalSpec::Poisson { .. } => {
                                        let cell = match capacity_poisson(g, &req, 1e-3) {
                                            Ok(v) => Cell::Float(v),
                                            Err(_) => Cell::Infeasible,
                                        };
                                        table.push(row(
                                            output,
                                            &arrival,
                                            Some(g),
                                            l,
                                            k,
                                            None,
                                            "capacity_poisson_lambda",
                                            cell,
                                        ));
                                    }
                                    ArrivalSpec::Beta { .. } => {
                                        let cell = match capacity_beta(g, &req, 1) {
                                            Ok(v) => Cell::Int(v as i64),
                                            Err(_) => Cell::Infeasible,
                                        };
                                        table.push(row(
                                            output,
                                            &arrival,
                                            Some(g),
                                            l,
                                            k,
                                            None,
                                            "capacity_beta_n_tot",
                                            cell,
                                        ));
                                    }
                                    ArrivalSpec::Known { .. } => {}
                                }
                            }
                        }
                        Output::Simulate => {
                            let sim = self.sim.as_ref().expect("validated");
                            for &g in &self.sweep.g {
                                let cfg = ProtocolConfig::new(g, l, k)
                                    .map_err(|e| format!("sweep: {e}"))?;
                                let config = SimConfig {
                                    iterations: sim.iterations,
                                    master_seed: sim.seed,
                                    protocol: cfg,
                                    arrivals: self.arrival.process()?,
                                };
                                match simulate_scenario(&config) {
                                    Ok(res) => {
                                        for (metric, value) in [
                                            ("sim_reliability", res.empirical_reliability),
                                            ("sim_reliability_stderr", res.reliability_stderr),
                                            ("sim_throughput", res.empirical_throughput),
                                            ("sim_throughput_stderr", res.throughput_stderr),
                                            (
                                                "sim_zero_arrival_frames",
                                                res.zero_arrival_frames as f64,
                                            ),
                                        ] {
                                            table.push(row(
                                                output,
                                                &arrival,
                                                Some(g),
                                                l,
                                                k,
                                                None,
                                                metric,
                                                Cell::Float(value),
                                            ));
                                        }
                                    }
                                    Err(_) => {
                                        table.push(row(
                                            output,
                                            &arrival,
                                            Some(g),
                                            l,
                                            k,
                                            None,
                                            "sim_reliability",
                                            Cell::Infeasible,
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(table)
    }
}

fn push_dimension(
    table: &mut ResultTable,
    output: Output,
    arrival: &str,
    l: u32,
    k: u32,
    eps: Option<f64>,
    dim: gfaloha_core::DimensionResult,
) {
    let (g_cell, r_cell) = if dim.feasible {
        (
            Cell::Int(dim.g_min as i64),
            Cell::Float(dim.achieved_reliability),
        )
    } else {
        (Cell::Int(0), Cell::Infeasible)
    };
    table.push(row(output, arrival, None, l, k, eps, "g_min", g_cell));
    table.push(row(
        output,
        arrival,
        None,
        l,
        k,
        eps,
        "achieved_reliability",
        r_cell,
    ));
}

#[allow(clippy::too_many_arguments)]
fn row(
    output: Output,
    arrival: &str,
    g: Option<u32>,
    l: u32,
    k: u32,
    eps: Option<f64>,
    metric: &str,
    value: Cell,
) -> Vec<Cell> {
    vec![
        Cell::Text(output.name().to_string()),
        Cell::Text(arrival.to_string()),
        match g {
            Some(g) => Cell::Int(g as i64),
            None => Cell::Text("-".into()),
        },
        Cell::Int(l as i64),
        Cell::Int(k as i64),
        match eps {
            Some(e) => Cell::Float(e),
            None => Cell::Text("-".into()),
        },
        Cell::Text(metric.to_string()),
        value,
    ]
}
