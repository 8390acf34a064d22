// SPDX-License-Identifier: Apache-2.0
//! The full flow: partition rounds, buffer sweep and mapping search, merged
//! into one Pareto front.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pareto::{pareto_filter, DesignPoint, ParetoFront, Provenance};
use super::sweep::{sweep_buffers, SweepConfig, SweepPoint};
use crate::error::{Error, MappingError, SdfgError};
use crate::graph::{HardwareGraph, SnnGraph};
use crate::mapping::{
    cluster_demands, evaluate_mapping, search_mapping, MappingContext, MappingSolution, SwarmConfig,
    DEFAULT_TIME_WHEEL_FACTOR,
};
use crate::partition::{partition_round, CrossbarConstraint, KlTrace, PartitionRound};
use crate::sdfg::{
    check_deadlock, delay_feedback, lift_to_sdfg, repetition_vector, set_buffer_allocation, AnalysisOptions,
    DeadlockCheck, Sdfg, DEFAULT_STATE_BUDGET,
};
use crate::seed::derive_seed;

/// Stream tag for swarm seeds.
const SWARM_STREAM: u64 = 2;

/// How mappings are searched across the buffer sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingMode {
    /// A fresh swarm search for every allocation.
    PerAllocation,
    /// One search at the largest allocation, reused for the others.
    Reuse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Crossbar dimension used for partitioning; defaults to the smallest
    /// crossbar of the platform.
    pub crossbar_dim: Option<usize>,
    /// Whether external inputs occupy crossbar rows.
    pub count_inputs: bool,
    pub eta: usize,
    pub delta_min: f64,
    pub master_seed: u64,
    pub time_wheel_factor: u64,
    pub state_budget: usize,
    pub mapping_mode: MappingMode,
    /// Delay feedback between clusters by one frame so that cluster cycles
    /// do not deadlock.
    pub feedback_delay: bool,
    pub swarm: SwarmConfig,
    pub sweep: SweepConfig,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            crossbar_dim: None,
            count_inputs: true,
            eta: 1,
            delta_min: 0.0,
            master_seed: 0,
            time_wheel_factor: DEFAULT_TIME_WHEEL_FACTOR,
            state_budget: DEFAULT_STATE_BUDGET,
            mapping_mode: MappingMode::PerAllocation,
            feedback_delay: true,
            swarm: SwarmConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.eta == 0 {
            return bad("eta must be at least 1");
        }
        if !(self.delta_min >= 0.0 && self.delta_min.is_finite()) {
            return bad("delta_min must be a non-negative number");
        }
        if self.crossbar_dim == Some(0) {
            return bad("crossbar_dim must be at least 1");
        }
        if self.time_wheel_factor == 0 {
            return bad("time_wheel_factor must be at least 1");
        }
        if self.state_budget == 0 {
            return bad("state_budget must be at least 1");
        }
        if self.sweep.plateau == 0 {
            return bad("sweep plateau must be at least 1");
        }
        self.swarm.validate()?;
        Ok(())
    }

    /// Partitioning constraint: `crossbar_dim` if set, otherwise the
    /// smallest crossbar of `hw`.
    pub fn crossbar_constraint(&self, hw: Option<&HardwareGraph>) -> Result<CrossbarConstraint, Error> {
        let dim = match (self.crossbar_dim, hw) {
            (Some(m), _) => m,
            (None, Some(hw)) => hw
                .cores()
                .iter()
                .map(|c| c.crossbar_dim)
                .min()
                .ok_or_else(|| Error::Config("platform has no cores".into()))?,
            (None, None) => return Err(Error::Config("no crossbar dimension and no hardware graph".into())),
        };
        Ok(CrossbarConstraint {
            crossbar_dim: dim,
            count_inputs: self.count_inputs,
        })
    }
}

/// Everything one partition round produced.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub round: usize,
    pub partition: PartitionRound,
    pub sdfg: Sdfg,
    pub sweep: Vec<SweepPoint>,
    /// One solution per sweep point.
    pub solutions: Vec<MappingSolution>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundFailure {
    pub round: usize,
    pub message: String,
    pub budget_exceeded: bool,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub front: ParetoFront,
    /// Front after merging each round in turn; the last equals `front`.
    pub incremental: Vec<ParetoFront>,
    pub points: Vec<DesignPoint>,
    pub rounds: Vec<RoundOutcome>,
    pub failures: Vec<RoundFailure>,
}

impl FlowResult {
    pub fn budget_exceeded(&self) -> bool {
        self.failures.iter().any(|f| f.budget_exceeded)
    }

    /// Mapping solution behind a design point.
    pub fn solution(&self, p: &DesignPoint) -> Option<&MappingSolution> {
        self.rounds
            .iter()
            .find(|r| r.round == p.provenance.round)
            .and_then(|r| r.solutions.get(p.provenance.sweep_step))
    }

    pub fn traces(&self) -> Vec<(usize, &KlTrace)> {
        self.rounds.iter().map(|r| (r.round, &r.partition.trace)).collect()
    }
}

/// Execution time given to every actor before mapping: the slowest core's,
/// so that the sweep never assumes a faster core than the mapping can give.
pub fn lift_exec_time(hw: &HardwareGraph) -> u64 {
    hw.cores().iter().map(|c| c.exec_time).max().unwrap_or(1)
}

/// One partition round through lifting, sweeping and mapping.
pub fn run_round(
    g: &SnnGraph,
    hw: &HardwareGraph,
    cfg: &FlowConfig,
    round: usize,
) -> Result<RoundOutcome, Error> {
    let constraint = cfg.crossbar_constraint(Some(hw))?;
    let opts = AnalysisOptions {
        state_budget: cfg.state_budget,
    };
    let partition = partition_round(g, &constraint, cfg.delta_min, cfg.master_seed, round)?;
    let mut sdfg = lift_to_sdfg(&partition.clustered, lift_exec_time(hw), None);
    if cfg.feedback_delay {
        sdfg = delay_feedback(&sdfg).0;
    }
    repetition_vector(&sdfg)?;
    let sweep = sweep_buffers(&sdfg, None, &cfg.sweep, &opts)?;
    let demands = cluster_demands(&partition.clustered);

    let swarm_for = |step: usize| SwarmConfig {
        seed: derive_seed(cfg.master_seed, &[SWARM_STREAM, round as u64, step as u64]),
        ..cfg.swarm.clone()
    };
    let bounded: Vec<Sdfg> = sweep
        .iter()
        .map(|p| set_buffer_allocation(&sdfg, &p.allocation))
        .collect::<Result<_, _>>()?;
    for b in &bounded {
        if let DeadlockCheck::Deadlock(r) = check_deadlock(b)? {
            return Err(SdfgError::Deadlock {
                time: 0,
                actors: r.starving.iter().map(|&a| b.actors()[a].name.clone()).collect(),
            }
            .into());
        }
    }

    let solutions: Vec<MappingSolution> = match cfg.mapping_mode {
        MappingMode::PerAllocation => bounded
            .par_iter()
            .enumerate()
            .map(|(step, b)| {
                let ctx = MappingContext::new(b, hw, Some(demands.clone()), cfg.time_wheel_factor)?
                    .with_options(opts);
                search_mapping(&ctx, &swarm_for(step))
            })
            .collect::<Result<_, MappingError>>()?,
        MappingMode::Reuse => {
            let last = bounded.len() - 1;
            let ctx = MappingContext::new(&bounded[last], hw, Some(demands.clone()), cfg.time_wheel_factor)?
                .with_options(opts);
            let best = search_mapping(&ctx, &swarm_for(last))?;
            bounded
                .par_iter()
                .enumerate()
                .map(|(step, b)| {
                    if step == last {
                        return Ok(best.clone());
                    }
                    let ctx = MappingContext::new(b, hw, Some(demands.clone()), cfg.time_wheel_factor)?
                        .with_options(opts);
                    let (schedule, throughput) = evaluate_mapping(&ctx, &best.mapping)?.ok_or_else(|| {
                        MappingError::Infeasible("reused mapping deadlocks at a smaller allocation".into())
                    })?;
                    Ok(MappingSolution {
                        mapping: best.mapping.clone(),
                        schedule,
                        throughput,
                        allocation: b.allocation(),
                        history: Vec::new(),
                        evaluations: 1,
                    })
                })
                .collect::<Result<_, MappingError>>()?
        }
    };

    Ok(RoundOutcome {
        round,
        partition,
        sdfg,
        sweep,
        solutions,
    })
}

fn round_points(r: &RoundOutcome, first_solution: usize) -> Vec<DesignPoint> {
    r.solutions
        .iter()
        .zip(&r.sweep)
        .enumerate()
        .map(|(step, (s, p))| DesignPoint {
            throughput: s.throughput.throughput,
            period_time: s.throughput.period_time,
            period_iterations: s.throughput.period_iterations,
            total_buffer: p.total_buffer,
            provenance: Provenance {
                round: r.round,
                sweep_step: step,
                solution: first_solution + step,
            },
        })
        .collect()
}

/// Run `cfg.eta` partition rounds and merge their design points.
///
/// Rounds that fail are reported in [`FlowResult::failures`]; the call
/// itself fails only when no round produced a point.
pub fn run_design_flow(g: &SnnGraph, hw: &HardwareGraph, cfg: &FlowConfig) -> Result<FlowResult, Error> {
    cfg.validate()?;
    // A neuron wider than the crossbar sinks every round the same way.
    let constraint = cfg.crossbar_constraint(Some(hw))?;
    crate::partition::init_partition(g, &constraint, 0)?;

    let outcomes: Vec<Result<RoundOutcome, Error>> = (0..cfg.eta)
        .into_par_iter()
        .map(|r| run_round(g, hw, cfg, r))
        .collect();

    let mut rounds = Vec::new();
    let mut failures = Vec::new();
    let mut points = Vec::new();
    let mut incremental = Vec::new();
    let mut running = ParetoFront::default();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                let first = points.len();
                let pts = round_points(&o, first);
                let mut merged = running.points.clone();
                merged.extend(pts.iter().cloned());
                running = pareto_filter(&merged);
                points.extend(pts);
                rounds.push(o);
            }
            Err(e) => {
                log::warn!("round {r} failed: {e}");
                failures.push(RoundFailure {
                    round: r,
                    message: e.to_string(),
                    budget_exceeded: e.is_budget_exceeded(),
                });
            }
        }
        incremental.push(running.clone());
    }

    if points.is_empty() {
        if failures.iter().any(|f| f.budget_exceeded) {
            return Err(SdfgError::BudgetExceeded(cfg.state_budget).into());
        }
        let reasons: Vec<String> = failures
            .iter()
            .map(|f| format!("round {}: {}", f.round, f.message))
            .collect();
        return Err(Error::AllRoundsInfeasible(reasons.join("; ")));
    }
    let front = pareto_filter(&points);
    debug_assert_eq!(front, running, "incremental and final fronts disagree");
    Ok(FlowResult {
        front,
        incremental,
        points,
        rounds,
        failures,
    })
}
