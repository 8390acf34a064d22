// SPDX-License-Identifier: Apache-2.0
use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::matrix::{decode_position, MappingContext, MappingMatrix};
use super::pso::{pso_step, Fitness, Swarm, SwarmConfig};
use crate::error::{MappingError, SdfgError};
use crate::sdfg::{list_schedule, self_timed_throughput_with, BufferAllocation, StaticOrderSchedule, ThroughputResult};

/// Best mapping found for one SDFG and buffer allocation.
#[derive(Debug, Clone, Serialize)]
pub struct MappingSolution {
    pub mapping: MappingMatrix,
    pub schedule: StaticOrderSchedule,
    pub throughput: ThroughputResult,
    pub allocation: BufferAllocation,
    /// Global-best throughput after initialization and after each step.
    pub history: Vec<f64>,
    /// Distinct mappings whose throughput was computed.
    pub evaluations: usize,
}

/// Per-core static orders from list scheduling the mapped graph until its
/// state recurs. Cycles are reduced to their shortest repeating form.
pub fn build_schedules(ctx: &MappingContext<'_>, m: &MappingMatrix) -> Result<StaticOrderSchedule, MappingError> {
    let platform = ctx.platform(m)?;
    let analysis = list_schedule(ctx.sdfg, &platform, &ctx.options)?;
    Ok(analysis.schedule.expect("list scheduling records orders"))
}

/// Schedule the mapping and measure throughput under those schedules.
/// `Ok(None)` when the mapped graph deadlocks.
pub fn evaluate_mapping(
    ctx: &MappingContext<'_>,
    m: &MappingMatrix,
) -> Result<Option<(StaticOrderSchedule, ThroughputResult)>, MappingError> {
    let schedule = match build_schedules(ctx, m) {
        Ok(s) => s,
        Err(MappingError::Analysis(SdfgError::Deadlock { .. })) => return Ok(None),
        Err(e) => return Err(e),
    };
    let platform = ctx.platform(m)?;
    match self_timed_throughput_with(ctx.sdfg, Some(&schedule), Some(&platform), &ctx.options) {
        Ok(r) => Ok(Some((schedule, r))),
        Err(SdfgError::Deadlock { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn fitness_of(ctx: &MappingContext<'_>, m: &MappingMatrix) -> Result<Fitness, MappingError> {
    debug_assert!(ctx.check(m).is_ok(), "decoded mapping violates a constraint");
    Ok(match evaluate_mapping(ctx, m)? {
        Some((_, r)) => Fitness {
            iterations: r.period_iterations,
            time: r.period_time,
        },
        None => Fitness::ZERO,
    })
}

/// Particle swarm search for the mapping with the highest throughput.
pub fn search_mapping(ctx: &MappingContext<'_>, cfg: &SwarmConfig) -> Result<MappingSolution, MappingError> {
    let dims = ctx.cluster_count() * ctx.core_count();
    let mut cache: HashMap<MappingMatrix, Fitness> = HashMap::new();
    let mut batch = |positions: &[Vec<f64>]| -> Result<Vec<Fitness>, MappingError> {
        let mut decoded = Vec::with_capacity(positions.len());
        for p in positions {
            match decode_position(p, ctx) {
                Ok(m) => decoded.push(Some(m)),
                Err(MappingError::Infeasible(_)) => decoded.push(None),
                Err(e) => return Err(e),
            }
        }
        let mut todo: Vec<&MappingMatrix> = Vec::new();
        for m in decoded.iter().flatten() {
            if !cache.contains_key(m) && !todo.contains(&m) {
                todo.push(m);
            }
        }
        let scores: Vec<Result<Fitness, MappingError>> = todo.par_iter().map(|m| fitness_of(ctx, m)).collect();
        for (m, s) in todo.into_iter().zip(scores) {
            cache.insert(m.clone(), s?);
        }
        Ok(decoded
            .iter()
            .map(|m| m.as_ref().map_or(Fitness::ZERO, |m| cache[m]))
            .collect())
    };

    let mut swarm = Swarm::new(dims, cfg, &mut batch)?;
    for _ in 0..cfg.iterations {
        pso_step(&mut swarm, &mut batch)?;
    }
    let evaluations = cache.len();
    if swarm.global_best.is_zero() {
        return Err(MappingError::Infeasible(
            "no feasible deadlock-free mapping was found".into(),
        ));
    }
    let mapping = decode_position(&swarm.global_best_position, ctx)?;
    let (schedule, throughput) = evaluate_mapping(ctx, &mapping)?
        .expect("the global best was evaluated as deadlock-free");
    Ok(MappingSolution {
        mapping,
        schedule,
        throughput,
        allocation: ctx.sdfg.allocation(),
        history: swarm.history.iter().map(Fitness::throughput).collect(),
        evaluations,
    })
}
