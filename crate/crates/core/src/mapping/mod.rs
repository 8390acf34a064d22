// SPDX-License-Identifier: Apache-2.0
//! Cluster-to-core mapping by particle swarm, with static-order schedules
//! built by list scheduling.

mod matrix;
mod pso;
mod search;

pub use matrix::{
    cluster_demands, decode_position, ClusterDemand, MappingContext, MappingMatrix,
    DEFAULT_TIME_WHEEL_FACTOR,
};
pub use pso::{pso_step, BatchFitness, Fitness, Particle, Swarm, SwarmConfig};
pub use search::{build_schedules, evaluate_mapping, search_mapping, MappingSolution};
pub use crate::sdfg::{CoreSchedule, StaticOrderSchedule};
