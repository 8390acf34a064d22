// SPDX-License-Identifier: Apache-2.0
use rayon::prelude::*;

use super::clustered::{build_clustered_graph, ClusteredSnnGraph};
use super::kl::{kl_refine_traced, KlTrace};
use super::matrix::{check_feasible, init_partition, CrossbarConstraint, Partition};
use crate::error::PartitionError;
use crate::graph::SnnGraph;
use crate::seed::derive_seed;

/// Stream tag for partition-round seeds.
pub(crate) const PARTITION_STREAM: u64 = 1;

/// Outcome of one random-init + refinement round.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRound {
    pub round: usize,
    pub seed: u64,
    pub partition: Partition,
    pub trace: KlTrace,
    pub clustered: ClusteredSnnGraph,
}

pub fn round_seed(master_seed: u64, round: usize) -> u64 {
    derive_seed(master_seed, &[PARTITION_STREAM, round as u64])
}

/// Run a single round with the seed derived for `round`.
pub fn partition_round(
    g: &SnnGraph,
    constraint: &CrossbarConstraint,
    delta_min: f64,
    master_seed: u64,
    round: usize,
) -> Result<PartitionRound, PartitionError> {
    let seed = round_seed(master_seed, round);
    let init = init_partition(g, constraint, seed)?;
    let (partition, trace) = kl_refine_traced(g, &init, constraint, delta_min)?;
    let clustered = build_clustered_graph(g, &partition, constraint);
    Ok(PartitionRound {
        round,
        seed,
        partition,
        trace,
        clustered,
    })
}

/// `eta` independent partition rounds. Round `r` depends only on
/// `(master_seed, r)`, so a run with a larger `eta` extends a smaller one.
pub fn iterate_partitions(
    g: &SnnGraph,
    constraint: &CrossbarConstraint,
    eta: usize,
    delta_min: f64,
    master_seed: u64,
) -> Result<Vec<PartitionRound>, PartitionError> {
    if eta == 0 {
        return Err(PartitionError::ZeroRounds);
    }
    check_feasible(g, constraint)?;
    (0..eta)
        .into_par_iter()
        .map(|r| partition_round(g, constraint, delta_min, master_seed, r))
        .collect()
}
