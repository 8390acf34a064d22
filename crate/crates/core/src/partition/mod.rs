// SPDX-License-Identifier: Apache-2.0
//! Iterative crossbar-constrained partitioning of an SNN into clusters.

mod clustered;
mod kl;
mod matrix;
mod rounds;

pub use clustered::{
    build_clustered_graph, clustered_graph_to_string, load_clustered_graph, parse_clustered_graph,
    Cluster, ClusterEdge, ClusteredSnnGraph, InputEdge,
};
pub use kl::{kl_refine, kl_refine_traced, KlTrace, SWAP_TOLERANCE};
pub use matrix::{communication_cost, init_partition, CrossbarConstraint, Partition};
pub use rounds::{iterate_partitions, partition_round, round_seed, PartitionRound};
