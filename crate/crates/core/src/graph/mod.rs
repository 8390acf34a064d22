// SPDX-License-Identifier: Apache-2.0
//! SNN and hardware graphs, their file formats and descriptive statistics.

mod format;
mod hardware;
mod snn;
mod stats;

pub use format::{
    hardware_graph_to_string, load_hardware_graph, load_snn_graph, parse_hardware_graph,
    parse_snn_graph, snn_graph_to_string, FORMAT_VERSION,
};
pub(crate) use format::{parse_versioned, read_file, to_toml, with_path};
pub use hardware::{Core, HardwareGraph, Link};
pub use snn::{Input, Neuron, NodeRef, SnnGraph, SnnGraphBuilder, Synapse};
pub use stats::{compute_graph_stats, GraphStats};
