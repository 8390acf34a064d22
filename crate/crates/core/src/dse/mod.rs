// SPDX-License-Identifier: Apache-2.0
//! Design-space exploration over partitions, buffer sizes and mappings.

mod flow;
mod pareto;
mod sweep;

pub use flow::{
    lift_exec_time, run_design_flow, run_round, FlowConfig, FlowResult, MappingMode, RoundFailure,
    RoundOutcome,
};
pub use pareto::{min_buffer_for_throughput, pareto_filter, DesignPoint, ParetoFront, Provenance};
pub use sweep::{minimum_allocation, sweep_buffers, SweepConfig, SweepPoint, EXHAUSTIVE_CHANNEL_LIMIT};
