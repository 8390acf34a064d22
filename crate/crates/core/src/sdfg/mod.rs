// SPDX-License-Identifier: Apache-2.0
//! Synchronous dataflow graphs: consistency, deadlock and throughput.

mod deadlock;
mod engine;
mod format;
mod graph;
mod repetition;
mod throughput;

pub use deadlock::{check_deadlock, DeadlockCheck, DeadlockReport};
pub use format::{load_sdfg, parse_sdfg, sdfg_to_string};
pub use graph::{delay_feedback, lift_to_sdfg, set_buffer_allocation, Actor, BufferAllocation, Channel, Sdfg};
pub use repetition::{repetition_vector, RepetitionVector};
pub use throughput::{
    analyze_blocking, list_schedule, self_timed_throughput, self_timed_throughput_with, Analysis,
    AnalysisOptions, CoreSchedule, Platform, StaticOrderSchedule, ThroughputResult,
    DEFAULT_STATE_BUDGET,
};
