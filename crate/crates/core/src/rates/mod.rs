// SPDX-License-Identifier: Apache-2.0
//! Spike-rate estimation: a discrete-time LIF/CUBA simulator that turns
//! representative input frames into per-synapse token counts.

mod estimate;
mod lif;
mod trains;

pub use estimate::{estimate_rates, estimate_rates_from_graph, mean_counts, simulate_frame};
pub use lif::{step_neuron, synaptic_current, LifParams};
pub use trains::{
    load_spike_trains, parse_spike_trains, spike_trains_to_string, FrameInputs, SpikeTrain,
};
