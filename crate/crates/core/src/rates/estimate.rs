// SPDX-License-Identifier: Apache-2.0
//! Per-synapse spike counts from simulating representative frames.

use rayon::prelude::*;

use super::lif::{step_neuron, synaptic_current, LifParams};
use super::trains::FrameInputs;
use crate::error::RateError;
use crate::graph::{NodeRef, SnnGraph};

/// Output spike count of every neuron over one frame.
///
/// Spikes emitted by a neuron during step `k` reach their targets in step
/// `k + 1`; input spikes act in the step they fall into. Every neuron starts
/// the frame at rest.
#[allow(clippy::needless_range_loop)]
pub fn simulate_frame(
    g: &SnnGraph,
    params: &[LifParams],
    frame: &FrameInputs,
    frame_index: usize,
) -> Result<Vec<u32>, RateError> {
    let dt = common_dt(g, params)?;
    if !(frame.frame_length >= 0.0 && frame.frame_length.is_finite()) {
        return Err(RateError::InvalidTrain(format!(
            "frame length {} is not a non-negative number",
            frame.frame_length
        )));
    }
    for name in frame.trains.keys() {
        if g.input_index(name).is_none() {
            return Err(RateError::UnknownInput(name.clone()));
        }
    }
    let mut trains = Vec::with_capacity(g.inputs().len());
    for input in g.inputs() {
        let train = frame.get(&input.name).ok_or_else(|| RateError::UnassignedInput {
            input: input.name.clone(),
            frame: frame_index,
        })?;
        trains.push(train);
    }
    let steps = (frame.frame_length / dt - 1e-9).ceil().max(0.0) as usize;
    let binned: Vec<Vec<u32>> = trains.iter().map(|t| t.binned(dt, steps)).collect();

    let n = g.neuron_count();
    let mut incoming: Vec<Vec<(NodeRef, f64)>> = vec![Vec::new(); n];
    for s in g.synapses() {
        incoming[s.dst].push((s.src, s.weight));
    }

    let mut voltage: Vec<f64> = params.iter().map(|p| p.v_rest).collect();
    let mut fired_prev = vec![false; n];
    let mut fired_now = vec![false; n];
    let mut counts = vec![0u32; n];
    for k in 0..steps {
        for j in 0..n {
            let current = synaptic_current(
                incoming[j].iter().map(|&(src, w)| match src {
                    NodeRef::Input(i) => (binned[i][k], w),
                    NodeRef::Neuron(i) => (u32::from(fired_prev[i]), w),
                }),
                dt,
            );
            let (v, fired) = step_neuron(voltage[j], &params[j], current);
            voltage[j] = v;
            fired_now[j] = fired;
            if fired {
                counts[j] += 1;
            }
        }
        std::mem::swap(&mut fired_prev, &mut fired_now);
    }
    Ok(counts)
}

fn common_dt(g: &SnnGraph, params: &[LifParams]) -> Result<f64, RateError> {
    if params.len() != g.neuron_count() {
        return Err(RateError::InvalidParams {
            neuron: "*".into(),
            message: format!("{} parameter sets for {} neurons", params.len(), g.neuron_count()),
        });
    }
    for (n, p) in g.neurons().iter().zip(params) {
        p.validate().map_err(|message| RateError::InvalidParams {
            neuron: n.name.clone(),
            message,
        })?;
    }
    let dt = params.first().map_or(LifParams::default().dt, |p| p.dt);
    if let Some((n, p)) = g.neurons().iter().zip(params).find(|(_, p)| p.dt != dt) {
        return Err(RateError::InvalidParams {
            neuron: n.name.clone(),
            message: format!("integration step {} differs from {dt}", p.dt),
        });
    }
    Ok(dt)
}

/// Mean spikes per frame of every neuron and every input, unrounded.
pub fn mean_counts(
    g: &SnnGraph,
    params: &[LifParams],
    frames: &[FrameInputs],
) -> Result<(Vec<f64>, Vec<f64>), RateError> {
    let per_frame: Vec<Vec<u32>> = frames
        .par_iter()
        .enumerate()
        .map(|(k, f)| simulate_frame(g, params, f, k))
        .collect::<Result<_, _>>()?;
    let denom = frames.len().max(1) as f64;
    let mut neuron_mean = vec![0.0; g.neuron_count()];
    for counts in &per_frame {
        for (m, &c) in neuron_mean.iter_mut().zip(counts) {
            *m += f64::from(c);
        }
    }
    neuron_mean.iter_mut().for_each(|m| *m /= denom);
    let input_mean = g
        .inputs()
        .iter()
        .map(|i| {
            frames
                .iter()
                .map(|f| f.get(&i.name).map_or(0, |t| t.len()) as f64)
                .sum::<f64>()
                / denom
        })
        .collect();
    Ok((neuron_mean, input_mean))
}

/// Returns `g` with every synapse carrying the rounded mean spike count of
/// its source per frame, and every input carrying its rounded mean count.
pub fn estimate_rates(
    g: &SnnGraph,
    params: &[LifParams],
    frames: &[FrameInputs],
) -> Result<SnnGraph, RateError> {
    let (neuron_mean, input_mean) = mean_counts(g, params, frames)?;
    let tokens = |x: f64| x.round().max(0.0);
    let rates: Vec<f64> = g
        .synapses()
        .iter()
        .map(|s| match s.src {
            NodeRef::Input(i) => tokens(input_mean[i]),
            NodeRef::Neuron(i) => tokens(neuron_mean[i]),
        })
        .collect();
    let input_rates: Vec<f64> = input_mean.iter().map(|&m| tokens(m)).collect();
    let out = g
        .with_synapse_rates(&rates)
        .and_then(|g| g.with_input_rates(&input_rates))
        .expect("estimated rates are finite and non-negative");
    Ok(out)
}

/// [`estimate_rates`] using the LIF parameters stored on the graph.
pub fn estimate_rates_from_graph(
    g: &SnnGraph,
    frames: &[FrameInputs],
) -> Result<SnnGraph, RateError> {
    let params: Vec<LifParams> = g.neurons().iter().map(|n| n.params).collect();
    estimate_rates(g, &params, frames)
}
