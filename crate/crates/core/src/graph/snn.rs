// SPDX-License-Identifier: Apache-2.0
use std::collections::{HashMap, HashSet};

use crate::error::GraphError;
use crate::rates::LifParams;

/// Endpoint of a synapse source: either an external input or a neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Input(usize),
    Neuron(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neuron {
    pub name: String,
    pub params: LifParams,
}

/// External spike source with a fixed number of spikes per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub name: String,
    pub spikes_per_frame: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synapse {
    pub src: NodeRef,
    /// Index of the post-synaptic neuron.
    pub dst: usize,
    pub weight: f64,
    pub spikes_per_frame: f64,
}

/// Directed graph of neurons and synapses, with external inputs as sources.
///
/// Constructed through [`SnnGraph::new`] or [`SnnGraphBuilder`], both of
/// which validate referential integrity, non-negative spike counts and the
/// absence of duplicate `(src, dst)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnGraph {
    neurons: Vec<Neuron>,
    inputs: Vec<Input>,
    synapses: Vec<Synapse>,
}

impl SnnGraph {
    pub fn new(
        neurons: Vec<Neuron>,
        inputs: Vec<Input>,
        synapses: Vec<Synapse>,
    ) -> Result<Self, GraphError> {
        let g = SnnGraph {
            neurons,
            inputs,
            synapses,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn empty() -> Self {
        SnnGraph {
            neurons: Vec::new(),
            inputs: Vec::new(),
            synapses: Vec::new(),
        }
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn neuron_index(&self, name: &str) -> Option<usize> {
        self.neurons.iter().position(|n| n.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|n| n.name == name)
    }

    pub fn node_name(&self, node: NodeRef) -> &str {
        match node {
            NodeRef::Input(i) => &self.inputs[i].name,
            NodeRef::Neuron(i) => &self.neurons[i].name,
        }
    }

    /// Sum of `spikes_per_frame` over all synapses.
    pub fn total_spikes(&self) -> f64 {
        self.synapses.iter().map(|s| s.spikes_per_frame).sum()
    }

    /// Distinct pre-synaptic sources of every neuron, sorted.
    pub fn presynaptic_sources(&self) -> Vec<Vec<NodeRef>> {
        let mut sources = vec![Vec::new(); self.neurons.len()];
        for s in &self.synapses {
            sources[s.dst].push(s.src);
        }
        for list in &mut sources {
            list.sort_unstable();
            list.dedup();
        }
        sources
    }

    /// Replace the spike count of every synapse. `rates` is indexed like
    /// [`SnnGraph::synapses`].
    pub fn with_synapse_rates(&self, rates: &[f64]) -> Result<Self, GraphError> {
        if rates.len() != self.synapses.len() {
            return Err(GraphError::invalid(
                "rates",
                format!("{} rates for {} synapses", rates.len(), self.synapses.len()),
            ));
        }
        let mut g = self.clone();
        for (s, &r) in g.synapses.iter_mut().zip(rates) {
            s.spikes_per_frame = r;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn with_input_rates(&self, rates: &[f64]) -> Result<Self, GraphError> {
        if rates.len() != self.inputs.len() {
            return Err(GraphError::invalid(
                "rates",
                format!("{} rates for {} inputs", rates.len(), self.inputs.len()),
            ));
        }
        let mut g = self.clone();
        for (i, &r) in g.inputs.iter_mut().zip(rates) {
            i.spikes_per_frame = r;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        const CTX: &str = "SNN graph";
        let mut names = HashSet::new();
        for name in self
            .neurons
            .iter()
            .map(|n| &n.name)
            .chain(self.inputs.iter().map(|i| &i.name))
        {
            if name.is_empty() {
                return Err(GraphError::invalid(CTX, "empty node id"));
            }
            if !names.insert(name.as_str()) {
                return Err(GraphError::invalid(CTX, format!("duplicate node id {name}")));
            }
        }
        for n in &self.neurons {
            n.params
                .validate()
                .map_err(|m| GraphError::invalid(CTX, format!("neuron {}: {m}", n.name)))?;
        }
        for i in &self.inputs {
            if !(i.spikes_per_frame >= 0.0 && i.spikes_per_frame.is_finite()) {
                return Err(GraphError::invalid(
                    CTX,
                    format!("input {} has negative or non-finite spikes_per_frame", i.name),
                ));
            }
        }
        let mut pairs = HashSet::new();
        for (k, s) in self.synapses.iter().enumerate() {
            let src_ok = match s.src {
                NodeRef::Input(i) => i < self.inputs.len(),
                NodeRef::Neuron(i) => i < self.neurons.len(),
            };
            if !src_ok || s.dst >= self.neurons.len() {
                return Err(GraphError::invalid(
                    CTX,
                    format!("synapse {k} references an undeclared node"),
                ));
            }
            if !(s.spikes_per_frame >= 0.0 && s.spikes_per_frame.is_finite()) {
                return Err(GraphError::invalid(
                    CTX,
                    format!(
                        "synapse {} -> {} has negative or non-finite spikes_per_frame",
                        self.node_name(s.src),
                        self.neurons[s.dst].name
                    ),
                ));
            }
            if !s.weight.is_finite() {
                return Err(GraphError::invalid(
                    CTX,
                    format!("synapse {k} has a non-finite weight"),
                ));
            }
            if !pairs.insert((s.src, s.dst)) {
                return Err(GraphError::invalid(
                    CTX,
                    format!(
                        "duplicate synapse {} -> {}",
                        self.node_name(s.src),
                        self.neurons[s.dst].name
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Incremental construction of an [`SnnGraph`] by node name.
#[derive(Debug, Default)]
pub struct SnnGraphBuilder {
    neurons: Vec<Neuron>,
    inputs: Vec<Input>,
    pending: Vec<(String, String, f64, f64)>,
}

impl SnnGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn neuron(self, name: &str) -> Self {
        self.neuron_with(name, LifParams::default())
    }

    pub fn neuron_with(mut self, name: &str, params: LifParams) -> Self {
        self.neurons.push(Neuron {
            name: name.to_string(),
            params,
        });
        self
    }

    pub fn input(mut self, name: &str, spikes_per_frame: f64) -> Self {
        self.inputs.push(Input {
            name: name.to_string(),
            spikes_per_frame,
        });
        self
    }

    pub fn synapse(mut self, src: &str, dst: &str, weight: f64, spikes_per_frame: f64) -> Self {
        self.pending
            .push((src.to_string(), dst.to_string(), weight, spikes_per_frame));
        self
    }

    pub fn build(self) -> Result<SnnGraph, GraphError> {
        let neuron_ix: HashMap<&str, usize> = self
            .neurons
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        let input_ix: HashMap<&str, usize> = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        let mut synapses = Vec::with_capacity(self.pending.len());
        for (src, dst, weight, spikes) in &self.pending {
            let src_ref = match (neuron_ix.get(src.as_str()), input_ix.get(src.as_str())) {
                (Some(&n), _) => NodeRef::Neuron(n),
                (None, Some(&i)) => NodeRef::Input(i),
                (None, None) => {
                    return Err(GraphError::invalid(
                        "SNN graph",
                        format!("synapse source {src} is not a declared neuron or input"),
                    ))
                }
            };
            let dst_ix = *neuron_ix.get(dst.as_str()).ok_or_else(|| {
                GraphError::invalid(
                    "SNN graph",
                    format!("synapse target {dst} is not a declared neuron"),
                )
            })?;
            synapses.push(Synapse {
                src: src_ref,
                dst: dst_ix,
                weight: *weight,
                spikes_per_frame: *spikes,
            });
        }
        SnnGraph::new(self.neurons, self.inputs, synapses)
    }
}
