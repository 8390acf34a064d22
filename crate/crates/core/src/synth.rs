// SPDX-License-Identifier: Apache-2.0
//! Small hand-built networks and a seeded layered-network generator, used
//! by the test suites and handy for trying the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{HardwareGraph, SnnGraph, SnnGraphBuilder};
use crate::partition::Partition;

/// Eight neurons fed by five inputs. N3 emits 6 spikes per frame after
/// receiving 2 from N2 and 11 from input B.
pub fn example_network() -> SnnGraph {
    let inputs = [("A", 5.0), ("B", 11.0), ("C", 7.0), ("D", 3.0), ("E", 9.0)];
    let outputs = [
        ("N1", 4.0),
        ("N2", 2.0),
        ("N3", 6.0),
        ("N4", 3.0),
        ("N5", 5.0),
        ("N6", 1.0),
        ("N7", 2.0),
        ("N8", 4.0),
    ];
    let edges = [
        ("A", "N1"),
        ("B", "N3"),
        ("C", "N2"),
        ("D", "N5"),
        ("E", "N5"),
        ("E", "N6"),
        ("N1", "N4"),
        ("N2", "N3"),
        ("N2", "N4"),
        ("N3", "N7"),
        ("N4", "N7"),
        ("N5", "N6"),
        ("N5", "N8"),
        ("N6", "N8"),
        ("N3", "N8"),
    ];
    let rate = |name: &str| {
        inputs
            .iter()
            .chain(outputs.iter())
            .find(|(n, _)| *n == name)
            .map(|&(_, r)| r)
            .expect("known node")
    };
    let mut b = SnnGraphBuilder::new();
    for (name, r) in inputs {
        b = b.input(name, r);
    }
    for (name, _) in outputs {
        b = b.neuron(name);
    }
    for (src, dst) in edges {
        b = b.synapse(src, dst, 1e-11, rate(src));
    }
    b.build().expect("example network is valid")
}

/// Three clusters for [`example_network`]: {N1, N2, N4}, {N3, N7} and
/// {N5, N6, N8}.
pub fn example_partition() -> Partition {
    Partition::new(vec![0, 0, 1, 0, 2, 2, 1, 2], 3).expect("valid assignment")
}

/// Shape of a generated feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredParams {
    /// Neuron count of each layer, first layer first.
    pub layers: Vec<usize>,
    pub inputs: usize,
    /// Sources drawn for every neuron.
    pub fan_in: usize,
    /// Sources are drawn from this many positions around the neuron's
    /// relative position in the previous layer.
    pub window: usize,
    /// Per-frame spike counts are drawn from `1..=max_rate`.
    pub max_rate: u32,
    pub seed: u64,
}

impl Default for LayeredParams {
    fn default() -> Self {
        LayeredParams {
            layers: vec![40; 5],
            inputs: 20,
            fan_in: 3,
            window: 6,
            max_rate: 8,
            seed: 0,
        }
    }
}

/// Feed-forward network with local receptive fields. Equal parameters give
/// equal graphs.
pub fn layered_network(params: &LayeredParams) -> SnnGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = SnnGraphBuilder::new();
    let mut prev: Vec<(String, f64)> = Vec::new();
    for i in 0..params.inputs {
        let r = f64::from(rng.gen_range(1..=params.max_rate));
        let name = format!("in{i}");
        b = b.input(&name, r);
        prev.push((name, r));
    }
    for (l, &width) in params.layers.iter().enumerate() {
        let mut layer = Vec::with_capacity(width);
        for j in 0..width {
            let name = format!("L{l}_{j}");
            b = b.neuron(&name);
            let centre = if width > 1 {
                j * (prev.len().saturating_sub(1)) / (width - 1)
            } else {
                0
            };
            let lo = centre.saturating_sub(params.window / 2);
            let hi = (lo + params.window.max(1)).min(prev.len());
            let lo = hi.saturating_sub(params.window.max(1));
            let mut picked: Vec<usize> = Vec::new();
            for _ in 0..params.fan_in.min(hi - lo) {
                let mut s = rng.gen_range(lo..hi);
                while picked.contains(&s) {
                    s = if s + 1 < hi { s + 1 } else { lo };
                }
                picked.push(s);
            }
            picked.sort_unstable();
            for s in picked {
                let (src, r) = &prev[s];
                b = b.synapse(src, &name, 1e-11, *r);
            }
            layer.push((name, f64::from(rng.gen_range(1..=params.max_rate))));
        }
        prev = layer;
    }
    b.build().expect("generated network is valid")
}

/// `rows x cols` mesh of identical cores with unit-hop links in both
/// directions.
pub fn mesh_hardware(rows: usize, cols: usize, crossbar_dim: usize, exec_time: u64, hop_latency: u64) -> HardwareGraph {
    use crate::graph::{Core, Link};
    let id = |r: usize, c: usize| r * cols + c;
    let cores = (0..rows * cols)
        .map(|i| Core::new(format!("T{i}"), crossbar_dim, exec_time))
        .collect();
    let mut links = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push(Link { src: id(r, c), dst: id(r, c + 1), latency: hop_latency });
                links.push(Link { src: id(r, c + 1), dst: id(r, c), latency: hop_latency });
            }
            if r + 1 < rows {
                links.push(Link { src: id(r, c), dst: id(r + 1, c), latency: hop_latency });
                links.push(Link { src: id(r + 1, c), dst: id(r, c), latency: hop_latency });
            }
        }
    }
    HardwareGraph::new(cores, links).expect("mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRef;

    #[test]
    fn n3_tokens() {
        let g = example_network();
        let n3 = g.neuron_index("N3").unwrap();
        let incoming: f64 = g
            .synapses()
            .iter()
            .filter(|s| s.dst == n3)
            .map(|s| s.spikes_per_frame)
            .sum();
        assert_eq!(incoming, 13.0);
        let out = g
            .synapses()
            .iter()
            .find(|s| s.src == NodeRef::Neuron(n3))
            .unwrap();
        assert_eq!(out.spikes_per_frame, 6.0);
        assert_eq!(example_partition().cluster_count(), 3);
    }

    #[test]
    fn layered_is_deterministic() {
        let params = LayeredParams::default();
        let g = layered_network(&params);
        assert_eq!(g, layered_network(&params));
        assert_eq!(g.neuron_count(), 200);
        assert_eq!(g.synapses().len(), 200 * 3);
    }

    #[test]
    fn mesh_links() {
        let hw = mesh_hardware(2, 2, 16, 1, 1);
        assert_eq!(hw.links().len(), 8);
    }
}
