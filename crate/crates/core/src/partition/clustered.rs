// SPDX-License-Identifier: Apache-2.0
//! Clustered SNN graph: clusters as nodes, cut synapses folded into edges.
//!
//! Dump format (same family as the SNN graph file):
//!
//! ```toml
//! format_version = 1
//!
//! [[cluster]]
//! id = "C0"
//! neurons = ["N1", "N2", "N4"]
//! presynaptic = 5
//! internal_tokens = 4
//! input_tokens = 12
//!
//! [[edge]]
//! src = "C0"
//! dst = "C1"
//! tokens = 5
//! synapses = 2
//!
//! [[input_edge]]
//! input = "A"
//! cluster = "C0"
//! tokens = 5
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{CrossbarConstraint, Partition};
use crate::error::GraphError;
use crate::graph::{parse_versioned, read_file, to_toml, with_path, NodeRef, SnnGraph, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub name: String,
    pub neurons: Vec<String>,
    /// Distinct pre-synaptic sources feeding the cluster's crossbar.
    pub presynaptic: usize,
    /// Spike tokens on synapses absorbed inside the cluster.
    pub internal_tokens: u64,
    /// Spike tokens arriving from external inputs.
    pub input_tokens: u64,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.neurons.len()
    }
}

/// Directed edge between two clusters carrying one frame's worth of tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterEdge {
    pub src: usize,
    pub dst: usize,
    pub tokens: u64,
    /// Number of cut synapses folded into this edge.
    pub synapses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputEdge {
    pub input: String,
    pub cluster: usize,
    pub tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteredSnnGraph {
    pub clusters: Vec<Cluster>,
    pub edges: Vec<ClusterEdge>,
    pub inputs: Vec<InputEdge>,
}

impl ClusteredSnnGraph {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Tokens on inter-cluster edges plus tokens absorbed in clusters plus
    /// tokens from inputs.
    pub fn total_tokens(&self) -> u64 {
        self.edges.iter().map(|e| e.tokens).sum::<u64>()
            + self.clusters.iter().map(|c| c.internal_tokens + c.input_tokens).sum::<u64>()
    }

    pub fn cut_tokens(&self) -> u64 {
        self.edges.iter().map(|e| e.tokens).sum()
    }
}

fn tokens(spikes: f64) -> u64 {
    spikes.round().max(0.0) as u64
}

/// Fold `p` into a clustered graph. Empty clusters are dropped and the rest
/// renumbered in index order; cluster `k` is named `C{k}`.
pub fn build_clustered_graph(
    g: &SnnGraph,
    p: &Partition,
    constraint: &CrossbarConstraint,
) -> ClusteredSnnGraph {
    let sizes = p.cluster_sizes();
    let mut renumber = vec![usize::MAX; p.cluster_count()];
    let mut next = 0;
    for (c, &size) in sizes.iter().enumerate() {
        if size > 0 {
            renumber[c] = next;
            next += 1;
        }
    }
    let cluster_of = |n: usize| renumber[p.cluster_of(n)];

    let mut members: Vec<Vec<String>> = vec![Vec::new(); next];
    for (n, neuron) in g.neurons().iter().enumerate() {
        members[cluster_of(n)].push(neuron.name.clone());
    }
    let fan_in = constraint.fan_in(g);
    let mut pre: Vec<Vec<NodeRef>> = vec![Vec::new(); next];
    for (n, sources) in fan_in.into_iter().enumerate() {
        pre[cluster_of(n)].extend(sources);
    }

    let mut internal = vec![0.0f64; next];
    let mut from_inputs = vec![0.0f64; next];
    let mut cut: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut input_edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for s in g.synapses() {
        let dst = cluster_of(s.dst);
        match s.src {
            NodeRef::Input(i) => {
                from_inputs[dst] += s.spikes_per_frame;
                *input_edges.entry((i, dst)).or_insert(0.0) += s.spikes_per_frame;
            }
            NodeRef::Neuron(src) => {
                let src = cluster_of(src);
                if src == dst {
                    internal[dst] += s.spikes_per_frame;
                } else {
                    let e = cut.entry((src, dst)).or_insert((0.0, 0));
                    e.0 += s.spikes_per_frame;
                    e.1 += 1;
                }
            }
        }
    }

    let clusters = (0..next)
        .map(|c| {
            let mut sources = std::mem::take(&mut pre[c]);
            sources.sort_unstable();
            sources.dedup();
            Cluster {
                name: format!("C{c}"),
                neurons: std::mem::take(&mut members[c]),
                presynaptic: sources.len(),
                internal_tokens: tokens(internal[c]),
                input_tokens: tokens(from_inputs[c]),
            }
        })
        .collect();
    let edges = cut
        .into_iter()
        .map(|((src, dst), (spikes, synapses))| ClusterEdge {
            src,
            dst,
            tokens: tokens(spikes),
            synapses,
        })
        .collect();
    let inputs = input_edges
        .into_iter()
        .map(|((i, cluster), spikes)| InputEdge {
            input: g.inputs()[i].name.clone(),
            cluster,
            tokens: tokens(spikes),
        })
        .collect();
    ClusteredSnnGraph {
        clusters,
        edges,
        inputs,
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusteredFile {
    format_version: u32,
    #[serde(default, rename = "cluster")]
    clusters: Vec<ClusterRecord>,
    #[serde(default, rename = "edge")]
    edges: Vec<EdgeRecord>,
    #[serde(default, rename = "input_edge")]
    inputs: Vec<InputEdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterRecord {
    id: String,
    neurons: Vec<String>,
    presynaptic: usize,
    #[serde(default)]
    internal_tokens: u64,
    #[serde(default)]
    input_tokens: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    src: String,
    dst: String,
    tokens: u64,
    #[serde(default = "one")]
    synapses: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputEdgeRecord {
    input: String,
    cluster: String,
    tokens: u64,
}

pub fn clustered_graph_to_string(cg: &ClusteredSnnGraph) -> String {
    let name = |c: usize| cg.clusters[c].name.clone();
    let doc = ClusteredFile {
        format_version: FORMAT_VERSION,
        clusters: cg
            .clusters
            .iter()
            .map(|c| ClusterRecord {
                id: c.name.clone(),
                neurons: c.neurons.clone(),
                presynaptic: c.presynaptic,
                internal_tokens: c.internal_tokens,
                input_tokens: c.input_tokens,
            })
            .collect(),
        edges: cg
            .edges
            .iter()
            .map(|e| EdgeRecord {
                src: name(e.src),
                dst: name(e.dst),
                tokens: e.tokens,
                synapses: e.synapses,
            })
            .collect(),
        inputs: cg
            .inputs
            .iter()
            .map(|i| InputEdgeRecord {
                input: i.input.clone(),
                cluster: name(i.cluster),
                tokens: i.tokens,
            })
            .collect(),
    };
    to_toml(&doc)
}

pub fn parse_clustered_graph(text: &str) -> Result<ClusteredSnnGraph, GraphError> {
    const CTX: &str = "clustered graph";
    let doc: ClusteredFile = parse_versioned(text, CTX, |d: &ClusteredFile| d.format_version)?;
    let mut index = HashMap::new();
    for (i, c) in doc.clusters.iter().enumerate() {
        if index.insert(c.id.as_str(), i).is_some() {
            return Err(GraphError::invalid(CTX, format!("duplicate cluster id {}", c.id)));
        }
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::invalid(CTX, format!("undeclared cluster {name}")))
    };
    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let (src, dst) = (lookup(&e.src)?, lookup(&e.dst)?);
        if src == dst {
            return Err(GraphError::invalid(CTX, format!("edge {} -> {} is a self-loop", e.src, e.dst)));
        }
        edges.push(ClusterEdge {
            src,
            dst,
            tokens: e.tokens,
            synapses: e.synapses,
        });
    }
    let inputs = doc
        .inputs
        .iter()
        .map(|i| {
            Ok(InputEdge {
                input: i.input.clone(),
                cluster: lookup(&i.cluster)?,
                tokens: i.tokens,
            })
        })
        .collect::<Result<_, GraphError>>()?;
    let clusters = doc
        .clusters
        .into_iter()
        .map(|c| Cluster {
            name: c.id,
            neurons: c.neurons,
            presynaptic: c.presynaptic,
            internal_tokens: c.internal_tokens,
            input_tokens: c.input_tokens,
        })
        .collect();
    Ok(ClusteredSnnGraph {
        clusters,
        edges,
        inputs,
    })
}

pub fn load_clustered_graph(path: impl AsRef<Path>) -> Result<ClusteredSnnGraph, GraphError> {
    let path = path.as_ref();
    parse_clustered_graph(&read_file(path)?).map_err(|e| with_path(e, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SnnGraphBuilder;

    #[test]
    fn single_cluster_has_no_edges() {
        let g = SnnGraphBuilder::new()
            .neuron("a")
            .neuron("b")
            .synapse("a", "b", 1.0, 3.0)
            .build()
            .unwrap();
        let p = Partition::new(vec![0, 0], 1).unwrap();
        let cg = build_clustered_graph(&g, &p, &CrossbarConstraint::new(2));
        assert_eq!(cg.cluster_count(), 1);
        assert!(cg.edges.is_empty());
        assert_eq!(cg.clusters[0].internal_tokens, 3);
    }

    #[test]
    fn empty_clusters_are_dropped() {
        let g = SnnGraphBuilder::new()
            .neuron("a")
            .neuron("b")
            .synapse("a", "b", 1.0, 3.0)
            .build()
            .unwrap();
        let p = Partition::new(vec![0, 2], 3).unwrap();
        let cg = build_clustered_graph(&g, &p, &CrossbarConstraint::new(2));
        assert_eq!(cg.cluster_count(), 2);
        assert_eq!(
            cg.edges,
            vec![ClusterEdge {
                src: 0,
                dst: 1,
                tokens: 3,
                synapses: 1
            }]
        );
    }

    #[test]
    fn dump_round_trips() {
        let g = SnnGraphBuilder::new()
            .input("x", 4.0)
            .neuron("a")
            .neuron("b")
            .neuron("c")
            .synapse("x", "a", 1.0, 4.0)
            .synapse("a", "b", 1.0, 3.0)
            .synapse("b", "c", 1.0, 2.0)
            .build()
            .unwrap();
        let p = Partition::new(vec![0, 0, 1], 2).unwrap();
        let cg = build_clustered_graph(&g, &p, &CrossbarConstraint::new(2));
        let back = parse_clustered_graph(&clustered_graph_to_string(&cg)).unwrap();
        assert_eq!(cg, back);
    }
}
