// SPDX-License-Identifier: Apache-2.0
//! Degree and diameter statistics of an SNN graph.

use std::collections::VecDeque;

use serde::Serialize;

use super::snn::{NodeRef, SnnGraph};

/// Degree statistics and diameter over the synapse relation. Inputs count as
/// nodes. Averages are taken over the nodes that have at least one edge in
/// the respective direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub max_in_degree: f64,
    pub avg_in_degree: f64,
    pub max_out_degree: f64,
    pub avg_out_degree: f64,
    pub diameter: usize,
}

/// Node indices: inputs first, then neurons.
pub(crate) fn adjacency(g: &SnnGraph) -> Vec<Vec<usize>> {
    let offset = g.inputs().len();
    let mut adj = vec![Vec::new(); offset + g.neuron_count()];
    for s in g.synapses() {
        let src = match s.src {
            NodeRef::Input(i) => i,
            NodeRef::Neuron(i) => offset + i,
        };
        adj[src].push(offset + s.dst);
    }
    adj
}

pub fn compute_graph_stats(g: &SnnGraph) -> GraphStats {
    let adj = adjacency(g);
    let n = adj.len();
    let mut in_deg = vec![0usize; n];
    for targets in &adj {
        for &t in targets {
            in_deg[t] += 1;
        }
    }
    let out_deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let (max_in, avg_in) = degree_summary(&in_deg);
    let (max_out, avg_out) = degree_summary(&out_deg);
    GraphStats {
        max_in_degree: max_in,
        avg_in_degree: avg_in,
        max_out_degree: max_out,
        avg_out_degree: avg_out,
        diameter: diameter(&adj),
    }
}

fn degree_summary(deg: &[usize]) -> (f64, f64) {
    let nonzero: Vec<usize> = deg.iter().copied().filter(|&d| d > 0).collect();
    if nonzero.is_empty() {
        return (0.0, 0.0);
    }
    let max = *nonzero.iter().max().unwrap_or(&0) as f64;
    let avg = nonzero.iter().sum::<usize>() as f64 / nonzero.len() as f64;
    (max, avg)
}

/// Longest finite directed shortest path inside the largest weakly connected
/// component (ties go to the component containing the lowest node index).
fn diameter(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let comp = weak_components(adj);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    // components are numbered in order of their lowest node
    let largest = (0..count)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .unwrap_or(0);

    let mut best = 0;
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for start in (0..n).filter(|&v| comp[v] == largest) {
        dist.fill(usize::MAX);
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            best = best.max(dist[u]);
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    best
}

fn weak_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut undirected = vec![Vec::new(); n];
    for (u, targets) in adj.iter().enumerate() {
        for &v in targets {
            undirected[u].push(v);
            undirected[v].push(u);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = next;
        while let Some(u) = stack.pop() {
            for &v in &undirected[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}
