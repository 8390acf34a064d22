// SPDX-License-Identifier: Apache-2.0
//! Pairwise-swap Kernighan-Lin refinement under crossbar limits.

use std::collections::HashMap;

use super::matrix::{communication_cost, CrossbarConstraint, Partition};
use crate::error::PartitionError;
use crate::graph::{NodeRef, SnnGraph};

/// A swap must lower the cut by more than this to be accepted.
pub const SWAP_TOLERANCE: f64 = 1e-9;

/// Record of one refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct KlTrace {
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Cost reduction achieved by each full sweep over all neuron pairs.
    pub sweep_improvements: Vec<f64>,
    /// Accepted swaps, in order.
    pub swaps: Vec<(usize, usize)>,
}

/// Per-cluster multiset of pre-synaptic sources.
struct FanInTable {
    counts: Vec<HashMap<NodeRef, u32>>,
}

impl FanInTable {
    fn new(p: &Partition, fan_in: &[Vec<NodeRef>]) -> Self {
        let mut counts = vec![HashMap::new(); p.cluster_count()];
        for (n, sources) in fan_in.iter().enumerate() {
            for &s in sources {
                *counts[p.cluster_of(n)].entry(s).or_insert(0) += 1;
            }
        }
        FanInTable { counts }
    }

    /// Distinct sources of `cluster` after replacing member `out` by `inc`.
    fn distinct_after(&self, cluster: usize, out: &[NodeRef], inc: &[NodeRef]) -> usize {
        let map = &self.counts[cluster];
        let mut distinct = map.len();
        for s in out {
            if map.get(s) == Some(&1) && inc.binary_search(s).is_err() {
                distinct -= 1;
            }
        }
        distinct += inc.iter().filter(|s| !map.contains_key(s)).count();
        distinct
    }

    fn apply(&mut self, cluster: usize, out: &[NodeRef], inc: &[NodeRef]) {
        let map = &mut self.counts[cluster];
        for s in out {
            let c = map.get_mut(s).expect("source present");
            *c -= 1;
            if *c == 0 {
                map.remove(s);
            }
        }
        for &s in inc {
            *map.entry(s).or_insert(0) += 1;
        }
    }
}

/// Refine `p` by swapping neuron pairs from different clusters.
///
/// Pairs are scanned in index order. A swap is kept only if both affected
/// clusters still satisfy the crossbar limits and the cut strictly drops.
/// Sweeps repeat while the per-sweep improvement exceeds `delta_min`.
pub fn kl_refine(
    g: &SnnGraph,
    p: &Partition,
    constraint: &CrossbarConstraint,
    delta_min: f64,
) -> Result<Partition, PartitionError> {
    kl_refine_traced(g, p, constraint, delta_min).map(|(p, _)| p)
}

pub fn kl_refine_traced(
    g: &SnnGraph,
    p: &Partition,
    constraint: &CrossbarConstraint,
    delta_min: f64,
) -> Result<(Partition, KlTrace), PartitionError> {
    p.check(g, constraint).map_err(PartitionError::Mismatch)?;
    let fan_in = constraint.fan_in(g);
    let n = g.neuron_count();
    let m = constraint.crossbar_dim;

    // undirected neuron-neuron incidence with spike weights
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for s in g.synapses() {
        if let NodeRef::Neuron(src) = s.src {
            if src != s.dst {
                incident[src].push((s.dst, s.spikes_per_frame));
                incident[s.dst].push((src, s.spikes_per_frame));
            }
        }
    }

    let mut part = p.clone();
    let sizes = part.cluster_sizes();
    let mut table = FanInTable::new(&part, &fan_in);
    let mut cost = communication_cost(g, &part);
    let mut trace = KlTrace {
        initial_cost: cost,
        final_cost: cost,
        sweep_improvements: Vec::new(),
        swaps: Vec::new(),
    };

    let mut delta = f64::INFINITY;
    while delta > delta_min {
        let sweep_start = cost;
        for i in 0..n {
            for j in (i + 1)..n {
                let k = part.cluster_of(i);
                let l = part.cluster_of(j);
                if k == l {
                    continue;
                }
                let gain = swap_delta(&part, &incident, i, j);
                if gain >= -SWAP_TOLERANCE {
                    continue;
                }
                // swaps keep cluster sizes, the size check is kept for
                // completeness of the crossbar rule
                if sizes[k] > m || sizes[l] > m {
                    continue;
                }
                if table.distinct_after(k, &fan_in[i], &fan_in[j]) > m
                    || table.distinct_after(l, &fan_in[j], &fan_in[i]) > m
                {
                    continue;
                }
                table.apply(k, &fan_in[i], &fan_in[j]);
                table.apply(l, &fan_in[j], &fan_in[i]);
                part.swap(i, j);
                trace.swaps.push((i, j));
            }
        }
        // resynchronise with an exact recount to avoid drift
        cost = communication_cost(g, &part);
        delta = sweep_start - cost;
        trace.sweep_improvements.push(delta);
    }
    trace.final_cost = cost;
    Ok((part, trace))
}

/// Change of the cut if neurons `i` and `j` exchange clusters.
fn swap_delta(p: &Partition, incident: &[Vec<(usize, f64)>], i: usize, j: usize) -> f64 {
    let ci = p.cluster_of(i);
    let cj = p.cluster_of(j);
    let moved = |v: usize| -> usize {
        if v == i {
            cj
        } else if v == j {
            ci
        } else {
            p.cluster_of(v)
        }
    };
    let mut delta = 0.0;
    for &(v, w) in &incident[i] {
        let before = (ci != p.cluster_of(v)) as u8 as f64;
        let after = (cj != moved(v)) as u8 as f64;
        delta += w * (after - before);
    }
    for &(v, w) in &incident[j] {
        if v == i {
            continue;
        }
        let before = (cj != p.cluster_of(v)) as u8 as f64;
        let after = (ci != moved(v)) as u8 as f64;
        delta += w * (after - before);
    }
    delta
}
