// SPDX-License-Identifier: Apache-2.0
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::PartitionError;
use crate::graph::{NodeRef, SnnGraph};

/// Crossbar capacity a cluster must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossbarConstraint {
    /// `M`: maximum post-synaptic neurons and distinct pre-synaptic sources.
    pub crossbar_dim: usize,
    /// Whether external inputs occupy pre-synaptic rows.
    pub count_inputs: bool,
}

impl CrossbarConstraint {
    pub fn new(crossbar_dim: usize) -> Self {
        CrossbarConstraint {
            crossbar_dim,
            count_inputs: true,
        }
    }

    /// Distinct pre-synaptic sources of each neuron that count against `M`.
    pub(crate) fn fan_in(&self, g: &SnnGraph) -> Vec<Vec<NodeRef>> {
        let mut sources = g.presynaptic_sources();
        if !self.count_inputs {
            for s in &mut sources {
                s.retain(|n| matches!(n, NodeRef::Neuron(_)));
            }
        }
        sources
    }
}

/// Neuron-to-cluster assignment (row `i` of the binary partition matrix has
/// its single one at column `assignment[i]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    cluster_count: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, cluster_count: usize) -> Result<Self, PartitionError> {
        if let Some(&c) = assignment.iter().find(|&&c| c >= cluster_count) {
            return Err(PartitionError::Mismatch(format!(
                "cluster {c} out of range for {cluster_count} clusters"
            )));
        }
        Ok(Partition {
            assignment,
            cluster_count,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, neuron: usize) -> usize {
        self.assignment[neuron]
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&n| self.assignment[n] == cluster)
            .collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Swap the clusters of two neurons.
    pub fn swap(&mut self, a: usize, b: usize) {
        self.assignment.swap(a, b);
    }

    /// Distinct pre-synaptic sources per cluster.
    pub fn presynaptic_counts(&self, g: &SnnGraph, constraint: &CrossbarConstraint) -> Vec<usize> {
        let fan_in = constraint.fan_in(g);
        let mut sets: Vec<Vec<NodeRef>> = vec![Vec::new(); self.cluster_count];
        for (n, sources) in fan_in.into_iter().enumerate() {
            sets[self.assignment[n]].extend(sources);
        }
        sets.into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s.len()
            })
            .collect()
    }

    /// Check both crossbar limits on every cluster.
    pub fn check(&self, g: &SnnGraph, constraint: &CrossbarConstraint) -> Result<(), String> {
        if self.assignment.len() != g.neuron_count() {
            return Err(format!(
                "partition covers {} neurons, graph has {}",
                self.assignment.len(),
                g.neuron_count()
            ));
        }
        let m = constraint.crossbar_dim;
        for (c, size) in self.cluster_sizes().into_iter().enumerate() {
            if size > m {
                return Err(format!("cluster {c} holds {size} neurons > {m}"));
            }
        }
        for (c, pre) in self.presynaptic_counts(g, constraint).into_iter().enumerate() {
            if pre > m {
                return Err(format!("cluster {c} has {pre} pre-synaptic sources > {m}"));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, g: &SnnGraph, constraint: &CrossbarConstraint) -> bool {
        self.check(g, constraint).is_ok()
    }
}

/// Total spikes per frame on synapses whose endpoints lie in different
/// clusters. Synapses from external inputs are never cut.
pub fn communication_cost(g: &SnnGraph, p: &Partition) -> f64 {
    g.synapses()
        .iter()
        .filter(|s| match s.src {
            NodeRef::Neuron(src) => p.cluster_of(src) != p.cluster_of(s.dst),
            NodeRef::Input(_) => false,
        })
        .map(|s| s.spikes_per_frame)
        .sum()
}

pub(crate) fn check_feasible(
    g: &SnnGraph,
    constraint: &CrossbarConstraint,
) -> Result<Vec<Vec<NodeRef>>, PartitionError> {
    if constraint.crossbar_dim == 0 {
        return Err(PartitionError::ZeroCrossbar);
    }
    let fan_in = constraint.fan_in(g);
    if let Some((n, f)) = fan_in
        .iter()
        .enumerate()
        .find(|(_, f)| f.len() > constraint.crossbar_dim)
    {
        return Err(PartitionError::Infeasible {
            neuron: g.neurons()[n].name.clone(),
            fan_in: f.len(),
            crossbar_dim: constraint.crossbar_dim,
        });
    }
    Ok(fan_in)
}

/// Random initial partition into `ceil(|N| / M)` balanced clusters, with
/// extra clusters opened when pre-synaptic limits force neurons out.
pub fn init_partition(
    g: &SnnGraph,
    constraint: &CrossbarConstraint,
    seed: u64,
) -> Result<Partition, PartitionError> {
    let fan_in = check_feasible(g, constraint)?;
    let n = g.neuron_count();
    let m = constraint.crossbar_dim;
    if n == 0 {
        return Ok(Partition {
            assignment: Vec::new(),
            cluster_count: 0,
        });
    }
    let k = n.div_ceil(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (slot, &neuron) in order.iter().enumerate() {
        assignment[neuron] = slot % k;
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (neuron, &c) in assignment.iter().enumerate() {
        members[c].push(neuron);
    }
    let distinct = |list: &[usize]| -> HashMap<NodeRef, u32> {
        let mut counts = HashMap::new();
        for &v in list {
            for &s in &fan_in[v] {
                *counts.entry(s).or_insert(0) += 1;
            }
        }
        counts
    };

    // repair pre-synaptic overflows by evicting the member whose sources
    // are least shared with the rest of the cluster
    while let Some(c) = (0..members.len()).find(|&c| distinct(&members[c]).len() > m) {
        let counts = distinct(&members[c]);
        let (pos, _) = members[c]
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let unique = fan_in[v].iter().filter(|s| counts[s] == 1).count();
                (pos, (unique, std::cmp::Reverse(v)))
            })
            .max_by_key(|&(_, key)| key)
            .expect("an overfull cluster has members");
        let neuron = members[c].remove(pos);
        let target = (0..members.len()).find(|&t| {
            if t == c || members[t].len() + 1 > m {
                return false;
            }
            let mut with = members[t].clone();
            with.push(neuron);
            distinct(&with).len() <= m
        });
        match target {
            Some(t) => members[t].push(neuron),
            None => members.push(vec![neuron]),
        }
    }
    let cluster_count = members.len();
    for (c, list) in members.iter().enumerate() {
        for &v in list {
            assignment[v] = c;
        }
    }
    Ok(Partition {
        assignment,
        cluster_count,
    })
}
