// SPDX-License-Identifier: Apache-2.0
use std::collections::HashSet;

use serde::Serialize;

use crate::error::SdfgError;
use crate::partition::ClusteredSnnGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Actor {
    pub name: String,
    /// Time units per firing; at least 1.
    pub exec_time: u64,
}

/// FIFO channel between two actors. `capacity: None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub src: usize,
    pub dst: usize,
    pub production: u64,
    pub consumption: u64,
    pub initial_tokens: u64,
    pub capacity: Option<u64>,
}

impl Channel {
    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }

    /// Smallest capacity that admits a single firing on either side.
    pub fn min_capacity(&self) -> u64 {
        self.production
            .max(self.consumption)
            .max(self.initial_tokens)
    }

    /// Granularity in which capacity changes can matter.
    pub fn quantum(&self) -> u64 {
        gcd(self.production, self.consumption)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Per-channel capacities, indexed like [`Sdfg::channels`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BufferAllocation(pub Vec<Option<u64>>);

impl BufferAllocation {
    /// Sum of capacities over channels that are not self-loops; `None` if
    /// any such channel is unbounded.
    pub fn total(&self, g: &Sdfg) -> Option<u64> {
        g.channels
            .iter()
            .zip(&self.0)
            .filter(|(c, _)| !c.is_self_loop())
            .map(|(_, cap)| *cap)
            .sum()
    }

    /// True when every capacity is at least the corresponding one in `other`
    /// (unbounded dominates everything).
    pub fn dominates(&self, other: &BufferAllocation) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| match (a, b) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        })
    }
}

/// Synchronous dataflow graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sdfg {
    actors: Vec<Actor>,
    channels: Vec<Channel>,
}

impl Sdfg {
    pub fn new(actors: Vec<Actor>, channels: Vec<Channel>) -> Result<Self, SdfgError> {
        let g = Sdfg { actors, channels };
        g.validate()?;
        Ok(g)
    }

    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn actor_index(&self, name: &str) -> Option<usize> {
        self.actors.iter().position(|a| a.name == name)
    }

    pub fn allocation(&self) -> BufferAllocation {
        BufferAllocation(self.channels.iter().map(|c| c.capacity).collect())
    }

    /// Total capacity of non-self-loop channels, `None` if one is unbounded.
    pub fn total_buffer(&self) -> Option<u64> {
        self.allocation().total(self)
    }

    /// Indices of channels that are not self-loops.
    pub fn data_channels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.channels.len()).filter(|&c| !self.channels[c].is_self_loop())
    }

    /// Copy with every actor's execution time replaced.
    pub fn with_exec_times(&self, times: &[u64]) -> Result<Self, SdfgError> {
        let mut g = self.clone();
        for (a, &t) in g.actors.iter_mut().zip(times) {
            a.exec_time = t;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SdfgError> {
        let mut names = HashSet::new();
        for a in &self.actors {
            if !names.insert(a.name.as_str()) {
                return Err(SdfgError::Invalid(format!("duplicate actor {}", a.name)));
            }
            if a.exec_time == 0 {
                return Err(SdfgError::Invalid(format!(
                    "actor {} has zero execution time",
                    a.name
                )));
            }
        }
        for (i, c) in self.channels.iter().enumerate() {
            if c.src >= self.actors.len() || c.dst >= self.actors.len() {
                return Err(SdfgError::Invalid(format!(
                    "channel {i} references an undeclared actor"
                )));
            }
            if c.production == 0 || c.consumption == 0 {
                return Err(SdfgError::Invalid(format!("channel {i} has a zero port rate")));
            }
            if let Some(cap) = c.capacity {
                if c.initial_tokens > cap {
                    return Err(SdfgError::Invalid(format!(
                        "channel {i} holds {} initial tokens above its capacity {cap}",
                        c.initial_tokens
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Apply per-channel capacities. Each bounded capacity must reach the
/// channel's [`Channel::min_capacity`].
pub fn set_buffer_allocation(g: &Sdfg, alloc: &BufferAllocation) -> Result<Sdfg, SdfgError> {
    if alloc.0.len() != g.channels.len() {
        return Err(SdfgError::Invalid(format!(
            "allocation has {} entries for {} channels",
            alloc.0.len(),
            g.channels.len()
        )));
    }
    let mut out = g.clone();
    for (i, (c, cap)) in out.channels.iter_mut().zip(&alloc.0).enumerate() {
        if let Some(cap) = *cap {
            let minimum = c.min_capacity();
            if cap < minimum {
                return Err(SdfgError::InfeasibleCapacity {
                    channel: i,
                    capacity: cap,
                    minimum,
                });
            }
        }
        c.capacity = *cap;
    }
    Ok(out)
}

/// One actor per cluster and one channel per inter-cluster edge.
///
/// An edge carrying `k` tokens becomes a channel producing and consuming `k`
/// per firing: one firing handles one frame. Every actor gets a self-loop
/// with one token so that it never overlaps with itself. Edges with zero
/// tokens are dropped. Data channels get `default_buffer` tokens of
/// capacity, raised to the channel minimum; `None` leaves them unbounded.
pub fn lift_to_sdfg(cg: &ClusteredSnnGraph, exec_time: u64, default_buffer: Option<u64>) -> Sdfg {
    let actors = cg
        .clusters
        .iter()
        .map(|c| Actor {
            name: c.name.clone(),
            exec_time: exec_time.max(1),
        })
        .collect();
    let mut channels = Vec::with_capacity(cg.edges.len() + cg.clusters.len());
    for e in &cg.edges {
        if e.tokens == 0 {
            log::warn!(
                "dropping edge {} -> {}: it carries no tokens",
                cg.clusters[e.src].name,
                cg.clusters[e.dst].name
            );
            continue;
        }
        channels.push(Channel {
            src: e.src,
            dst: e.dst,
            production: e.tokens,
            consumption: e.tokens,
            initial_tokens: 0,
            capacity: default_buffer.map(|b| b.max(e.tokens)),
        });
    }
    for a in 0..cg.clusters.len() {
        channels.push(Channel {
            src: a,
            dst: a,
            production: 1,
            consumption: 1,
            initial_tokens: 1,
            capacity: None,
        });
    }
    Sdfg { actors, channels }
}

/// Put one firing's worth of initial tokens on every back edge of a
/// depth-first search over the data channels (actors and channels visited
/// in index order), so that the spikes a cycle feeds back are consumed one
/// frame later. Returns the new graph and the delayed channels.
///
/// A cycle without tokens deadlocks under any buffer allocation; after
/// this every cycle carries at least one firing's worth.
pub fn delay_feedback(g: &Sdfg) -> (Sdfg, Vec<usize>) {
    let n = g.actors.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in g.channels.iter().enumerate() {
        if !c.is_self_loop() {
            out[c.src].push(i);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut back = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&ch) = out[v].get(*next) {
                *next += 1;
                let w = g.channels[ch].dst;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => back.push(ch),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    back.sort_unstable();
    let mut h = g.clone();
    for &ch in &back {
        let c = &mut h.channels[ch];
        if c.initial_tokens < c.production {
            c.initial_tokens = c.production;
        }
        c.capacity = c.capacity.map(|cap| cap.max(c.initial_tokens));
    }
    (h, back)
}
