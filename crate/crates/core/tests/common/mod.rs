// SPDX-License-Identifier: Apache-2.0
//! Independent reference implementations and random fixture generators
//! shared by the integration suites.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use snnmap::dse::DesignPoint;
use snnmap::graph::{NodeRef, SnnGraph, SnnGraphBuilder};
use snnmap::partition::{ClusteredSnnGraph, CrossbarConstraint, Partition};
use snnmap::sdfg::{Actor, Channel, Sdfg};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn actor(name: &str, exec_time: u64) -> Actor {
    Actor {
        name: name.into(),
        exec_time,
    }
}

pub fn channel(src: usize, dst: usize, p: u64, c: u64, init: u64, cap: Option<u64>) -> Channel {
    Channel {
        src,
        dst,
        production: p,
        consumption: c,
        initial_tokens: init,
        capacity: cap,
    }
}

fn self_loops(n: usize) -> Vec<Channel> {
    (0..n).map(|a| channel(a, a, 1, 1, 1, None)).collect()
}

// ---------------------------------------------------------------- MCM

/// Edge of the homogeneous graph equivalent to a single-rate SDFG.
#[derive(Debug, Clone, Copy)]
struct HEdge {
    src: usize,
    dst: usize,
    tokens: u64,
}

/// Single-rate SDFG as a plain token graph. A bounded channel adds a
/// reverse edge carrying its free space.
fn homogeneous_edges(g: &Sdfg) -> Vec<HEdge> {
    let mut e = Vec::new();
    for c in g.channels() {
        assert_eq!(c.production, c.consumption, "single-rate only");
        let r = c.production;
        e.push(HEdge {
            src: c.src,
            dst: c.dst,
            tokens: c.initial_tokens / r,
        });
        if let Some(cap) = c.capacity {
            e.push(HEdge {
                src: c.dst,
                dst: c.src,
                tokens: (cap - c.initial_tokens) / r,
            });
        }
    }
    e
}

/// Every simple cycle as a list of edge indices, found by depth-first search
/// from each start vertex through higher-numbered vertices only.
fn simple_cycles(n: usize, edges: &[HEdge]) -> Vec<Vec<usize>> {
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        out_edges[e.src].push(i);
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path: Vec<usize> = Vec::new();
        let mut on_path = vec![false; n];
        fn dfs(
            v: usize,
            start: usize,
            out_edges: &[Vec<usize>],
            edges: &[HEdge],
            path: &mut Vec<usize>,
            on_path: &mut [bool],
            cycles: &mut Vec<Vec<usize>>,
        ) {
            for &ei in &out_edges[v] {
                let w = edges[ei].dst;
                if w == start {
                    let mut c = path.clone();
                    c.push(ei);
                    cycles.push(c);
                } else if w > start && !on_path[w] {
                    on_path[w] = true;
                    path.push(ei);
                    dfs(w, start, out_edges, edges, path, on_path, cycles);
                    path.pop();
                    on_path[w] = false;
                }
            }
        }
        on_path[start] = true;
        dfs(start, start, &out_edges, edges, &mut path, &mut on_path, &mut cycles);
    }
    cycles
}

/// Largest ratio of execution time to tokens over all simple cycles.
/// `None` when some cycle carries no token (deadlock).
pub fn max_cycle_mean(g: &Sdfg) -> Option<Ratio<u64>> {
    let edges = homogeneous_edges(g);
    let mut best = Ratio::from_integer(0);
    for c in simple_cycles(g.actors().len(), &edges) {
        let time: u64 = c.iter().map(|&e| g.actors()[edges[e].src].exec_time).sum();
        let tokens: u64 = c.iter().map(|&e| edges[e].tokens).sum();
        if tokens == 0 {
            return None;
        }
        let m = Ratio::new(time, tokens);
        if m > best {
            best = m;
        }
    }
    Some(best)
}

/// Random single-rate SDFG whose every cycle holds a token. Every actor
/// has a self-loop; some channels are bounded.
pub fn random_single_rate(seed: u64, max_actors: usize) -> Sdfg {
    let mut r = rng(seed);
    loop {
        let n = r.gen_range(2..=max_actors);
        let actors: Vec<Actor> = (0..n).map(|i| actor(&format!("a{i}"), r.gen_range(1..=5))).collect();
        let mut channels = self_loops(n);
        // a spanning path keeps the graph connected
        let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        for _ in 0..r.gen_range(0..=n) {
            let (s, d) = (r.gen_range(0..n), r.gen_range(0..n));
            if s != d {
                pairs.push((s, d));
            }
        }
        for (s, d) in pairs {
            let rate = r.gen_range(1..=2);
            let init = if d <= s { rate * r.gen_range(1..=2) } else { rate * r.gen_range(0..=1) };
            let cap = if r.gen_bool(0.3) {
                Some(init + rate * r.gen_range(1..=2))
            } else {
                None
            };
            channels.push(channel(s, d, rate, rate, init, cap));
        }
        let g = Sdfg::new(actors, channels).unwrap();
        if max_cycle_mean(&g).is_some() {
            return g;
        }
    }
}

// -------------------------------------------------- rational balance

/// Repetition vector from the null space of the topology matrix, by exact
/// Gauss-Jordan elimination. `None` when only the zero solution exists.
/// Assumes a weakly connected graph.
#[allow(clippy::needless_range_loop)]
pub fn nullspace_repetition(g: &Sdfg) -> Option<Vec<u64>> {
    let n = g.actors().len();
    let mut rows: Vec<Vec<Ratio<i128>>> = g
        .channels()
        .iter()
        .filter(|c| c.src != c.dst)
        .map(|c| {
            let mut row = vec![Ratio::from_integer(0); n];
            row[c.src] += Ratio::from_integer(c.production as i128);
            row[c.dst] -= Ratio::from_integer(c.consumption as i128);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != Ratio::from_integer(0)) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][col];
        for x in rows[r].iter_mut() {
            *x /= lead;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != Ratio::from_integer(0) {
                let f = rows[i][col];
                for k in 0..n {
                    let v = rows[r][k] * f;
                    rows[i][k] -= v;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return None;
    }
    let f = free[0];
    let mut x = vec![Ratio::from_integer(0i128); n];
    x[f] = Ratio::from_integer(1);
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = -rows[i][f];
    }
    if x.iter().any(|v| *v <= Ratio::from_integer(0)) {
        return None;
    }
    let lcm = x.iter().fold(1i128, |acc, v| num_integer_lcm(acc, *v.denom()));
    let ints: Vec<i128> = x.iter().map(|v| (v * Ratio::from_integer(lcm)).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, &v| gcd(acc, v));
    Some(ints.iter().map(|&v| (v / g) as u64).collect())
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn num_integer_lcm(a: i128, b: i128) -> i128 {
    a / gcd(a, b) * b
}

/// Random connected multi-rate SDFG. Consistent unless `perturb`.
pub fn random_multi_rate(seed: u64, max_actors: usize, perturb: bool) -> Sdfg {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_actors);
    let q: Vec<u64> = (0..n).map(|_| r.gen_range(1..=3)).collect();
    let actors: Vec<Actor> = (0..n).map(|i| actor(&format!("a{i}"), r.gen_range(1..=4))).collect();
    let mut channels = self_loops(n);
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (r.gen_range(0..i), i)).collect();
    for _ in 0..r.gen_range(0..n) {
        let (s, d) = (r.gen_range(0..n), r.gen_range(0..n));
        if s != d {
            pairs.push((s, d));
        }
    }
    for (s, d) in pairs {
        let g = gcd(q[s] as i128, q[d] as i128) as u64;
        let m = r.gen_range(1..=2);
        let (p, c) = (q[d] / g * m, q[s] / g * m);
        // tokens on back edges so that cycles can start
        let init = if d < s { p * q[s] } else { 0 };
        let cap = Some(p.max(c).max(init) + r.gen_range(0..=2) * p.max(c));
        channels.push(channel(s, d, p, c, init, cap));
    }
    if perturb {
        let k = n + r.gen_range(0..channels.len() - n);
        channels[k].production += 1;
    }
    Sdfg::new(actors, channels).unwrap()
}

// ------------------------------------------- tick-level reference sim

/// Self-timed execution simulated one time unit at a time. Firings consume
/// input tokens and claim output space when they start, and produce tokens
/// and free input space when they end.
pub struct TickSim<'a> {
    g: &'a Sdfg,
    pub t: u64,
    tokens: Vec<u64>,
    // space reserved by producers in flight counts as occupied
    occupied: Vec<u64>,
    active: Vec<(usize, u64)>, // (actor, finish time)
    pub fired: Vec<u64>,
}

/// Tokens, occupied space and in-flight firings relative to the clock.
pub type TickState = (Vec<u64>, Vec<u64>, Vec<(usize, u64)>);

impl<'a> TickSim<'a> {
    pub fn new(g: &'a Sdfg) -> Self {
        let tokens: Vec<u64> = g.channels().iter().map(|c| c.initial_tokens).collect();
        TickSim {
            g,
            t: 0,
            occupied: tokens.clone(),
            tokens,
            active: Vec::new(),
            fired: vec![0; g.actors().len()],
        }
    }

    /// Finish firings due now, then start everything enabled. Returns
    /// whether any firing is in progress afterwards.
    pub fn step(&mut self) -> bool {
        let chans = self.g.channels();
        let t = self.t;
        let (done, rest): (Vec<_>, Vec<_>) = self.active.iter().partition(|&&(_, f)| f == t);
        self.active = rest;
        for (a, _) in done {
            for (i, c) in chans.iter().enumerate() {
                if c.src == a {
                    self.tokens[i] += c.production;
                }
                if c.dst == a {
                    self.occupied[i] -= c.consumption;
                }
            }
        }
        let mut progress = true;
        while progress {
            progress = false;
            for a in 0..self.g.actors().len() {
                let enabled = chans.iter().enumerate().all(|(i, c)| {
                    let input_ok = c.dst != a || self.tokens[i] >= c.consumption;
                    let space_ok =
                        c.src != a || c.capacity.is_none_or(|cap| self.occupied[i] + c.production <= cap);
                    input_ok && space_ok
                });
                if enabled {
                    for (i, c) in chans.iter().enumerate() {
                        if c.dst == a {
                            self.tokens[i] -= c.consumption;
                        }
                        if c.src == a {
                            self.occupied[i] += c.production;
                        }
                    }
                    self.active.push((a, t + self.g.actors()[a].exec_time));
                    self.fired[a] += 1;
                    progress = true;
                }
            }
        }
        !self.active.is_empty()
    }

    pub fn state(&self) -> TickState {
        let mut a: Vec<(usize, u64)> = self.active.iter().map(|&(a, f)| (a, f - self.t)).collect();
        a.sort_unstable();
        (self.tokens.clone(), self.occupied.clone(), a)
    }
}

/// Throughput (iterations per time unit) from [`TickSim`], counting
/// iterations by actor 0. `None` on deadlock or if no state recurs within
/// `max_ticks`.
pub fn tick_throughput(g: &Sdfg, q: &[u64], max_ticks: u64) -> Option<Ratio<u64>> {
    let mut sim = TickSim::new(g);
    let mut seen: HashMap<TickState, (u64, u64)> = HashMap::new();
    while sim.t < max_ticks {
        if !sim.step() {
            return None;
        }
        let key = sim.state();
        if let Some(&(t0, f0)) = seen.get(&key) {
            return Some(Ratio::new((sim.fired[0] - f0) / q[0], sim.t - t0));
        }
        seen.insert(key, (sim.t, sim.fired[0]));
        sim.t += 1;
    }
    None
}

/// Whether every actor `a` fires `q[a]` times. `None` if neither that nor a
/// standstill happens within `max_ticks`.
pub fn tick_completes_iteration(g: &Sdfg, q: &[u64], max_ticks: u64) -> Option<bool> {
    let mut sim = TickSim::new(g);
    while sim.t < max_ticks {
        let busy = sim.step();
        if sim.fired.iter().zip(q).all(|(&f, &k)| f >= k) {
            return Some(true);
        }
        if !busy {
            return Some(false);
        }
        sim.t += 1;
    }
    None
}

// --------------------------------------------------------------- SNN

/// Random SNN with `n` neurons and a few inputs.
pub fn random_snn(seed: u64, n: usize) -> SnnGraph {
    let mut r = rng(seed);
    let inputs = r.gen_range(1..=3);
    let mut b = SnnGraphBuilder::new();
    for i in 0..inputs {
        b = b.input(&format!("i{i}"), f64::from(r.gen_range(1..=9)));
    }
    for j in 0..n {
        b = b.neuron(&format!("n{j}"));
    }
    let mut seen = HashSet::new();
    for j in 0..n {
        for _ in 0..r.gen_range(1..=3) {
            let src = if r.gen_bool(0.2) {
                format!("i{}", r.gen_range(0..inputs))
            } else {
                format!("n{}", r.gen_range(0..n))
            };
            let dst = format!("n{j}");
            if src != dst && seen.insert((src.clone(), dst.clone())) {
                b = b.synapse(&src, &dst, 1e-11, f64::from(r.gen_range(0..=9)));
            }
        }
    }
    b.build().unwrap()
}

/// Spikes on synapses between neurons in different clusters.
pub fn cut_oracle(g: &SnnGraph, assignment: &[usize]) -> f64 {
    g.synapses()
        .iter()
        .filter_map(|s| match s.src {
            NodeRef::Neuron(a) if assignment[a] != assignment[s.dst] => Some(s.spikes_per_frame),
            _ => None,
        })
        .sum()
}

/// Cluster sizes and distinct pre-synaptic sources within `m`.
pub fn crossbar_oracle(g: &SnnGraph, assignment: &[usize], c: &CrossbarConstraint) -> bool {
    let k = assignment.iter().copied().max().map_or(0, |x| x + 1);
    let mut size = vec![0usize; k];
    let mut sources: Vec<HashSet<NodeRef>> = vec![HashSet::new(); k];
    for (j, &cl) in assignment.iter().enumerate() {
        size[cl] += 1;
        for s in g.synapses().iter().filter(|s| s.dst == j) {
            if c.count_inputs || matches!(s.src, NodeRef::Neuron(_)) {
                sources[cl].insert(s.src);
            }
        }
    }
    size.iter().all(|&s| s <= c.crossbar_dim) && sources.iter().all(|s| s.len() <= c.crossbar_dim)
}

pub fn apply_swaps(p: &Partition, swaps: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut a = p.assignment().to_vec();
    let mut out = vec![a.clone()];
    for &(i, j) in swaps {
        a.swap(i, j);
        out.push(a.clone());
    }
    out
}

// ------------------------------------------------------------ Pareto

/// O(n^2) check: no point on the front is dominated by any candidate, and
/// every candidate is dominated by or equal to a front point.
pub fn dominance_oracle(front: &[DesignPoint], all: &[DesignPoint]) -> Result<(), String> {
    let thr = |p: &DesignPoint| Ratio::new(p.period_iterations, p.period_time);
    let dominates = |a: &DesignPoint, b: &DesignPoint| {
        thr(a) >= thr(b) && a.total_buffer <= b.total_buffer && (thr(a) > thr(b) || a.total_buffer < b.total_buffer)
    };
    for f in front {
        if let Some(d) = all.iter().find(|p| dominates(p, f)) {
            return Err(format!("front point {f:?} is dominated by {d:?}"));
        }
    }
    for p in all {
        if !front
            .iter()
            .any(|f| dominates(f, p) || (thr(f) == thr(p) && f.total_buffer == p.total_buffer))
        {
            return Err(format!("point {p:?} is neither on nor dominated by the front"));
        }
    }
    Ok(())
}

/// Strictly increasing buffer and throughput along the front.
pub fn is_staircase(front: &[DesignPoint]) -> bool {
    front.windows(2).all(|w| {
        w[0].total_buffer < w[1].total_buffer
            && Ratio::new(w[0].period_iterations, w[0].period_time) < Ratio::new(w[1].period_iterations, w[1].period_time)
    })
}

// ------------------------------------------------------------ mapping

/// Six clusters on three cores, small enough to enumerate every mapping.
pub fn six_cluster_fixture() -> (ClusteredSnnGraph, snnmap::graph::HardwareGraph) {
    use snnmap::graph::{Core, HardwareGraph, Link};
    use snnmap::partition::{Cluster, ClusterEdge};
    let cluster = |k: usize, size: usize| Cluster {
        name: format!("C{k}"),
        neurons: (0..size).map(|j| format!("n{k}_{j}")).collect(),
        presynaptic: size,
        internal_tokens: 0,
        input_tokens: 0,
    };
    let edge = |s, d, t| ClusterEdge {
        src: s,
        dst: d,
        tokens: t,
        synapses: 1,
    };
    let cg = ClusteredSnnGraph {
        clusters: vec![cluster(0, 4), cluster(1, 3), cluster(2, 4), cluster(3, 2), cluster(4, 3), cluster(5, 4)],
        edges: vec![
            edge(0, 1, 3),
            edge(0, 2, 2),
            edge(1, 3, 4),
            edge(2, 3, 1),
            edge(3, 4, 2),
            edge(2, 5, 3),
            edge(4, 5, 2),
        ],
        inputs: vec![],
    };
    let mut cores = vec![Core::new("T0", 4, 1), Core::new("T1", 4, 2), Core::new("T2", 4, 1)];
    cores[1].in_connections = Some(3);
    let links = vec![
        Link { src: 0, dst: 1, latency: 1 },
        Link { src: 1, dst: 0, latency: 1 },
        Link { src: 1, dst: 2, latency: 2 },
        Link { src: 2, dst: 1, latency: 2 },
        Link { src: 0, dst: 2, latency: 3 },
        Link { src: 2, dst: 0, latency: 3 },
    ];
    (cg, HardwareGraph::new(cores, links).unwrap())
}

/// Breadth-first eccentricities over directed edges, for stats checks.
pub fn bfs_diameter(adj: &[Vec<usize>], nodes: &[usize]) -> usize {
    let mut best = 0;
    for &s in nodes {
        let mut dist = HashMap::new();
        dist.insert(s, 0usize);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !dist.contains_key(&w) {
                    dist.insert(w, dist[&v] + 1);
                    queue.push_back(w);
                }
            }
        }
        best = best.max(dist.values().copied().max().unwrap_or(0));
    }
    best
}
