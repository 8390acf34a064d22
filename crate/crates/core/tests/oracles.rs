// SPDX-License-Identifier: Apache-2.0
//! Library results against independent reference computations.

mod common;

use std::collections::HashSet;

use common::*;
use num_rational::Ratio;
use rand::Rng;
use snnmap::graph::{compute_graph_stats, NodeRef, SnnGraph, SnnGraphBuilder};
use snnmap::partition::{
    build_clustered_graph, communication_cost, init_partition, kl_refine, CrossbarConstraint, Partition,
};
use snnmap::sdfg::{
    check_deadlock, delay_feedback, lift_to_sdfg, repetition_vector, self_timed_throughput, Sdfg,
};
use snnmap::synth::{example_network, example_partition};

/// Node indices: inputs first, then neurons.
fn edges(g: &SnnGraph) -> (usize, Vec<(usize, usize)>) {
    let off = g.inputs().len();
    let idx = |n: NodeRef| match n {
        NodeRef::Input(i) => i,
        NodeRef::Neuron(j) => off + j,
    };
    let e = g.synapses().iter().map(|s| (idx(s.src), off + s.dst)).collect();
    (off + g.neuron_count(), e)
}

/// All-pairs shortest paths by Floyd-Warshall.
fn floyd(n: usize, e: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for &(a, b) in e {
        if a != b {
            d[a][b] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| x + y < c) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Weak component label per node by union-find, labelled by lowest member.
fn components(n: usize, e: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        if p[v] != v {
            let r = find(p, p[v]);
            p[v] = r;
        }
        p[v]
    }
    for &(a, b) in e {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

struct StatsOracle {
    max_in: usize,
    avg_in: f64,
    max_out: usize,
    avg_out: f64,
    diameter: usize,
}

fn stats_oracle(g: &SnnGraph) -> StatsOracle {
    let (n, e) = edges(g);
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    for &(a, b) in &e {
        outdeg[a] += 1;
        indeg[b] += 1;
    }
    let summary = |d: &[usize]| {
        let nz: Vec<usize> = d.iter().copied().filter(|&x| x > 0).collect();
        if nz.is_empty() {
            (0, 0.0)
        } else {
            (*nz.iter().max().unwrap(), nz.iter().sum::<usize>() as f64 / nz.len() as f64)
        }
    };
    let (max_in, avg_in) = summary(&indeg);
    let (max_out, avg_out) = summary(&outdeg);
    let comp = components(n, &e);
    let mut size = vec![0usize; n];
    for &c in &comp {
        size[c] += 1;
    }
    // largest component; the lowest label wins ties
    let largest = (0..n).rev().max_by_key(|&c| size[c]).unwrap_or(0);
    let dist = floyd(n, &e);
    let diameter = (0..n)
        .filter(|&i| comp[i] == largest)
        .flat_map(|i| dist[i].iter().flatten().copied().collect::<Vec<_>>())
        .max()
        .unwrap_or(0);
    StatsOracle {
        max_in,
        avg_in,
        max_out,
        avg_out,
        diameter,
    }
}

fn assert_stats(g: &SnnGraph) {
    let s = compute_graph_stats(g);
    let o = stats_oracle(g);
    assert_eq!(s.max_in_degree, o.max_in as f64);
    assert_eq!(s.max_out_degree, o.max_out as f64);
    assert!((s.avg_in_degree - o.avg_in).abs() < 1e-12);
    assert!((s.avg_out_degree - o.avg_out).abs() < 1e-12);
    assert_eq!(s.diameter, o.diameter);
}

#[test]
fn example_network_stats_match_floyd_warshall() {
    let g = example_network();
    assert_stats(&g);
    let s = compute_graph_stats(&g);
    assert_eq!(s.max_in_degree, 3.0);
    assert_eq!(s.diameter, 3);
}

#[test]
fn random_network_stats_match_floyd_warshall() {
    for seed in 0..60 {
        assert_stats(&random_snn(seed, 3 + (seed as usize % 20)));
    }
}

#[test]
fn disconnected_network_uses_largest_component() {
    let g = SnnGraphBuilder::new()
        .neuron("a")
        .neuron("b")
        .neuron("c")
        .neuron("x")
        .neuron("y")
        .synapse("a", "b", 1.0, 1.0)
        .synapse("b", "c", 1.0, 1.0)
        .synapse("x", "y", 1.0, 1.0)
        .build()
        .unwrap();
    assert_stats(&g);
    assert_eq!(compute_graph_stats(&g).diameter, 2);
}

#[test]
fn empty_network_has_zero_stats() {
    let s = compute_graph_stats(&SnnGraph::empty());
    assert_eq!((s.max_in_degree, s.avg_in_degree, s.diameter), (0.0, 0.0, 0));
}

#[test]
fn communication_cost_matches_cut_oracle() {
    let mut r = rng(5);
    for seed in 0..80 {
        let g = random_snn(seed, 4 + seed as usize % 25);
        let k = 1 + seed as usize % 4;
        let a: Vec<usize> = (0..g.neuron_count()).map(|_| r.gen_range(0..k)).collect();
        let p = Partition::new(a.clone(), k).unwrap();
        assert!((communication_cost(&g, &p) - cut_oracle(&g, &a)).abs() < 1e-9);
    }
}

#[test]
fn refined_partitions_satisfy_crossbar_oracle() {
    for seed in 0..40 {
        let g = random_snn(seed, 6 + seed as usize % 20);
        let c = CrossbarConstraint::new(4 + seed as usize % 3);
        let Ok(init) = init_partition(&g, &c, seed) else {
            continue;
        };
        assert!(crossbar_oracle(&g, init.assignment(), &c), "seed {seed}: initial");
        let p = kl_refine(&g, &init, &c, 0.0).unwrap();
        assert!(crossbar_oracle(&g, p.assignment(), &c), "seed {seed}: refined");
        assert!(communication_cost(&g, &p) <= communication_cost(&g, &init) + 1e-9);
    }
}

#[test]
fn lift_matches_clustered_graph_field_by_field() {
    let g = example_network();
    let cg = build_clustered_graph(&g, &example_partition(), &CrossbarConstraint::new(4));
    let s = lift_to_sdfg(&cg, 3, Some(5));
    assert_eq!(s.actors().len(), cg.clusters.len());
    for (a, c) in s.actors().iter().zip(&cg.clusters) {
        assert_eq!(a.name, c.name);
        assert_eq!(a.exec_time, 3);
    }
    let carrying: Vec<_> = cg.edges.iter().filter(|e| e.tokens > 0).collect();
    assert_eq!(s.channels().len(), carrying.len() + cg.clusters.len());
    for (ch, e) in s.channels().iter().zip(&carrying) {
        assert_eq!((ch.src, ch.dst), (e.src, e.dst));
        assert_eq!((ch.production, ch.consumption, ch.initial_tokens), (e.tokens, e.tokens, 0));
        assert_eq!(ch.capacity, Some(e.tokens.max(5)));
    }
    for (a, ch) in s.channels()[carrying.len()..].iter().enumerate() {
        assert_eq!((ch.src, ch.dst, ch.initial_tokens, ch.capacity), (a, a, 1, None));
    }
    // cut tokens are the rounded spikes crossing clusters
    let expected: f64 = cut_oracle(&g, example_partition().assignment());
    assert_eq!(cg.cut_tokens() as f64, expected);
}

#[test]
fn hand_worked_repetition_vectors() {
    // A -2/3-> B -1/2-> C: 2 qA = 3 qB, qB = 2 qC
    let g = Sdfg::new(
        vec![actor("A", 1), actor("B", 1), actor("C", 1)],
        vec![channel(0, 1, 2, 3, 0, None), channel(1, 2, 1, 2, 0, None)],
    )
    .unwrap();
    assert_eq!(repetition_vector(&g).unwrap().0, vec![3, 2, 1]);
    for seed in 0..30 {
        let g = random_multi_rate(seed, 5, false);
        assert_eq!(Some(repetition_vector(&g).unwrap().0), nullspace_repetition(&g));
    }
}

#[test]
fn hand_worked_throughputs() {
    // two-actor ring with one token: period is the sum of execution times
    let ring = Sdfg::new(
        vec![actor("A", 2), actor("B", 3)],
        vec![channel(0, 1, 1, 1, 0, None), channel(1, 0, 1, 1, 1, None)],
    )
    .unwrap();
    let r = self_timed_throughput(&ring, None, None).unwrap();
    assert_eq!((r.period_time, r.period_iterations), (5, 1));

    // two tokens let the actors overlap; the slower self-loop bounds it
    let ring2 = Sdfg::new(
        vec![actor("A", 2), actor("B", 3)],
        vec![
            channel(0, 1, 1, 1, 0, None),
            channel(1, 0, 1, 1, 2, None),
            channel(0, 0, 1, 1, 1, None),
            channel(1, 1, 1, 1, 1, None),
        ],
    )
    .unwrap();
    let r = self_timed_throughput(&ring2, None, None).unwrap();
    assert_eq!(Ratio::new(r.period_time, r.period_iterations), Ratio::from_integer(3));
    assert_eq!(max_cycle_mean(&ring2), Some(Ratio::from_integer(3)));
}

#[test]
fn feedback_delay_makes_lifted_graphs_live() {
    let mut fixed = 0;
    for seed in 0..40 {
        let g = random_snn(seed, 10 + seed as usize % 15);
        let c = CrossbarConstraint::new(5);
        let Ok(p) = init_partition(&g, &c, seed) else {
            continue;
        };
        let cg = build_clustered_graph(&g, &p, &c);
        let s = lift_to_sdfg(&cg, 1, Some(0));
        let (d, delayed) = delay_feedback(&s);
        assert_eq!(repetition_vector(&d).unwrap(), repetition_vector(&s).unwrap());
        assert!(check_deadlock(&d).unwrap().is_ok(), "seed {seed}");
        let back: HashSet<usize> = delayed.iter().copied().collect();
        for (i, (a, b)) in s.channels().iter().zip(d.channels()).enumerate() {
            assert_eq!((a.src, a.dst, a.production), (b.src, b.dst, b.production));
            if back.contains(&i) {
                assert_eq!(b.initial_tokens, a.initial_tokens.max(a.production));
                assert!(b.capacity.is_none_or(|cap| cap >= b.initial_tokens));
            } else {
                assert_eq!(b.initial_tokens, a.initial_tokens);
            }
        }
        if !check_deadlock(&s).unwrap().is_ok() {
            fixed += 1;
        }
    }
    assert!(fixed > 0, "fixture never exercised a token-free cycle");
}
