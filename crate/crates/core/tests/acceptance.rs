// SPDX-License-Identifier: Apache-2.0
//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p snnmap --test acceptance -- --nocapture` to see
//! the report.

mod common;

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::Rng;

use common::*;
use snnmap::dse::{pareto_filter, run_design_flow, sweep_buffers, DesignPoint, FlowConfig, Provenance, SweepConfig};
use snnmap::mapping::{
    cluster_demands, evaluate_mapping, search_mapping, MappingContext, MappingMatrix, SwarmConfig,
};
use snnmap::partition::{init_partition, kl_refine_traced, CrossbarConstraint};
use snnmap::rates::{estimate_rates, step_neuron, FrameInputs, LifParams, SpikeTrain};
use snnmap::sdfg::{
    check_deadlock, delay_feedback, lift_to_sdfg, repetition_vector, self_timed_throughput, set_buffer_allocation,
    AnalysisOptions, BufferAllocation, Sdfg,
};
use snnmap::synth::{layered_network, mesh_hardware, LayeredParams};
use snnmap::error::SdfgError;

/// Criterion lines go straight to the stderr handle so that they show up
/// even when the test harness captures output.
fn say(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn report(id: u32, title: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        say(&format!("PASS [{id}] {title}: {detail}"));
    } else {
        say(&format!("FAIL [{id}] {title}: {} problem(s)", failures.len()));
        for f in failures.iter().take(10) {
            say(&format!("    - {f}"));
        }
        panic!("criterion {id} failed: {}", failures[0]);
    }
}

/// Like `report`, but a failure is printed without failing the test. Used
/// for the front-size trend, which a single dominating point can break.
fn report_unenforced(id: u32, title: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        say(&format!("PASS [{id}] {title}: {detail}"));
    } else {
        say(&format!("FAIL [{id}] {title}: {detail} (not enforced)"));
        for f in failures {
            say(&format!("    - {f}"));
        }
    }
}

fn exact_throughput(g: &Sdfg) -> Result<Ratio<u64>, SdfgError> {
    let r = self_timed_throughput(g, None, None)?;
    Ok(Ratio::new(r.period_iterations, r.period_time))
}

#[test]
fn c01_throughput_matches_max_cycle_mean() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let graphs: Vec<Sdfg> = (0..30).map(|s| random_single_rate(100 + s, 6)).collect();
    for (i, g) in graphs.iter().enumerate() {
        let mcm = max_cycle_mean(g).expect("generator keeps every cycle live");
        let expect = mcm.recip();
        match exact_throughput(g) {
            Ok(t) => {
                let rel = ((*t.numer() as f64 / *t.denom() as f64) - (*expect.numer() as f64 / *expect.denom() as f64)).abs()
                    / (*expect.numer() as f64 / *expect.denom() as f64);
                if t != expect || rel > 1e-9 {
                    failures.push(format!("graph {i}: throughput {t}, 1/MCM {expect}"));
                }
            }
            Err(e) => failures.push(format!("graph {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        failures.push(format!("took {elapsed:?}, limit 10 s"));
    }
    report(1, "throughput equals 1/MCM", &failures, &format!("{} single-rate graphs in {elapsed:?}", graphs.len()));
}

#[test]
fn c02_multi_rate_matches_tick_simulator() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut seed = 0;
    while checked < 15 && seed < 200 {
        let g = random_multi_rate(500 + seed, 5, false);
        seed += 1;
        let q = nullspace_repetition(&g).expect("consistent by construction");
        let Some(reference) = tick_throughput(&g, &q, 200_000) else {
            // deadlocks are covered by criterion 3
            continue;
        };
        if q.iter().all(|&x| x == 1) {
            continue;
        }
        checked += 1;
        match exact_throughput(&g) {
            Ok(t) if t == reference => {}
            Ok(t) => failures.push(format!("seed {}: engine {t}, reference {reference}", 500 + seed - 1)),
            Err(e) => failures.push(format!("seed {}: {e}", 500 + seed - 1)),
        }
    }
    if checked < 10 {
        failures.push(format!("only {checked} multi-rate graphs generated"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("took {elapsed:?}, limit 30 s"));
    }
    report(2, "multi-rate throughput equals reference simulator", &failures, &format!("{checked} graphs in {elapsed:?}"));
}

fn fixture_corpus() -> Vec<Sdfg> {
    let mut corpus: Vec<Sdfg> = (0..30).map(|s| random_single_rate(100 + s, 6)).collect();
    corpus.extend((0..60).map(|s| random_multi_rate(500 + s, 5, false)));
    // token-free cycles
    corpus.push(
        Sdfg::new(
            vec![actor("a", 1), actor("b", 2)],
            vec![channel(0, 1, 1, 1, 0, None), channel(1, 0, 1, 1, 0, None)],
        )
        .unwrap(),
    );
    corpus.push(
        Sdfg::new(
            vec![actor("a", 1), actor("b", 2)],
            vec![channel(0, 1, 2, 3, 0, None), channel(1, 0, 3, 2, 5, None)],
        )
        .unwrap(),
    );
    for s in 0..10 {
        let g = random_snn(900 + s, 16);
        let c = CrossbarConstraint::new(6);
        let p = init_partition(&g, &c, s).unwrap();
        let (p, _) = kl_refine_traced(&g, &p, &c, 0.0).unwrap();
        let cg = snnmap::partition::build_clustered_graph(&g, &p, &c);
        let lifted = lift_to_sdfg(&cg, 1, Some(0));
        corpus.push(delay_feedback(&lifted).0);
        corpus.push(lifted);
    }
    corpus
}

#[test]
fn c03_consistency_and_deadlock() {
    let mut failures = Vec::new();
    let mut inconsistent = 0;
    for s in 0..50 {
        let g = random_multi_rate(700 + s, 5, s % 3 == 0);
        let oracle = nullspace_repetition(&g);
        match (repetition_vector(&g), oracle) {
            (Ok(q), Some(o)) if q.0 == o => {}
            (Err(SdfgError::Inconsistent { .. }), None) => inconsistent += 1,
            (got, want) => failures.push(format!("graph {s}: got {got:?}, oracle {want:?}")),
        }
    }
    let corpus = fixture_corpus();
    let mut deadlocks = 0;
    for (i, g) in corpus.iter().enumerate() {
        let check = check_deadlock(g).unwrap();
        let timed = self_timed_throughput(g, None, None);
        let timed_deadlock = matches!(timed, Err(SdfgError::Deadlock { .. }));
        if let Err(e) = &timed {
            if !timed_deadlock {
                failures.push(format!("corpus {i}: unexpected error {e}"));
            }
        }
        if check.is_ok() == timed_deadlock {
            failures.push(format!("corpus {i}: check_deadlock ok={} but timed deadlock={timed_deadlock}", check.is_ok()));
        }
        let q = repetition_vector(g).unwrap().0;
        match tick_completes_iteration(g, &q, 10_000) {
            Some(live) if live == check.is_ok() => {}
            other => failures.push(format!(
                "corpus {i}: check_deadlock ok={} but reference simulator says {other:?}",
                check.is_ok()
            )),
        }
        deadlocks += usize::from(timed_deadlock);
    }
    report(
        3,
        "repetition vector and deadlock agreement",
        &failures,
        &format!("50 graphs ({inconsistent} inconsistent); {} corpus graphs ({deadlocks} deadlocking)", corpus.len()),
    );
}

/// Whether any feasible swap of two neurons in different clusters lowers
/// the cut by more than the tolerance.
fn improving_swap(g: &snnmap::graph::SnnGraph, a: &[usize], c: &CrossbarConstraint) -> Option<(usize, usize)> {
    let base = cut_oracle(g, a);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if a[i] == a[j] {
                continue;
            }
            let mut b = a.to_vec();
            b.swap(i, j);
            if crossbar_oracle(g, &b, c) && cut_oracle(g, &b) < base - 1e-9 {
                return Some((i, j));
            }
        }
    }
    None
}

#[test]
fn c04_kl_descent() {
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut small = 0;
    for s in 0..100u64 {
        let n = 4 + (s as usize % 27);
        let g = random_snn(2000 + s, n);
        let c = CrossbarConstraint::new(4 + (s as usize % 4));
        for seed in 0..5 {
            let Ok(init) = init_partition(&g, &c, seed) else {
                failures.push(format!("graph {s}: no initial partition"));
                continue;
            };
            let (fin, trace) = kl_refine_traced(&g, &init, &c, 0.0).unwrap();
            runs += 1;
            let steps = apply_swaps(&init, &trace.swaps);
            let costs: Vec<f64> = steps.iter().map(|a| cut_oracle(&g, a)).collect();
            if costs.windows(2).any(|w| w[1] > w[0] + 1e-9) {
                failures.push(format!("graph {s} seed {seed}: cost rose along {costs:?}"));
            }
            if steps.last().unwrap() != fin.assignment() {
                failures.push(format!("graph {s} seed {seed}: swaps do not reproduce the result"));
            }
            let (c0, c1) = (cut_oracle(&g, init.assignment()), cut_oracle(&g, fin.assignment()));
            if c1 > c0 + 1e-9 {
                failures.push(format!("graph {s} seed {seed}: final {c1} > initial {c0}"));
            }
            if !crossbar_oracle(&g, fin.assignment(), &c) {
                failures.push(format!("graph {s} seed {seed}: final partition violates the crossbar"));
            }
            if n <= 8 {
                small += 1;
                if let Some(pair) = improving_swap(&g, fin.assignment(), &c) {
                    failures.push(format!("graph {s} seed {seed}: swap {pair:?} still improves"));
                }
            }
        }
    }
    report(4, "KL descent", &failures, &format!("{runs} runs, {small} checked for local optimality"));
}

fn monotonicity_fixtures() -> Vec<Sdfg> {
    let mut out = Vec::new();
    for s in 0..10 {
        let g = random_snn(3000 + s, 14);
        let c = CrossbarConstraint::new(5);
        let p = init_partition(&g, &c, s).unwrap();
        let cg = snnmap::partition::build_clustered_graph(&g, &p, &c);
        let lifted = lift_to_sdfg(&cg, 1 + s % 3, None);
        let lifted = delay_feedback(&lifted).0;
        let times: Vec<u64> = (0..lifted.actors().len()).map(|a| 1 + (a as u64 * 7 + s) % 4).collect();
        out.push(lifted.with_exec_times(&times).unwrap());
    }
    let mut seed = 0;
    while out.len() < 20 {
        let g = random_multi_rate(4000 + seed, 5, false);
        seed += 1;
        if check_deadlock(&g).unwrap().is_ok() {
            out.push(g);
        }
    }
    out
}

#[test]
fn c05_buffer_monotonicity() {
    let mut failures = Vec::new();
    let mut pairs = 0;
    let opts = AnalysisOptions::default();
    for (i, g) in monotonicity_fixtures().iter().enumerate() {
        let pts = match sweep_buffers(g, None, &SweepConfig::default(), &opts) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("fixture {i}: sweep failed: {e}"));
                continue;
            }
        };
        for w in pts.windows(2) {
            if w[1].throughput.cmp_throughput(&w[0].throughput) == std::cmp::Ordering::Less
                || w[1].total_buffer <= w[0].total_buffer
            {
                failures.push(format!("fixture {i}: series not monotone at buffer {}", w[1].total_buffer));
            }
        }
        // random pointwise-ordered allocation pairs around the sweep start
        let base = &pts[0].allocation;
        let mut r = rng(i as u64);
        for _ in 0..6 {
            let bump = |alloc: &BufferAllocation, r: &mut rand_chacha::ChaCha8Rng| {
                BufferAllocation(
                    alloc
                        .0
                        .iter()
                        .zip(g.channels())
                        .map(|(cap, c)| cap.map(|x| x + r.gen_range(0..=2) * c.quantum()))
                        .collect(),
                )
            };
            let a1 = bump(base, &mut r);
            let a2 = bump(&a1, &mut r);
            let (g1, g2) = (set_buffer_allocation(g, &a1).unwrap(), set_buffer_allocation(g, &a2).unwrap());
            let (Ok(t1), Ok(t2)) = (exact_throughput(&g1), exact_throughput(&g2)) else {
                failures.push(format!("fixture {i}: allocation above a live one failed to run"));
                continue;
            };
            pairs += 1;
            if t2 < t1 {
                failures.push(format!("fixture {i}: {a2:?} gives {t2} < {t1} of {a1:?}"));
            }
        }
    }
    report(5, "buffer monotonicity", &failures, &format!("20 fixtures, {pairs} ordered allocation pairs"));
}

#[test]
fn c06_pareto_correctness() {
    let mut failures = Vec::new();
    let mut fronts = 0;
    for s in 0..200u64 {
        let mut r = rng(s);
        let pts: Vec<DesignPoint> = (0..r.gen_range(0..25))
            .map(|k| {
                let (it, t) = (r.gen_range(1..4u64), r.gen_range(1..12u64));
                DesignPoint {
                    throughput: it as f64 / t as f64,
                    period_time: t,
                    period_iterations: it,
                    total_buffer: r.gen_range(1..15),
                    provenance: Provenance { round: 0, sweep_step: k, solution: k },
                }
            })
            .collect();
        let front = pareto_filter(&pts);
        fronts += 1;
        if let Err(e) = dominance_oracle(&front.points, &pts) {
            failures.push(format!("set {s}: {e}"));
        }
        if !is_staircase(&front.points) {
            failures.push(format!("set {s}: front is not a staircase"));
        }
    }
    let hw = mesh_hardware(2, 2, 4, 1, 1);
    for seed in 0..3 {
        let cfg = FlowConfig {
            eta: 3,
            master_seed: seed,
            swarm: SwarmConfig { particles: 8, iterations: 10, ..SwarmConfig::default() },
            ..FlowConfig::default()
        };
        let r = run_design_flow(&snnmap::synth::example_network(), &hw, &cfg).unwrap();
        fronts += 1 + r.incremental.len();
        if let Err(e) = dominance_oracle(&r.front.points, &r.points) {
            failures.push(format!("flow seed {seed}: {e}"));
        }
        for f in r.incremental.iter().chain([&r.front]) {
            if !is_staircase(&f.points) {
                failures.push(format!("flow seed {seed}: front is not a staircase"));
            }
        }
    }
    report(6, "Pareto correctness", &failures, &format!("{fronts} fronts checked"));
}

#[test]
fn c07_eta_trend() {
    let start = Instant::now();
    let g = layered_network(&LayeredParams::default());
    let hw = mesh_hardware(2, 3, 32, 1, 1);
    let mut fronts = Vec::new();
    let mut failures = Vec::new();
    for eta in [1, 5, 10] {
        let cfg = FlowConfig {
            eta,
            crossbar_dim: Some(32),
            master_seed: 11,
            ..FlowConfig::default()
        };
        match run_design_flow(&g, &hw, &cfg) {
            Ok(r) => fronts.push(r.front),
            Err(e) => {
                failures.push(format!("eta {eta}: {e}"));
                fronts.push(Default::default());
            }
        }
    }
    let counts: Vec<usize> = fronts.iter().map(|f| f.len()).collect();
    let mut trend = Vec::new();
    if !(counts[2] >= counts[1] && counts[1] >= counts[0]) {
        trend.push(format!("Pareto point counts for eta 1/5/10 are {counts:?}"));
    }
    if !fronts[2].weakly_dominates(&fronts[0]) {
        failures.push("front(10) does not weakly dominate front(1)".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        failures.push(format!("took {elapsed:?}, limit 10 min"));
    }
    let detail = format!("{} neurons, counts {counts:?} for eta 1/5/10 in {elapsed:?}", g.neuron_count());
    report(7, "front(10) weakly dominates front(1)", &failures, &detail);
    report_unenforced(7, "Pareto point count non-decreasing in eta", &trend, &detail);
}

#[test]
fn c08_pso_against_exhaustive() {
    let (cg, hw) = six_cluster_fixture();
    let g = lift_to_sdfg(&cg, 1, Some(8));
    let ctx = MappingContext::new(&g, &hw, Some(cluster_demands(&cg)), 2).unwrap();
    let (k, t) = (cg.clusters.len(), hw.cores().len());
    let mut best: Option<Ratio<u64>> = None;
    let mut feasible = 0;
    for code in 0..t.pow(k as u32) {
        let core_of: Vec<usize> = (0..k).map(|c| code / t.pow(c as u32) % t).collect();
        let m = MappingMatrix::new(core_of, t).unwrap();
        if ctx.check(&m).is_err() {
            continue;
        }
        if let Some((_, r)) = evaluate_mapping(&ctx, &m).unwrap() {
            feasible += 1;
            let v = Ratio::new(r.period_iterations, r.period_time);
            best = best.max(Some(v));
        }
    }
    let optimum = best.expect("some mapping is feasible");
    let mut failures = Vec::new();
    let mut hits = 0;
    for seed in 0..10 {
        let cfg = SwarmConfig { seed, ..SwarmConfig::default() };
        let s = search_mapping(&ctx, &cfg).unwrap();
        let got = Ratio::new(s.throughput.period_iterations, s.throughput.period_time);
        if got > optimum {
            failures.push(format!("seed {seed}: {got} exceeds the optimum {optimum}"));
        }
        hits += usize::from(got == optimum);
        if s.history.windows(2).any(|w| w[1] < w[0]) {
            failures.push(format!("seed {seed}: global best dropped"));
        }
    }
    if hits < 8 {
        failures.push(format!("optimum reached in {hits}/10 seeds"));
    }
    report(
        8,
        "PSO reaches the exhaustive optimum",
        &failures,
        &format!("{feasible} feasible mappings, optimum {optimum} reached in {hits}/10 seeds"),
    );
}

#[test]
fn c09_lif_estimator() {
    let mut failures = Vec::new();
    let sets = [
        (1e-9, 1e7, -0.065, -0.050, 2e-9, 1e-4),
        (1e-9, 1e7, -0.065, -0.050, 5e-9, 1e-4),
        (2e-9, 1e7, -0.070, -0.055, 3e-9, 1e-4),
        (1e-9, 2e7, -0.060, -0.050, 1e-9, 2e-4),
        (5e-10, 1e7, -0.065, -0.045, 4e-9, 5e-5),
        (1e-9, 5e6, -0.065, -0.050, 1e-8, 1e-4),
        (3e-9, 1e7, -0.065, -0.050, 2.5e-9, 2e-4),
        (1e-9, 1e7, 0.0, 0.010, 1.5e-9, 1e-4),
        (1e-9, 1e8, -0.065, -0.050, 5e-10, 5e-4),
        (2e-10, 5e7, -0.065, -0.060, 2e-10, 1e-4),
    ];
    for (i, &(c_m, r_m, v_rest, v_threshold, i_inj, dt)) in sets.iter().enumerate() {
        let p = LifParams { c_m, r_m, v_rest, v_threshold, i_inj, dt };
        // closed-form RC charging to threshold
        let tau = r_m * c_m;
        let exact = -tau * (1.0 - (v_threshold - v_rest) / (i_inj * r_m)).ln();
        let mut v = v_rest;
        let mut isis = Vec::new();
        let mut last = 0usize;
        for k in 1..=200_000usize {
            let (nv, fired) = step_neuron(v, &p, 0.0);
            v = nv;
            if fired {
                isis.push((k - last) as f64 * dt);
                last = k;
                if isis.len() == 3 {
                    break;
                }
            }
        }
        if isis.len() < 3 {
            failures.push(format!("set {i}: fewer than 3 spikes"));
            continue;
        }
        for isi in &isis {
            if (isi - exact).abs() > 2.0 * dt {
                failures.push(format!("set {i}: ISI {isi} vs closed form {exact} (dt {dt})"));
            }
        }
    }
    // silent inputs and no bias current give silence everywhere
    let g = layered_network(&LayeredParams { layers: vec![10, 10], inputs: 5, ..LayeredParams::default() });
    let params: Vec<LifParams> = g.neurons().iter().map(|n| n.params).collect();
    let mut frame = FrameInputs::new(0.05);
    for inp in g.inputs() {
        frame = frame.with(&inp.name, SpikeTrain::silent(0.05).unwrap()).unwrap();
    }
    let rated = estimate_rates(&g, &params, &[frame]).unwrap();
    if rated.synapses().iter().any(|s| s.spikes_per_frame != 0.0) {
        failures.push("zero-input network produced spikes".into());
    }
    report(9, "LIF estimator", &failures, "10 parameter sets within 2 dt; zero input gives zero rates");
}

fn explore(bin: &str, out: &Path, jobs: &str) -> Vec<u8> {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/example_run.toml");
    let status = Command::new(bin)
        .args(["explore", "--config", cfg, "--seed", "1234", "--jobs", jobs, "--out-dir"])
        .arg(out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out.join("front.csv")).unwrap()
}

#[test]
fn c10_reproducibility() {
    let bin = env!("CARGO_BIN_EXE_snnmap");
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        explore(bin, &dir.path().join("a"), "1"),
        explore(bin, &dir.path().join("b"), "1"),
        explore(bin, &dir.path().join("c"), "4"),
        explore(bin, &dir.path().join("d"), "0"),
    ];
    let mut failures = Vec::new();
    for (k, r) in runs.iter().enumerate().skip(1) {
        if r != &runs[0] {
            failures.push(format!("run {k} front.csv differs from run 0"));
        }
    }
    for file in ["series.csv", "solutions.json", "partition_costs.csv", "manifest.toml"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let c = std::fs::read(dir.path().join("c").join(file)).unwrap();
        if a != c {
            failures.push(format!("{file} differs between 1 and 4 threads"));
        }
    }
    report(
        10,
        "reproducible exploration",
        &failures,
        &format!("front.csv ({} bytes) identical over 2 sequential and 2 parallel runs", runs[0].len()),
    );
}
