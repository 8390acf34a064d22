// SPDX-License-Identifier: Apache-2.0
//! Throughput of self-timed execution, optionally under a mapping and
//! per-core static-order schedules.
//!
//! Unbounded channels cannot throttle their producer, so the graph is split
//! into groups that constrain each other in both directions: strongly
//! connected components over channel edges, reverse edges of bounded
//! channels, and (when cores are exclusive) edges between actors sharing a
//! core. Each group runs on its own with unlimited supply from upstream
//! groups; the slowest group sets the period.

use serde::Serialize;

use super::engine::{execute, fnv1a, LocalChannel, LocalOrder, Mode, Outcome, Problem};
use super::graph::Sdfg;
use super::repetition::{repetition_vector, weak_components};
use crate::error::SdfgError;

/// Default number of distinct execution states explored before giving up.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub state_budget: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

/// Actor placement and timing on a concrete platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Platform {
    pub core_of: Vec<usize>,
    /// Execution time per actor, replacing the graph's own.
    pub exec_time: Vec<u64>,
    /// Core-to-core token latency; the diagonal is ignored.
    pub latency: Vec<Vec<u64>>,
}

impl Platform {
    pub fn core_count(&self) -> usize {
        self.latency.len()
    }

    fn check(&self, g: &Sdfg) -> Result<(), SdfgError> {
        let n = g.actors().len();
        if self.core_of.len() != n || self.exec_time.len() != n {
            return Err(SdfgError::Invalid(format!(
                "platform describes {} actors, graph has {n}",
                self.core_of.len()
            )));
        }
        let cores = self.core_count();
        if self.core_of.iter().any(|&c| c >= cores) || self.latency.iter().any(|r| r.len() != cores) {
            return Err(SdfgError::Invalid("platform core index out of range".into()));
        }
        if self.exec_time.contains(&0) {
            return Err(SdfgError::Invalid("platform execution time of zero".into()));
        }
        Ok(())
    }

    fn channel_latency(&self, src: usize, dst: usize) -> u64 {
        let (a, b) = (self.core_of[src], self.core_of[dst]);
        if a == b {
            0
        } else {
            self.latency[a][b]
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoreSchedule {
    pub transient: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Per-core firing orders: a transient prefix followed by a repeating cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StaticOrderSchedule {
    pub cores: Vec<CoreSchedule>,
}

impl StaticOrderSchedule {
    /// Occurrences of each actor in the steady-state cycles.
    pub fn cycle_counts(&self, actors: usize) -> Vec<u64> {
        let mut counts = vec![0u64; actors];
        for c in &self.cores {
            for &a in &c.cycle {
                counts[a] += 1;
            }
        }
        counts
    }

    /// Iterations covered by one pass through `core`'s cycle, if every actor
    /// on it appears a whole multiple of its repetition entry, all with the
    /// same multiple.
    pub fn iterations_per_cycle(&self, core: usize, q: &[u64]) -> Option<u64> {
        let cycle = &self.cores[core].cycle;
        let mut counts = std::collections::BTreeMap::new();
        for &a in cycle {
            *counts.entry(a).or_insert(0u64) += 1;
        }
        let mut k = None;
        for (&a, &n) in &counts {
            if n % q[a] != 0 {
                return None;
            }
            match k {
                None => k = Some(n / q[a]),
                Some(k) if k != n / q[a] => return None,
                _ => {}
            }
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputResult {
    /// Time units per iteration.
    pub period: f64,
    /// Iterations per time unit.
    pub throughput: f64,
    /// `period == period_time / period_iterations`, as a reduced fraction.
    pub period_time: u64,
    pub period_iterations: u64,
    /// Iterations of the critical group completed before its steady state.
    pub transient_length: u64,
    pub steady_state_hash: u64,
}

impl ThroughputResult {
    fn from_fraction(time: u64, iterations: u64, transient: u64, hash: u64) -> Self {
        let g = super::graph::gcd(time, iterations).max(1);
        let (t, i) = (time / g, iterations / g);
        ThroughputResult {
            period: t as f64 / i as f64,
            throughput: i as f64 / t as f64,
            period_time: t,
            period_iterations: i,
            transient_length: transient,
            steady_state_hash: hash,
        }
    }

    /// Exact comparison of throughputs.
    pub fn cmp_throughput(&self, other: &ThroughputResult) -> std::cmp::Ordering {
        let a = self.period_iterations as u128 * other.period_time as u128;
        let b = other.period_iterations as u128 * self.period_time as u128;
        a.cmp(&b)
    }
}

/// Result of an analysis run with its by-products.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub result: ThroughputResult,
    /// Per channel, steady-state firings that waited on that channel's space,
    /// counted over the groups that set the period.
    pub blocked: Vec<u64>,
    /// Per-core orders recorded by list scheduling.
    pub schedule: Option<StaticOrderSchedule>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arbitration {
    SelfTimed,
    List,
    Static,
}

/// Throughput of self-timed execution.
///
/// With a platform, execution times and inter-core latencies come from it.
/// With schedules (which need a platform), each core fires only the actor at
/// its schedule cursor, one firing at a time.
pub fn self_timed_throughput(
    g: &Sdfg,
    schedules: Option<&StaticOrderSchedule>,
    platform: Option<&Platform>,
) -> Result<ThroughputResult, SdfgError> {
    self_timed_throughput_with(g, schedules, platform, &AnalysisOptions::default())
}

pub fn self_timed_throughput_with(
    g: &Sdfg,
    schedules: Option<&StaticOrderSchedule>,
    platform: Option<&Platform>,
    opts: &AnalysisOptions,
) -> Result<ThroughputResult, SdfgError> {
    match schedules {
        Some(s) => {
            let p = platform.ok_or_else(|| {
                SdfgError::Invalid("static-order schedules need a platform".into())
            })?;
            analyze(g, Arbitration::Static, Some(p), Some(s), opts).map(|a| a.result)
        }
        None => analyze(g, Arbitration::SelfTimed, platform, None, opts).map(|a| a.result),
    }
}

/// Self-timed throughput together with per-channel blocking counts.
pub fn analyze_blocking(
    g: &Sdfg,
    platform: Option<&Platform>,
    opts: &AnalysisOptions,
) -> Result<Analysis, SdfgError> {
    analyze(g, Arbitration::SelfTimed, platform, None, opts)
}

/// List-scheduled execution on the platform with exclusive cores, recording
/// the per-core firing order up to the first recurrent state.
pub fn list_schedule(
    g: &Sdfg,
    platform: &Platform,
    opts: &AnalysisOptions,
) -> Result<Analysis, SdfgError> {
    analyze(g, Arbitration::List, Some(platform), None, opts)
}

fn analyze(
    g: &Sdfg,
    arb: Arbitration,
    platform: Option<&Platform>,
    schedules: Option<&StaticOrderSchedule>,
    opts: &AnalysisOptions,
) -> Result<Analysis, SdfgError> {
    g.validate()?;
    if let Some(p) = platform {
        p.check(g)?;
    }
    let q = repetition_vector(g)?;
    let n = g.actors().len();
    if n == 0 {
        return Err(SdfgError::Invalid("graph has no actors".into()));
    }
    let exclusive = arb != Arbitration::SelfTimed;
    let core_of: Vec<usize> = match platform {
        Some(p) => p.core_of.clone(),
        None => vec![0; n],
    };
    let n_cores = platform.map_or(1, Platform::core_count);
    if let Some(s) = schedules {
        check_schedule(g, s, &core_of, n_cores)?;
    }

    let groups = groups(g, exclusive.then_some(core_of.as_slice()));
    let comp = weak_components(g);

    struct GroupRun {
        actors: Vec<usize>,
        channels: Vec<usize>,
        cores: Vec<usize>,
        refs: Vec<(usize, u64)>,
        outcome: Outcome,
    }
    let mut runs: Vec<GroupRun> = Vec::new();
    for members in groups {
        let mut local = vec![usize::MAX; n];
        for (i, &a) in members.iter().enumerate() {
            local[a] = i;
        }
        let channels: Vec<usize> = (0..g.channels().len())
            .filter(|&c| {
                let ch = g.channels()[c];
                local[ch.src] != usize::MAX && local[ch.dst] != usize::MAX
            })
            .collect();
        if arb == Arbitration::SelfTimed && channels.is_empty() {
            // nothing ever throttles a lone actor without inputs
            continue;
        }
        let mut cores: Vec<usize> = members.iter().map(|&a| core_of[a]).collect();
        cores.sort_unstable();
        cores.dedup();
        let core_local = |c: usize| cores.binary_search(&c).expect("member core");

        let mut refs = Vec::new();
        let mut comps_seen = Vec::new();
        for &a in &members {
            if !comps_seen.contains(&comp[a]) {
                comps_seen.push(comp[a]);
                refs.push((local[a], q.0[a]));
            }
        }
        let problem = Problem {
            names: members.iter().map(|&a| g.actors()[a].name.as_str()).collect(),
            exec: members
                .iter()
                .map(|&a| platform.map_or(g.actors()[a].exec_time, |p| p.exec_time[a]))
                .collect(),
            core: members.iter().map(|&a| core_local(core_of[a])).collect(),
            n_cores: cores.len(),
            channels: channels
                .iter()
                .map(|&c| {
                    let ch = g.channels()[c];
                    LocalChannel {
                        src: local[ch.src],
                        dst: local[ch.dst],
                        prod: ch.production,
                        cons: ch.consumption,
                        init: ch.initial_tokens,
                        cap: ch.capacity,
                        latency: platform.map_or(0, |p| p.channel_latency(ch.src, ch.dst)),
                    }
                })
                .collect(),
            refs: refs.clone(),
        };
        let local_orders: Vec<LocalOrder>;
        let mode = match arb {
            Arbitration::SelfTimed => Mode::SelfTimed,
            Arbitration::List => Mode::List,
            Arbitration::Static => {
                let s = schedules.expect("static mode has schedules");
                local_orders = cores
                    .iter()
                    .map(|&c| LocalOrder {
                        transient: s.cores[c].transient.iter().map(|&a| local[a]).collect(),
                        cycle: s.cores[c].cycle.iter().map(|&a| local[a]).collect(),
                    })
                    .collect();
                Mode::Static(&local_orders)
            }
        };
        let outcome = execute(&problem, mode, opts.state_budget)?;
        runs.push(GroupRun {
            actors: members,
            channels,
            cores,
            refs,
            outcome,
        });
    }

    if runs.is_empty() {
        return Err(SdfgError::Unbounded(g.actors()[0].name.clone()));
    }

    // Period of each (group, component) pair as time / iterations.
    let mut worst: Option<(u64, u64, u64)> = None;
    let mut periods: Vec<Vec<(u64, u64)>> = Vec::new();
    for run in &runs {
        let o = &run.outcome;
        let mut pr = Vec::new();
        for (i, &(_, qa)) in run.refs.iter().enumerate() {
            let time = o.period_time * qa;
            let iters = o.ref_delta[i];
            let transient = o.ref_before[i] / qa;
            pr.push((time, iters));
            let slower = match worst {
                None => true,
                Some((t, it, _)) => (time as u128) * (it as u128) > (t as u128) * (iters as u128),
            };
            if slower {
                worst = Some((time, iters, transient));
            }
        }
        periods.push(pr);
    }
    let (wt, wi, transient) = worst.expect("at least one group");
    let hash = fnv1a(&runs.iter().map(|r| r.outcome.hash).collect::<Vec<_>>());
    let result = ThroughputResult::from_fraction(wt, wi, transient, hash);

    let mut blocked = vec![0u64; g.channels().len()];
    for (run, pr) in runs.iter().zip(&periods) {
        let critical = pr
            .iter()
            .any(|&(t, i)| (t as u128) * (wi as u128) == (wt as u128) * (i as u128));
        if critical {
            for (lc, &c) in run.channels.iter().enumerate() {
                blocked[c] += run.outcome.blocked[lc];
            }
        }
    }

    let schedule = (arb == Arbitration::List).then(|| {
        let mut cores = vec![CoreSchedule::default(); n_cores];
        for run in &runs {
            for (lc, &core) in run.cores.iter().enumerate() {
                let o = &run.outcome.orders[lc];
                let to_global = |v: &[usize]| v.iter().map(|&a| run.actors[a]).collect::<Vec<_>>();
                cores[core] = compact(CoreSchedule {
                    transient: to_global(&o.transient),
                    cycle: to_global(&o.cycle),
                });
            }
        }
        StaticOrderSchedule { cores }
    });

    Ok(Analysis {
        result,
        blocked,
        schedule,
    })
}

/// Shortest equivalent representation of the same infinite firing sequence:
/// the cycle is reduced to its primitive root, then trailing transient
/// entries that repeat the cycle are folded into it.
pub(crate) fn compact(mut s: CoreSchedule) -> CoreSchedule {
    let len = s.cycle.len();
    if len > 0 {
        let root = (1..=len)
            .find(|&p| len.is_multiple_of(p) && (p..len).all(|i| s.cycle[i] == s.cycle[i - p]))
            .expect("the full cycle is a period of itself");
        s.cycle.truncate(root);
        while let Some(&last) = s.transient.last() {
            if last != *s.cycle.last().expect("non-empty") {
                break;
            }
            s.transient.pop();
            s.cycle.rotate_right(1);
        }
    }
    s
}

fn check_schedule(
    g: &Sdfg,
    s: &StaticOrderSchedule,
    core_of: &[usize],
    n_cores: usize,
) -> Result<(), SdfgError> {
    if s.cores.len() != n_cores {
        return Err(SdfgError::Invalid(format!(
            "schedule covers {} cores, platform has {n_cores}",
            s.cores.len()
        )));
    }
    let n = g.actors().len();
    let mut in_cycle = vec![false; n];
    for (core, cs) in s.cores.iter().enumerate() {
        for &a in cs.transient.iter().chain(&cs.cycle) {
            if a >= n || core_of[a] != core {
                return Err(SdfgError::Invalid(format!(
                    "schedule of core {core} lists an actor not mapped to it"
                )));
            }
        }
        for &a in &cs.cycle {
            in_cycle[a] = true;
        }
    }
    if let Some(a) = in_cycle.iter().position(|&x| !x) {
        return Err(SdfgError::Invalid(format!(
            "actor {} is missing from its core's steady-state cycle",
            g.actors()[a].name
        )));
    }
    Ok(())
}

/// Mutually constraining actor groups, each sorted, ordered by lowest actor.
fn groups(g: &Sdfg, core_of: Option<&[usize]>) -> Vec<Vec<usize>> {
    let n = g.actors().len();
    let mut adj = vec![Vec::new(); n];
    for c in g.channels() {
        adj[c.src].push(c.dst);
        if c.capacity.is_some() {
            adj[c.dst].push(c.src);
        }
    }
    if let Some(core_of) = core_of {
        let cores = core_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut by_core = vec![Vec::new(); cores];
        for (a, &c) in core_of.iter().enumerate() {
            by_core[c].push(a);
        }
        for members in by_core {
            for w in members.windows(2) {
                adj[w[0]].push(w[1]);
                adj[w[1]].push(w[0]);
            }
        }
    }
    let mut comps = tarjan(&adj);
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Strongly connected components, iterative.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("on stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
    }
    out
}
