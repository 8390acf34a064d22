// SPDX-License-Identifier: Apache-2.0
//! Discrete-event execution of one strongly coupled group of actors.
//!
//! Firing start consumes input tokens and claims output space; firing end
//! produces output tokens (after link latency) and frees input space. This
//! matches the usual reverse-channel encoding of bounded FIFOs. The run stops
//! at the first recurrence of the full execution state, clock excluded.

use std::collections::HashMap;

use crate::error::SdfgError;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalChannel {
    pub src: usize,
    pub dst: usize,
    pub prod: u64,
    pub cons: u64,
    pub init: u64,
    pub cap: Option<u64>,
    pub latency: u64,
}

/// Static firing order of one core, in local actor ids.
#[derive(Debug, Clone, Default)]
pub(crate) struct LocalOrder {
    pub transient: Vec<usize>,
    pub cycle: Vec<usize>,
}

pub(crate) enum Mode<'a> {
    /// Fire every ready actor immediately, as often as it is ready.
    SelfTimed,
    /// One firing per core at a time; ready actors queue per core by
    /// (ready time, actor id).
    List,
    /// One firing per core at a time, in the given per-core order.
    Static(&'a [LocalOrder]),
}

pub(crate) struct Problem<'a> {
    pub names: Vec<&'a str>,
    pub exec: Vec<u64>,
    /// Local core per actor; ignored in self-timed mode.
    pub core: Vec<usize>,
    pub n_cores: usize,
    pub channels: Vec<LocalChannel>,
    /// Actors whose firing counts measure iterations, with their repetition
    /// entries.
    pub refs: Vec<(usize, u64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub period_time: u64,
    /// Firings of each reference actor before the steady state begins.
    pub ref_before: Vec<u64>,
    /// Firings of each reference actor within one steady-state period.
    pub ref_delta: Vec<u64>,
    pub hash: u64,
    /// Per channel, how often a ready-to-consume actor waited on its space
    /// during the steady state (self-timed mode only).
    pub blocked: Vec<u64>,
    /// Per core, the recorded firing order split at the recurrence (list
    /// mode only).
    pub orders: Vec<LocalOrder>,
}

struct Visit {
    time: u64,
    step: usize,
    refs: Vec<u64>,
    order_lens: Vec<usize>,
}

struct State<'p, 'a> {
    p: &'p Problem<'a>,
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    tokens: Vec<u64>,
    free: Vec<u64>,
    /// (remaining time, actor), kept sorted.
    active: Vec<(u64, usize)>,
    /// (remaining time, channel, amount), kept sorted.
    deliveries: Vec<(u64, usize, u64)>,
    busy: Vec<bool>,
    /// Per core: (ready time, actor), ordered.
    ready: Vec<Vec<(u64, usize)>>,
    queued: Vec<bool>,
    cursor: Vec<usize>,
    fired: Vec<u64>,
    orders: Vec<Vec<usize>>,
}

impl<'p, 'a> State<'p, 'a> {
    fn new(p: &'p Problem<'a>) -> Self {
        let n = p.exec.len();
        let mut inputs = vec![Vec::new(); n];
        let mut outputs = vec![Vec::new(); n];
        for (i, c) in p.channels.iter().enumerate() {
            inputs[c.dst].push(i);
            outputs[c.src].push(i);
        }
        State {
            p,
            inputs,
            outputs,
            tokens: p.channels.iter().map(|c| c.init).collect(),
            free: p
                .channels
                .iter()
                .map(|c| c.cap.map_or(0, |cap| cap - c.init))
                .collect(),
            active: Vec::new(),
            deliveries: Vec::new(),
            busy: vec![false; p.n_cores],
            ready: vec![Vec::new(); p.n_cores],
            queued: vec![false; n],
            cursor: vec![0; p.n_cores],
            fired: vec![0; n],
            orders: vec![Vec::new(); p.n_cores],
        }
    }

    fn has_inputs(&self, a: usize) -> bool {
        self.inputs[a]
            .iter()
            .all(|&c| self.tokens[c] >= self.p.channels[c].cons)
    }

    fn space_blocked(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.outputs[a].iter().copied().filter(|&c| {
            let ch = &self.p.channels[c];
            ch.cap.is_some() && self.free[c] < ch.prod
        })
    }

    fn can_fire(&self, a: usize) -> bool {
        self.has_inputs(a) && self.space_blocked(a).next().is_none()
    }

    fn start(&mut self, a: usize) {
        for &c in &self.inputs[a] {
            self.tokens[c] -= self.p.channels[c].cons;
        }
        for &c in &self.outputs[a] {
            let ch = &self.p.channels[c];
            if ch.cap.is_some() {
                self.free[c] -= ch.prod;
            }
        }
        let pos = self.active.partition_point(|&x| x < (self.p.exec[a], a));
        self.active.insert(pos, (self.p.exec[a], a));
        self.fired[a] += 1;
    }

    fn complete(&mut self, a: usize) {
        for &c in &self.outputs[a] {
            let ch = &self.p.channels[c];
            if ch.latency == 0 {
                self.tokens[c] += ch.prod;
            } else {
                let d = (ch.latency, c, ch.prod);
                let pos = self.deliveries.partition_point(|&x| x < d);
                self.deliveries.insert(pos, d);
            }
        }
        for &c in &self.inputs[a] {
            let ch = &self.p.channels[c];
            if ch.cap.is_some() {
                self.free[c] += ch.cons;
            }
        }
    }

    fn key(&self) -> Vec<u64> {
        let mut k = Vec::with_capacity(
            2 * self.tokens.len() + 2 * self.active.len() + 3 * self.deliveries.len() + 8,
        );
        k.extend_from_slice(&self.tokens);
        for (c, ch) in self.p.channels.iter().enumerate() {
            if ch.cap.is_some() {
                k.push(self.free[c]);
            }
        }
        k.push(self.active.len() as u64);
        for &(r, a) in &self.active {
            k.extend([r, a as u64]);
        }
        k.push(self.deliveries.len() as u64);
        for &(r, c, m) in &self.deliveries {
            k.extend([r, c as u64, m]);
        }
        k.extend(self.cursor.iter().map(|&c| c as u64));
        for q in &self.ready {
            k.push(q.len() as u64);
            k.extend(q.iter().map(|&(_, a)| a as u64));
        }
        k
    }
}

pub(crate) fn fnv1a(words: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn execute(p: &Problem<'_>, mode: Mode<'_>, budget: usize) -> Result<Outcome, SdfgError> {
    let n = p.exec.len();
    let mut s = State::new(p);
    let mut seen: HashMap<Vec<u64>, Visit> = HashMap::new();
    let mut blocked_log: Vec<(usize, usize)> = Vec::new();
    let mut time: u64 = 0;
    let track_blocking = matches!(mode, Mode::SelfTimed);
    let exclusive = !matches!(mode, Mode::SelfTimed);

    for step in 0.. {
        // Completions due now. Token updates commute, so order is immaterial.
        while let Some(&(0, a)) = s.active.first() {
            s.active.remove(0);
            s.complete(a);
            if exclusive {
                s.busy[p.core[a]] = false;
            }
        }
        while let Some(&(0, c, m)) = s.deliveries.first() {
            s.deliveries.remove(0);
            s.tokens[c] += m;
        }

        match mode {
            Mode::SelfTimed => {
                for a in 0..n {
                    while s.can_fire(a) {
                        s.start(a);
                    }
                }
            }
            Mode::List => {
                enqueue_ready(&mut s, time);
                for core in 0..p.n_cores {
                    if !s.busy[core] && !s.ready[core].is_empty() {
                        let (_, a) = s.ready[core].remove(0);
                        s.queued[a] = false;
                        s.start(a);
                        s.busy[core] = true;
                        s.orders[core].push(a);
                    }
                }
                enqueue_ready(&mut s, time);
            }
            Mode::Static(orders) => {
                for core in 0..p.n_cores {
                    if s.busy[core] {
                        continue;
                    }
                    let o = &orders[core];
                    let len = o.transient.len() + o.cycle.len();
                    if s.cursor[core] >= len {
                        continue;
                    }
                    let a = if s.cursor[core] < o.transient.len() {
                        o.transient[s.cursor[core]]
                    } else {
                        o.cycle[s.cursor[core] - o.transient.len()]
                    };
                    if s.can_fire(a) {
                        s.start(a);
                        s.busy[core] = true;
                        s.cursor[core] += 1;
                        if s.cursor[core] == len {
                            s.cursor[core] = o.transient.len();
                        }
                    }
                }
            }
        }

        if track_blocking {
            for a in 0..n {
                if s.has_inputs(a) {
                    for c in s.space_blocked(a) {
                        blocked_log.push((step, c));
                    }
                }
            }
        }

        if s.active.is_empty() && s.deliveries.is_empty() {
            return Err(deadlock(&s, time));
        }

        let key = s.key();
        if let Some(v) = seen.get(&key) {
            let ref_now: Vec<u64> = p.refs.iter().map(|&(a, _)| s.fired[a]).collect();
            let ref_delta: Vec<u64> = ref_now.iter().zip(&v.refs).map(|(a, b)| a - b).collect();
            if let Some(i) = ref_delta.iter().position(|&d| d == 0) {
                return Err(SdfgError::Deadlock {
                    time,
                    actors: vec![p.names[p.refs[i].0].to_string()],
                });
            }
            let mut blocked = vec![0u64; p.channels.len()];
            for &(st, c) in &blocked_log {
                if st >= v.step {
                    blocked[c] += 1;
                }
            }
            let orders = s
                .orders
                .iter()
                .zip(&v.order_lens)
                .map(|(o, &l)| LocalOrder {
                    transient: o[..l].to_vec(),
                    cycle: o[l..].to_vec(),
                })
                .collect();
            return Ok(Outcome {
                period_time: time - v.time,
                ref_before: v.refs.clone(),
                ref_delta,
                hash: fnv1a(&key),
                blocked,
                orders,
            });
        }
        if seen.len() >= budget {
            return Err(SdfgError::BudgetExceeded(budget));
        }
        seen.insert(
            key,
            Visit {
                time,
                step,
                refs: p.refs.iter().map(|&(a, _)| s.fired[a]).collect(),
                order_lens: s.orders.iter().map(Vec::len).collect(),
            },
        );

        let dt = s
            .active
            .iter()
            .map(|x| x.0)
            .chain(s.deliveries.iter().map(|x| x.0))
            .min()
            .expect("something is in flight");
        time += dt;
        s.active.iter_mut().for_each(|x| x.0 -= dt);
        s.deliveries.iter_mut().for_each(|x| x.0 -= dt);
    }
    unreachable!("the step loop only exits by returning")
}

fn enqueue_ready(s: &mut State<'_, '_>, time: u64) {
    for a in 0..s.p.exec.len() {
        if !s.queued[a] && s.can_fire(a) {
            let q = &mut s.ready[s.p.core[a]];
            let pos = q.partition_point(|&x| x < (time, a));
            q.insert(pos, (time, a));
            s.queued[a] = true;
        }
    }
}

fn deadlock(s: &State<'_, '_>, time: u64) -> SdfgError {
    let mut actors: Vec<String> = (0..s.p.exec.len())
        .filter(|&a| !s.has_inputs(a))
        .map(|a| s.p.names[a].to_string())
        .collect();
    if actors.is_empty() {
        actors = (0..s.p.exec.len())
            .filter(|&a| !s.can_fire(a))
            .map(|a| s.p.names[a].to_string())
            .collect();
    }
    if actors.is_empty() {
        actors = s.p.names.iter().map(|n| n.to_string()).collect();
    }
    SdfgError::Deadlock { time, actors }
}
