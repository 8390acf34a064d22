// SPDX-License-Identifier: Apache-2.0
use serde::Serialize;

use super::graph::Sdfg;
use super::repetition::repetition_vector;
use crate::error::SdfgError;

/// State in which abstract execution got stuck.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadlockReport {
    /// Tokens per channel when execution stalled.
    pub tokens: Vec<u64>,
    /// Firings completed per actor.
    pub fired: Vec<u64>,
    /// Actors with firings left that cannot fire.
    pub starving: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DeadlockCheck {
    Ok,
    Deadlock(DeadlockReport),
}

impl DeadlockCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, DeadlockCheck::Ok)
    }
}

/// Zero-time execution of one iteration, lowest ready actor first. Bounded
/// channels need free space for the producer, as with a reverse channel.
pub fn check_deadlock(g: &Sdfg) -> Result<DeadlockCheck, SdfgError> {
    let q = repetition_vector(g)?;
    let chans = g.channels();
    let mut tokens: Vec<u64> = chans.iter().map(|c| c.initial_tokens).collect();
    let mut free: Vec<u64> = chans
        .iter()
        .map(|c| c.capacity.map_or(0, |cap| cap - c.initial_tokens))
        .collect();
    let n = g.actors().len();
    let mut inputs = vec![Vec::new(); n];
    let mut outputs = vec![Vec::new(); n];
    for (i, c) in chans.iter().enumerate() {
        inputs[c.dst].push(i);
        outputs[c.src].push(i);
    }
    let can_fire = |a: usize, tokens: &[u64], free: &[u64]| {
        inputs[a].iter().all(|&c| tokens[c] >= chans[c].consumption)
            && outputs[a]
                .iter()
                .all(|&c| chans[c].capacity.is_none() || free[c] >= chans[c].production)
    };
    let mut fired = vec![0u64; n];
    loop {
        let mut progress = false;
        for a in 0..n {
            while fired[a] < q.0[a] && can_fire(a, &tokens, &free) {
                for &c in &inputs[a] {
                    tokens[c] -= chans[c].consumption;
                }
                for &c in &outputs[a] {
                    if chans[c].capacity.is_some() {
                        free[c] -= chans[c].production;
                    }
                }
                for &c in &outputs[a] {
                    tokens[c] += chans[c].production;
                }
                for &c in &inputs[a] {
                    if chans[c].capacity.is_some() {
                        free[c] += chans[c].consumption;
                    }
                }
                fired[a] += 1;
                progress = true;
            }
        }
        if fired == q.0 {
            return Ok(DeadlockCheck::Ok);
        }
        if !progress {
            let starving = (0..n).filter(|&a| fired[a] < q.0[a]).collect();
            return Ok(DeadlockCheck::Deadlock(DeadlockReport {
                tokens,
                fired,
                starving,
            }));
        }
    }
}
