// SPDX-License-Identifier: Apache-2.0
//! Balance equations and the repetition vector.

use std::collections::VecDeque;

use super::graph::Sdfg;
use crate::error::SdfgError;

/// Smallest positive firing counts per actor that return every channel to
/// its initial token count. Each weakly connected component is reduced on
/// its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitionVector(pub Vec<u64>);

impl RepetitionVector {
    pub fn get(&self, actor: usize) -> u64 {
        self.0[actor]
    }
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Positive rational as a reduced fraction.
#[derive(Debug, Clone, Copy)]
struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    fn new(num: u128, den: u128) -> Self {
        let g = gcd128(num, den);
        Frac {
            num: num / g,
            den: den / g,
        }
    }
}

/// Weakly connected components, numbered by lowest actor.
pub(crate) fn weak_components(g: &Sdfg) -> Vec<usize> {
    let n = g.actors().len();
    let mut adj = vec![Vec::new(); n];
    for c in g.channels() {
        adj[c.src].push(c.dst);
        adj[c.dst].push(c.src);
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = next;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
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

pub fn repetition_vector(g: &Sdfg) -> Result<RepetitionVector, SdfgError> {
    let n = g.actors().len();
    // (channel, neighbour, factor num, factor den): q(neighbour) = q(self) * num / den
    let mut adj: Vec<Vec<(usize, usize, u128, u128)>> = vec![Vec::new(); n];
    for (i, c) in g.channels().iter().enumerate() {
        let (p, k) = (c.production as u128, c.consumption as u128);
        adj[c.src].push((i, c.dst, p, k));
        adj[c.dst].push((i, c.src, k, p));
    }
    let inconsistent = |ch: usize| {
        let c = g.channels()[ch];
        SdfgError::Inconsistent {
            channel: ch,
            src: g.actors()[c.src].name.clone(),
            dst: g.actors()[c.dst].name.clone(),
        }
    };

    let mut rate: Vec<Option<Frac>> = vec![None; n];
    let mut q = vec![0u64; n];
    for root in 0..n {
        if rate[root].is_some() {
            continue;
        }
        rate[root] = Some(Frac::new(1, 1));
        let mut members = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let ru = rate[u].expect("visited");
            for &(ch, v, num, den) in &adj[u] {
                let expect = Frac::new(ru.num * num, ru.den * den);
                match rate[v] {
                    None => {
                        rate[v] = Some(expect);
                        members.push(v);
                        queue.push_back(v);
                    }
                    Some(rv) => {
                        if rv.num * expect.den != expect.num * rv.den {
                            return Err(inconsistent(ch));
                        }
                    }
                }
            }
        }
        let lcm_den = members.iter().fold(1u128, |acc, &m| {
            let d = rate[m].expect("visited").den;
            acc / gcd128(acc, d) * d
        });
        let scaled: Vec<u128> = members
            .iter()
            .map(|&m| {
                let r = rate[m].expect("visited");
                r.num * (lcm_den / r.den)
            })
            .collect();
        let common = scaled.iter().fold(0u128, |acc, &s| gcd128(acc, s));
        for (&m, &s) in members.iter().zip(&scaled) {
            q[m] = u64::try_from(s / common)
                .map_err(|_| SdfgError::Invalid("repetition vector overflows u64".into()))?;
        }
    }
    Ok(RepetitionVector(q))
}
