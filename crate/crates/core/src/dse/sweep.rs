// SPDX-License-Identifier: Apache-2.0
//! Buffer-size sweep guided by the channel that blocks its producer most.

use serde::{Deserialize, Serialize};

use crate::error::SdfgError;
use crate::sdfg::{
    analyze_blocking, check_deadlock, self_timed_throughput_with, set_buffer_allocation,
    AnalysisOptions, BufferAllocation, DeadlockCheck, Platform, Sdfg, ThroughputResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Stop after this many consecutive steps without a throughput gain.
    pub plateau: usize,
    /// Hard cap on the number of increments.
    pub max_steps: usize,
    /// Enumerate every allocation up to `exhaustive_levels` quanta above the
    /// minimum instead of the guided sweep. Only for graphs with at most
    /// [`EXHAUSTIVE_CHANNEL_LIMIT`] bounded channels.
    pub exhaustive: bool,
    pub exhaustive_levels: u64,
}

pub const EXHAUSTIVE_CHANNEL_LIMIT: usize = 5;

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            plateau: 3,
            max_steps: 64,
            exhaustive: false,
            exhaustive_levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub allocation: BufferAllocation,
    pub total_buffer: u64,
    pub throughput: ThroughputResult,
}

/// Capacities equal to each data channel's minimum; self-loops keep theirs.
pub fn minimum_allocation(g: &Sdfg) -> BufferAllocation {
    BufferAllocation(
        g.channels()
            .iter()
            .map(|c| {
                if c.is_self_loop() {
                    c.capacity
                } else {
                    Some(c.min_capacity())
                }
            })
            .collect(),
    )
}

fn with_data_channels(g: &Sdfg, f: impl Fn(usize) -> Option<u64>) -> BufferAllocation {
    BufferAllocation(
        g.channels()
            .iter()
            .enumerate()
            .map(|(i, c)| if c.is_self_loop() { c.capacity } else { f(i) })
            .collect(),
    )
}

/// Smallest allocation of the form `minimum + k * quantum` (same `k` on
/// every data channel) that does not deadlock.
fn first_live_allocation(g: &Sdfg, max_steps: usize) -> Result<BufferAllocation, SdfgError> {
    let min = minimum_allocation(g);
    let mut last = None;
    for k in 0..=max_steps as u64 {
        let alloc = with_data_channels(g, |i| {
            min.0[i].map(|m| m + k * g.channels()[i].quantum())
        });
        match check_deadlock(&set_buffer_allocation(g, &alloc)?)? {
            DeadlockCheck::Ok => return Ok(alloc),
            DeadlockCheck::Deadlock(report) => {
                if k == 0 {
                    log::warn!(
                        "minimum buffer allocation deadlocks; starving actors {:?}",
                        report
                            .starving
                            .iter()
                            .map(|&a| g.actors()[a].name.as_str())
                            .collect::<Vec<_>>()
                    );
                }
                last = Some(report);
            }
        }
    }
    let report = last.expect("at least one attempt");
    Err(SdfgError::Deadlock {
        time: 0,
        actors: report
            .starving
            .iter()
            .map(|&a| g.actors()[a].name.clone())
            .collect(),
    })
}

/// Trade buffer space for throughput.
///
/// Starts from the minimum feasible allocation (or the smallest uniform
/// enlargement that is deadlock-free) and repeatedly adds one rate quantum
/// to the channel whose lack of space blocked the most firings in the
/// steady state. Stops once `plateau` steps in a row bring no gain, the
/// unbounded-buffer throughput is reached, or no channel blocks. The
/// returned series has strictly increasing total buffer.
pub fn sweep_buffers(
    g: &Sdfg,
    platform: Option<&Platform>,
    cfg: &SweepConfig,
    opts: &AnalysisOptions,
) -> Result<Vec<SweepPoint>, SdfgError> {
    if cfg.exhaustive {
        return exhaustive_sweep(g, platform, cfg, opts);
    }
    let mut alloc = first_live_allocation(g, cfg.max_steps)?;
    let unbounded = {
        let free = set_buffer_allocation(g, &with_data_channels(g, |_| None))?;
        match self_timed_throughput_with(&free, None, platform, opts) {
            Ok(r) => Some(r),
            Err(SdfgError::Unbounded(_)) => None,
            Err(e) => return Err(e),
        }
    };

    let mut points = Vec::new();
    let mut best: Option<ThroughputResult> = None;
    let mut stale = 0;
    for _ in 0..=cfg.max_steps {
        let bounded = set_buffer_allocation(g, &alloc)?;
        let analysis = analyze_blocking(&bounded, platform, opts)?;
        let r = analysis.result.clone();
        let improved = best
            .as_ref()
            .is_none_or(|b| r.cmp_throughput(b) == std::cmp::Ordering::Greater);
        points.push(SweepPoint {
            total_buffer: alloc.total(g).expect("data channels are bounded"),
            allocation: alloc.clone(),
            throughput: r.clone(),
        });
        if improved {
            best = Some(r.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.plateau {
                break;
            }
        }
        if unbounded
            .as_ref()
            .is_some_and(|u| r.cmp_throughput(u) != std::cmp::Ordering::Less)
        {
            break;
        }
        let bottleneck = g
            .data_channels()
            .filter(|&c| analysis.blocked[c] > 0)
            .max_by(|&a, &b| analysis.blocked[a].cmp(&analysis.blocked[b]).then(b.cmp(&a)));
        let Some(c) = bottleneck else { break };
        let cap = alloc.0[c].as_mut().expect("data channels are bounded");
        *cap += g.channels()[c].quantum();
    }
    Ok(points)
}

fn exhaustive_sweep(
    g: &Sdfg,
    platform: Option<&Platform>,
    cfg: &SweepConfig,
    opts: &AnalysisOptions,
) -> Result<Vec<SweepPoint>, SdfgError> {
    let data: Vec<usize> = g.data_channels().collect();
    if data.len() > EXHAUSTIVE_CHANNEL_LIMIT {
        return Err(SdfgError::Invalid(format!(
            "exhaustive sweep supports at most {EXHAUSTIVE_CHANNEL_LIMIT} channels, graph has {}",
            data.len()
        )));
    }
    let min = minimum_allocation(g);
    let levels = cfg.exhaustive_levels + 1;
    let mut points = Vec::new();
    let total = levels.pow(data.len() as u32);
    for code in 0..total {
        let mut alloc = min.clone();
        let mut rest = code;
        for &c in &data {
            let k = rest % levels;
            rest /= levels;
            alloc.0[c] = min.0[c].map(|m| m + k * g.channels()[c].quantum());
        }
        let bounded = set_buffer_allocation(g, &alloc)?;
        if !check_deadlock(&bounded)?.is_ok() {
            continue;
        }
        let r = self_timed_throughput_with(&bounded, None, platform, opts)?;
        points.push(SweepPoint {
            total_buffer: alloc.total(g).expect("bounded"),
            allocation: alloc,
            throughput: r,
        });
    }
    points.sort_by_key(|p| p.total_buffer);
    Ok(points)
}
