// SPDX-License-Identifier: Apache-2.0
use serde::Serialize;

use crate::error::MappingError;
use crate::graph::HardwareGraph;
use crate::partition::ClusteredSnnGraph;
use crate::sdfg::{repetition_vector, AnalysisOptions, Platform, Sdfg};

/// Share of each core's time given to the mapped application, as a
/// slowdown factor on execution times.
pub const DEFAULT_TIME_WHEEL_FACTOR: u64 = 2;

/// Crossbar demand of one cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClusterDemand {
    pub neurons: usize,
    pub presynaptic: usize,
}

pub fn cluster_demands(cg: &ClusteredSnnGraph) -> Vec<ClusterDemand> {
    cg.clusters
        .iter()
        .map(|c| ClusterDemand {
            neurons: c.size(),
            presynaptic: c.presynaptic,
        })
        .collect()
}

/// Cluster-to-core assignment: each cluster sits on exactly one core.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MappingMatrix {
    core_of: Vec<usize>,
    core_count: usize,
}

impl MappingMatrix {
    pub fn new(core_of: Vec<usize>, core_count: usize) -> Result<Self, MappingError> {
        if let Some(&c) = core_of.iter().find(|&&c| c >= core_count) {
            return Err(MappingError::Infeasible(format!(
                "core {c} out of range for {core_count} cores"
            )));
        }
        Ok(MappingMatrix {
            core_of,
            core_count,
        })
    }

    pub fn core_of(&self) -> &[usize] {
        &self.core_of
    }

    pub fn cluster_count(&self) -> usize {
        self.core_of.len()
    }

    pub fn core_count(&self) -> usize {
        self.core_count
    }

    pub fn clusters_on(&self, core: usize) -> Vec<usize> {
        (0..self.core_of.len())
            .filter(|&c| self.core_of[c] == core)
            .collect()
    }

    /// Dense 0/1 matrix, clusters by cores.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.core_of
            .iter()
            .map(|&t| (0..self.core_count).map(|j| u8::from(j == t)).collect())
            .collect()
    }
}

/// Everything needed to judge and evaluate mappings of one SDFG onto one
/// platform.
///
/// Capacity rules: a cluster must fit the crossbar of its core on its own
/// (clusters sharing a core are time-multiplexed on it). Per core, the
/// number of inter-core channels entering or leaving must respect the
/// connection caps, and the tokens those channels carry per iteration must
/// respect the bandwidth caps. Channels may only cross between cores that
/// are connected by some route.
#[derive(Debug, Clone)]
pub struct MappingContext<'a> {
    pub sdfg: &'a Sdfg,
    pub hw: &'a HardwareGraph,
    pub demands: Vec<ClusterDemand>,
    pub time_wheel_factor: u64,
    pub options: AnalysisOptions,
    q: Vec<u64>,
    latency: Vec<Vec<Option<u64>>>,
}

impl<'a> MappingContext<'a> {
    /// `demands` defaults to zero demand per actor when the SDFG did not come
    /// from a clustered graph.
    pub fn new(
        sdfg: &'a Sdfg,
        hw: &'a HardwareGraph,
        demands: Option<Vec<ClusterDemand>>,
        time_wheel_factor: u64,
    ) -> Result<Self, MappingError> {
        let n = sdfg.actors().len();
        let demands = demands.unwrap_or_else(|| vec![ClusterDemand::default(); n]);
        if demands.len() != n {
            return Err(MappingError::InvalidConfig(format!(
                "{} cluster demands for {n} actors",
                demands.len()
            )));
        }
        if hw.cores().is_empty() {
            return Err(MappingError::Infeasible("platform has no cores".into()));
        }
        if time_wheel_factor == 0 {
            return Err(MappingError::InvalidConfig("time wheel factor must be at least 1".into()));
        }
        let q = repetition_vector(sdfg)?.0;
        Ok(MappingContext {
            sdfg,
            hw,
            demands,
            time_wheel_factor,
            options: AnalysisOptions::default(),
            q,
            latency: hw.latency_matrix(),
        })
    }

    pub fn with_options(mut self, options: AnalysisOptions) -> Self {
        self.options = options;
        self
    }

    pub fn cluster_count(&self) -> usize {
        self.sdfg.actors().len()
    }

    pub fn core_count(&self) -> usize {
        self.hw.cores().len()
    }

    pub fn repetitions(&self) -> &[u64] {
        &self.q
    }

    pub fn fits(&self, cluster: usize, core: usize) -> bool {
        let d = self.demands[cluster];
        let m = self.hw.cores()[core].crossbar_dim;
        d.neurons <= m && d.presynaptic <= m
    }

    /// Total amount by which caps are exceeded; zero for a feasible mapping
    /// whose clusters all fit their cores.
    pub fn excess(&self, core_of: &[usize]) -> u64 {
        self.violations(core_of).0
    }

    /// Excess together with the cores involved in a violation.
    fn violations(&self, core_of: &[usize]) -> (u64, Vec<bool>) {
        let cores = self.core_count();
        let mut in_conn = vec![0u64; cores];
        let mut out_conn = vec![0u64; cores];
        let mut in_bw = vec![0u64; cores];
        let mut out_bw = vec![0u64; cores];
        let mut excess = 0u64;
        let mut flags = vec![false; cores];
        for c in self.sdfg.channels() {
            let (s, d) = (core_of[c.src], core_of[c.dst]);
            if s == d {
                continue;
            }
            if self.latency[s][d].is_none() {
                excess += 1;
                flags[s] = true;
                flags[d] = true;
            }
            let tokens = c.production * self.q[c.src];
            out_conn[s] += 1;
            in_conn[d] += 1;
            out_bw[s] += tokens;
            in_bw[d] += tokens;
        }
        for (t, core) in self.hw.cores().iter().enumerate() {
            let over = |have: u64, cap: Option<u64>| cap.map_or(0, |cap| have.saturating_sub(cap));
            let e = over(in_conn[t], core.in_connections.map(|x| x as u64))
                + over(out_conn[t], core.out_connections.map(|x| x as u64))
                + over(in_bw[t], core.in_bandwidth)
                + over(out_bw[t], core.out_bandwidth);
            if e > 0 {
                flags[t] = true;
                excess += e;
            }
        }
        (excess, flags)
    }

    /// Why `m` violates a mapping constraint, if it does.
    pub fn check(&self, m: &MappingMatrix) -> Result<(), String> {
        if m.cluster_count() != self.cluster_count() || m.core_count() != self.core_count() {
            return Err("mapping dimensions do not match the problem".into());
        }
        for (c, &t) in m.core_of().iter().enumerate() {
            if !self.fits(c, t) {
                return Err(format!(
                    "cluster {} does not fit the crossbar of core {}",
                    self.sdfg.actors()[c].name,
                    self.hw.cores()[t].name
                ));
            }
        }
        match self.excess(m.core_of()) {
            0 => Ok(()),
            e => Err(format!("connection, bandwidth or routing caps exceeded by {e}")),
        }
    }

    /// Execution times and latencies of the mapped graph.
    pub fn platform(&self, m: &MappingMatrix) -> Result<Platform, MappingError> {
        self.check(m).map_err(MappingError::Infeasible)?;
        let cores = self.hw.cores();
        Ok(Platform {
            core_of: m.core_of().to_vec(),
            exec_time: m
                .core_of()
                .iter()
                .map(|&t| cores[t].exec_time * self.time_wheel_factor)
                .collect(),
            latency: self
                .latency
                .iter()
                .map(|row| row.iter().map(|x| x.unwrap_or(0)).collect())
                .collect(),
        })
    }
}

/// Turn a particle position (clusters by cores, row-major) into a feasible
/// mapping.
///
/// Each cluster goes to its highest-scoring core that fits it (ties to the
/// lowest core id). While caps are exceeded, the lowest-scoring cluster on
/// an offending core is moved to the fitting core with the next-highest
/// score, taking the first such move that strictly reduces the excess.
pub fn decode_position(theta: &[f64], ctx: &MappingContext<'_>) -> Result<MappingMatrix, MappingError> {
    let (nc, nt) = (ctx.cluster_count(), ctx.core_count());
    if theta.len() != nc * nt {
        return Err(MappingError::InvalidConfig(format!(
            "position has {} components, expected {}",
            theta.len(),
            nc * nt
        )));
    }
    // cores of each cluster by descending score, ties to lower id
    let ranked: Vec<Vec<usize>> = (0..nc)
        .map(|c| {
            let row = &theta[c * nt..(c + 1) * nt];
            let mut cores: Vec<usize> = (0..nt).filter(|&t| ctx.fits(c, t)).collect();
            cores.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            cores
        })
        .collect();
    let mut core_of = Vec::with_capacity(nc);
    for (c, r) in ranked.iter().enumerate() {
        match r.first() {
            Some(&t) => core_of.push(t),
            None => {
                return Err(MappingError::Infeasible(format!(
                    "cluster {} fits no core",
                    ctx.sdfg.actors()[c].name
                )))
            }
        }
    }

    let mut excess = ctx.excess(&core_of);
    while excess > 0 {
        let (_, overfull) = ctx.violations(&core_of);
        let mut movers: Vec<usize> = (0..nc).filter(|&c| overfull[core_of[c]]).collect();
        movers.sort_by(|&a, &b| {
            theta[a * nt + core_of[a]]
                .total_cmp(&theta[b * nt + core_of[b]])
                .then(a.cmp(&b))
        });
        let mut improved = false;
        'search: for &c in &movers {
            let from = core_of[c];
            for &t in &ranked[c] {
                if t == from {
                    continue;
                }
                core_of[c] = t;
                let e = ctx.excess(&core_of);
                if e < excess {
                    excess = e;
                    improved = true;
                    break 'search;
                }
                core_of[c] = from;
            }
        }
        if !improved {
            return Err(MappingError::Infeasible(format!(
                "platform caps exceeded by {excess} and no single move helps"
            )));
        }
    }
    MappingMatrix::new(core_of, nt)
}
