// SPDX-License-Identifier: Apache-2.0
use std::collections::HashSet;

use crate::error::GraphError;

/// One neuromorphic core: a crossbar plus its interconnect caps.
///
/// Connection caps count inter-core channels; bandwidth caps are in tokens
/// per iteration period. `None` means unlimited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Core {
    pub name: String,
    /// Maximum pre- and post-synaptic neurons of one crossbar.
    pub crossbar_dim: usize,
    /// Time units to fire one cluster.
    pub exec_time: u64,
    pub in_connections: Option<usize>,
    pub out_connections: Option<usize>,
    pub in_bandwidth: Option<u64>,
    pub out_bandwidth: Option<u64>,
}

impl Core {
    pub fn new(name: impl Into<String>, crossbar_dim: usize, exec_time: u64) -> Self {
        Core {
            name: name.into(),
            crossbar_dim,
            exec_time,
            in_connections: None,
            out_connections: None,
            in_bandwidth: None,
            out_bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub src: usize,
    pub dst: usize,
    pub latency: u64,
}

/// Cores and directed links of a many-core platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareGraph {
    cores: Vec<Core>,
    links: Vec<Link>,
}

impl HardwareGraph {
    pub fn new(cores: Vec<Core>, links: Vec<Link>) -> Result<Self, GraphError> {
        let hw = HardwareGraph { cores, links };
        hw.validate()?;
        Ok(hw)
    }

    /// `n` identical cores connected all-to-all with the same latency.
    pub fn uniform(n: usize, crossbar_dim: usize, exec_time: u64, latency: u64) -> Self {
        let cores = (0..n)
            .map(|i| Core::new(format!("T{i}"), crossbar_dim, exec_time))
            .collect();
        let mut links = Vec::new();
        for src in 0..n {
            for dst in 0..n {
                if src != dst {
                    links.push(Link { src, dst, latency });
                }
            }
        }
        HardwareGraph { cores, links }
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn core_index(&self, name: &str) -> Option<usize> {
        self.cores.iter().position(|c| c.name == name)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        const CTX: &str = "hardware graph";
        let mut names = HashSet::new();
        for c in &self.cores {
            if c.name.is_empty() || !names.insert(c.name.as_str()) {
                return Err(GraphError::invalid(
                    CTX,
                    format!("empty or duplicate core id {:?}", c.name),
                ));
            }
            if c.crossbar_dim == 0 {
                return Err(GraphError::invalid(
                    CTX,
                    format!("core {} has crossbar_dim 0", c.name),
                ));
            }
            if c.exec_time == 0 {
                return Err(GraphError::invalid(
                    CTX,
                    format!("core {} has exec_time 0", c.name),
                ));
            }
        }
        for l in &self.links {
            if l.src >= self.cores.len() || l.dst >= self.cores.len() {
                return Err(GraphError::invalid(CTX, "link references an undeclared core"));
            }
        }
        Ok(())
    }

    /// All-pairs shortest link latency; `None` where no route exists.
    /// The diagonal is zero.
    #[allow(clippy::needless_range_loop)]
    pub fn latency_matrix(&self) -> Vec<Vec<Option<u64>>> {
        let n = self.cores.len();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for l in &self.links {
            let cur = &mut d[l.src][l.dst];
            if cur.is_none_or(|c| l.latency < c) {
                *cur = Some(l.latency);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i][k] else { continue };
                for j in 0..n {
                    if let Some(kj) = d[k][j] {
                        let via = ik + kj;
                        if d[i][j].is_none_or(|c| via < c) {
                            d[i][j] = Some(via);
                        }
                    }
                }
            }
        }
        d
    }
}
