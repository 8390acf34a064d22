// SPDX-License-Identifier: Apache-2.0
//! TOML file formats for SNN and hardware graphs.
//!
//! SNN graph:
//!
//! ```toml
//! format_version = 1
//!
//! [[neuron]]
//! id = "N1"            # LIF fields (c_m, r_m, v_rest, v_threshold, i_inj, dt) are optional
//!
//! [[input]]
//! id = "A"
//! spikes_per_frame = 5.0
//!
//! [[synapse]]
//! src = "A"
//! dst = "N1"
//! weight = 1.5e-11
//! spikes_per_frame = 5.0
//! ```
//!
//! Hardware graph:
//!
//! ```toml
//! format_version = 1
//!
//! [[core]]
//! id = "T0"
//! crossbar_dim = 256
//! exec_time = 1
//! in_connections = 8      # optional caps, unlimited when absent
//! out_connections = 8
//! in_bandwidth = 4096
//! out_bandwidth = 4096
//!
//! [[link]]
//! src = "T0"
//! dst = "T1"
//! latency = 1
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::hardware::{Core, HardwareGraph, Link};
use super::snn::{Input, Neuron, NodeRef, SnnGraph, SnnGraphBuilder};
use crate::error::GraphError;
use crate::rates::LifParams;

pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn read_file(path: &Path) -> Result<String, GraphError> {
    std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deserialize a versioned TOML document.
pub(crate) fn parse_versioned<T: DeserializeOwned>(
    text: &str,
    context: &str,
    version_of: impl Fn(&T) -> u32,
) -> Result<T, GraphError> {
    let doc: T = toml::from_str(text).map_err(|e| GraphError::parse(context, e))?;
    let found = version_of(&doc);
    if found != FORMAT_VERSION {
        return Err(GraphError::Version {
            context: context.to_string(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    Ok(doc)
}

pub(crate) fn to_toml<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("graph documents always serialize")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnnFile {
    format_version: u32,
    #[serde(default, rename = "neuron")]
    neurons: Vec<NeuronRecord>,
    #[serde(default, rename = "input")]
    inputs: Vec<InputRecord>,
    #[serde(default, rename = "synapse")]
    synapses: Vec<SynapseRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NeuronRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_rest: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    i_inj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
}

impl NeuronRecord {
    fn params(&self) -> LifParams {
        let d = LifParams::default();
        LifParams {
            c_m: self.c_m.unwrap_or(d.c_m),
            r_m: self.r_m.unwrap_or(d.r_m),
            v_rest: self.v_rest.unwrap_or(d.v_rest),
            v_threshold: self.v_threshold.unwrap_or(d.v_threshold),
            i_inj: self.i_inj.unwrap_or(d.i_inj),
            dt: self.dt.unwrap_or(d.dt),
        }
    }

    fn from_neuron(n: &Neuron) -> Self {
        let d = LifParams::default();
        let p = n.params;
        let differs = |a: f64, b: f64| (a != b).then_some(a);
        NeuronRecord {
            id: n.name.clone(),
            c_m: differs(p.c_m, d.c_m),
            r_m: differs(p.r_m, d.r_m),
            v_rest: differs(p.v_rest, d.v_rest),
            v_threshold: differs(p.v_threshold, d.v_threshold),
            i_inj: differs(p.i_inj, d.i_inj),
            dt: differs(p.dt, d.dt),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputRecord {
    id: String,
    #[serde(default)]
    spikes_per_frame: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynapseRecord {
    src: String,
    dst: String,
    #[serde(default)]
    weight: f64,
    #[serde(default)]
    spikes_per_frame: f64,
}

pub fn parse_snn_graph(text: &str) -> Result<SnnGraph, GraphError> {
    let doc: SnnFile = parse_versioned(text, "SNN graph", |d: &SnnFile| d.format_version)?;
    let mut b = SnnGraphBuilder::new();
    for n in &doc.neurons {
        b = b.neuron_with(&n.id, n.params());
    }
    for i in &doc.inputs {
        b = b.input(&i.id, i.spikes_per_frame);
    }
    for s in &doc.synapses {
        b = b.synapse(&s.src, &s.dst, s.weight, s.spikes_per_frame);
    }
    b.build()
}

pub fn load_snn_graph(path: impl AsRef<Path>) -> Result<SnnGraph, GraphError> {
    let path = path.as_ref();
    parse_snn_graph(&read_file(path)?).map_err(|e| with_path(e, path))
}

pub fn snn_graph_to_string(g: &SnnGraph) -> String {
    let doc = SnnFile {
        format_version: FORMAT_VERSION,
        neurons: g.neurons().iter().map(NeuronRecord::from_neuron).collect(),
        inputs: g
            .inputs()
            .iter()
            .map(|i: &Input| InputRecord {
                id: i.name.clone(),
                spikes_per_frame: i.spikes_per_frame,
            })
            .collect(),
        synapses: g
            .synapses()
            .iter()
            .map(|s| SynapseRecord {
                src: g.node_name(s.src).to_string(),
                dst: g.node_name(NodeRef::Neuron(s.dst)).to_string(),
                weight: s.weight,
                spikes_per_frame: s.spikes_per_frame,
            })
            .collect(),
    };
    to_toml(&doc)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardwareFile {
    format_version: u32,
    #[serde(default, rename = "core")]
    cores: Vec<CoreRecord>,
    #[serde(default, rename = "link")]
    links: Vec<LinkRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreRecord {
    id: String,
    crossbar_dim: i64,
    exec_time: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_connections: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out_connections: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_bandwidth: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out_bandwidth: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRecord {
    src: String,
    dst: String,
    latency: i64,
}

fn non_negative(value: i64, what: &str) -> Result<u64, GraphError> {
    u64::try_from(value)
        .map_err(|_| GraphError::invalid("hardware graph", format!("{what} must be >= 0, got {value}")))
}

pub fn parse_hardware_graph(text: &str) -> Result<HardwareGraph, GraphError> {
    let doc: HardwareFile =
        parse_versioned(text, "hardware graph", |d: &HardwareFile| d.format_version)?;
    let mut cores = Vec::with_capacity(doc.cores.len());
    for c in &doc.cores {
        let cap = |v: Option<i64>, what: &str| -> Result<Option<u64>, GraphError> {
            v.map(|x| non_negative(x, &format!("core {} {what}", c.id)))
                .transpose()
        };
        cores.push(Core {
            name: c.id.clone(),
            crossbar_dim: non_negative(c.crossbar_dim, &format!("core {} crossbar_dim", c.id))?
                as usize,
            exec_time: non_negative(c.exec_time, &format!("core {} exec_time", c.id))?,
            in_connections: cap(c.in_connections, "in_connections")?.map(|v| v as usize),
            out_connections: cap(c.out_connections, "out_connections")?.map(|v| v as usize),
            in_bandwidth: cap(c.in_bandwidth, "in_bandwidth")?,
            out_bandwidth: cap(c.out_bandwidth, "out_bandwidth")?,
        });
    }
    let index: HashMap<&str, usize> = cores
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    let mut links = Vec::with_capacity(doc.links.len());
    for l in &doc.links {
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| {
                GraphError::invalid("hardware graph", format!("link endpoint {name} is not a declared core"))
            })
        };
        links.push(Link {
            src: lookup(&l.src)?,
            dst: lookup(&l.dst)?,
            latency: non_negative(l.latency, &format!("latency of link {} -> {}", l.src, l.dst))?,
        });
    }
    HardwareGraph::new(cores, links)
}

pub fn load_hardware_graph(path: impl AsRef<Path>) -> Result<HardwareGraph, GraphError> {
    let path = path.as_ref();
    parse_hardware_graph(&read_file(path)?).map_err(|e| with_path(e, path))
}

pub fn hardware_graph_to_string(hw: &HardwareGraph) -> String {
    let doc = HardwareFile {
        format_version: FORMAT_VERSION,
        cores: hw
            .cores()
            .iter()
            .map(|c| CoreRecord {
                id: c.name.clone(),
                crossbar_dim: c.crossbar_dim as i64,
                exec_time: c.exec_time as i64,
                in_connections: c.in_connections.map(|v| v as i64),
                out_connections: c.out_connections.map(|v| v as i64),
                in_bandwidth: c.in_bandwidth.map(|v| v as i64),
                out_bandwidth: c.out_bandwidth.map(|v| v as i64),
            })
            .collect(),
        links: hw
            .links()
            .iter()
            .map(|l| LinkRecord {
                src: hw.cores()[l.src].name.clone(),
                dst: hw.cores()[l.dst].name.clone(),
                latency: l.latency as i64,
            })
            .collect(),
    };
    to_toml(&doc)
}

/// Prefix parse/validation contexts with the offending file.
pub(crate) fn with_path(e: GraphError, path: &Path) -> GraphError {
    let shown = path.display();
    match e {
        GraphError::Parse { context, message } => GraphError::Parse {
            context: format!("{context} ({shown})"),
            message,
        },
        GraphError::Invalid { context, message } => GraphError::Invalid {
            context: format!("{context} ({shown})"),
            message,
        },
        GraphError::Version {
            context,
            found,
            expected,
        } => GraphError::Version {
            context: format!("{context} ({shown})"),
            found,
            expected,
        },
        other => other,
    }
}
