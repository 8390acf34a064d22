// SPDX-License-Identifier: Apache-2.0
//! SDFG dump format.
//!
//! ```toml
//! format_version = 1
//!
//! [[actor]]
//! id = "C0"
//! exec_time = 2
//!
//! [[channel]]
//! src = "C0"
//! dst = "C1"
//! production = 5
//! consumption = 5
//! initial_tokens = 0
//! capacity = 10        # omit for an unbounded channel
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::graph::{Actor, Channel, Sdfg};
use crate::error::GraphError;
use crate::graph::{parse_versioned, read_file, to_toml, with_path, FORMAT_VERSION};

const CTX: &str = "sdfg";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdfgFile {
    format_version: u32,
    #[serde(default, rename = "actor")]
    actors: Vec<ActorRecord>,
    #[serde(default, rename = "channel")]
    channels: Vec<ChannelRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActorRecord {
    id: String,
    exec_time: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRecord {
    src: String,
    dst: String,
    production: i64,
    consumption: i64,
    #[serde(default)]
    initial_tokens: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity: Option<i64>,
}

fn non_negative(value: i64, what: &str) -> Result<u64, GraphError> {
    u64::try_from(value).map_err(|_| GraphError::invalid(CTX, format!("{what} must be non-negative, got {value}")))
}

pub fn parse_sdfg(text: &str) -> Result<Sdfg, GraphError> {
    let doc: SdfgFile = parse_versioned(text, CTX, |d: &SdfgFile| d.format_version)?;
    let mut index = HashMap::new();
    let mut actors = Vec::with_capacity(doc.actors.len());
    for (i, a) in doc.actors.iter().enumerate() {
        if index.insert(a.id.as_str(), i).is_some() {
            return Err(GraphError::invalid(CTX, format!("duplicate actor id {}", a.id)));
        }
        actors.push(Actor {
            name: a.id.clone(),
            exec_time: non_negative(a.exec_time, "exec_time")?,
        });
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::invalid(CTX, format!("undeclared actor {name}")))
    };
    let mut channels = Vec::with_capacity(doc.channels.len());
    for c in &doc.channels {
        channels.push(Channel {
            src: lookup(&c.src)?,
            dst: lookup(&c.dst)?,
            production: non_negative(c.production, "production")?,
            consumption: non_negative(c.consumption, "consumption")?,
            initial_tokens: non_negative(c.initial_tokens, "initial_tokens")?,
            capacity: c.capacity.map(|x| non_negative(x, "capacity")).transpose()?,
        });
    }
    Sdfg::new(actors, channels).map_err(|e| GraphError::invalid(CTX, e.to_string()))
}

pub fn load_sdfg(path: impl AsRef<Path>) -> Result<Sdfg, GraphError> {
    let path = path.as_ref();
    parse_sdfg(&read_file(path)?).map_err(|e| with_path(e, path))
}

pub fn sdfg_to_string(g: &Sdfg) -> String {
    let name = |a: usize| g.actors()[a].name.clone();
    let doc = SdfgFile {
        format_version: FORMAT_VERSION,
        actors: g
            .actors()
            .iter()
            .map(|a| ActorRecord {
                id: a.name.clone(),
                exec_time: a.exec_time as i64,
            })
            .collect(),
        channels: g
            .channels()
            .iter()
            .map(|c| ChannelRecord {
                src: name(c.src),
                dst: name(c.dst),
                production: c.production as i64,
                consumption: c.consumption as i64,
                initial_tokens: c.initial_tokens as i64,
                capacity: c.capacity.map(|x| x as i64),
            })
            .collect(),
    };
    to_toml(&doc)
}
