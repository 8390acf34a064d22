// SPDX-License-Identifier: Apache-2.0
//! Run configuration file.
//!
//! ```toml
//! snn_graph = "net.toml"
//! hardware_graph = "hw.toml"
//! spike_trains = "frames.toml"   # optional
//! output_dir = "out"             # optional
//!
//! [flow]
//! eta = 5
//! master_seed = 42
//!
//! [flow.swarm]
//! particles = 20
//!
//! [flow.sweep]
//! plateau = 3
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dse::FlowConfig;
use crate::error::{Error, GraphError};
use crate::graph::{read_file, with_path};

/// Default output directory when neither a flag, the config nor the
/// environment names one.
pub const DEFAULT_OUT_DIR: &str = "snnmap-out";
pub const OUT_DIR_ENV: &str = "SNNMAP_OUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub snn_graph: Option<PathBuf>,
    pub hardware_graph: Option<PathBuf>,
    pub spike_trains: Option<PathBuf>,
    /// Keep the spike counts stored in the graph even when trains are given.
    pub use_graph_rates: bool,
    pub output_dir: Option<PathBuf>,
    pub flow: FlowConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| GraphError::parse("run config", e).into())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = read_file(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Graph(g) => Error::Graph(with_path(g, path)),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.snn_graph,
            &mut cfg.hardware_graph,
            &mut cfg.spike_trains,
            &mut cfg.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Check that referenced files exist and numeric parameters are in range.
    pub fn validate(&self, need_hardware: bool) -> Result<(), Error> {
        let graph = self
            .snn_graph
            .as_ref()
            .ok_or_else(|| Error::Config("no SNN graph given".into()))?;
        let mut files = vec![graph];
        match &self.hardware_graph {
            Some(h) => files.push(h),
            None if need_hardware => return Err(Error::Config("no hardware graph given".into())),
            None => {}
        }
        files.extend(self.spike_trains.iter());
        for f in files {
            if !f.is_file() {
                return Err(Error::Config(format!("file {} does not exist", f.display())));
            }
        }
        self.flow.validate()
    }

    /// Flag beats config beats environment beats the built-in default.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
