// SPDX-License-Identifier: Apache-2.0
//! Files written by the CLI and their loaders.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file reads back to the exact values that were written.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dse::{DesignPoint, FlowResult, Provenance};
use crate::error::{Error, GraphError};
use crate::graph::HardwareGraph;
use crate::mapping::MappingSolution;
use crate::partition::KlTrace;
use crate::sdfg::Sdfg;

pub const FRONT_HEADER: &str = "round,sweep_step,solution,total_buffer,period_time,period_iterations,throughput";
pub const SERIES_HEADER: &str = "round,sweep_step,total_buffer,unmapped_throughput,mapped_throughput";
pub const COST_HEADER: &str = "round,sweep,delta,cost";

fn csv_error(file: &str, line: usize, msg: impl std::fmt::Display) -> Error {
    GraphError::parse(file, format!("line {line}: {msg}")).into()
}

fn rows<'a>(text: &'a str, file: &str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, Error> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => return Err(csv_error(file, 1, format!("expected header {header}"))),
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != width {
                return Err(csv_error(file, i + 1, format!("expected {width} fields")));
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn field<T: std::str::FromStr>(file: &str, line: usize, s: &str) -> Result<T, Error>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| csv_error(file, line, format!("{s:?}: {e}")))
}

pub fn front_csv(points: &[DesignPoint]) -> String {
    let mut out = String::from(FRONT_HEADER);
    out.push('\n');
    for p in points {
        let v = &p.provenance;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            v.round, v.sweep_step, v.solution, p.total_buffer, p.period_time, p.period_iterations, p.throughput
        )
        .unwrap();
    }
    out
}

pub fn parse_front_csv(text: &str) -> Result<Vec<DesignPoint>, Error> {
    const F: &str = "front CSV";
    rows(text, F, FRONT_HEADER)?
        .into_iter()
        .map(|(n, f)| {
            Ok(DesignPoint {
                provenance: Provenance {
                    round: field(F, n, f[0])?,
                    sweep_step: field(F, n, f[1])?,
                    solution: field(F, n, f[2])?,
                },
                total_buffer: field(F, n, f[3])?,
                period_time: field(F, n, f[4])?,
                period_iterations: field(F, n, f[5])?,
                throughput: field(F, n, f[6])?,
            })
        })
        .collect()
}

/// One row per sweep step of every round.
pub fn series_csv(result: &FlowResult) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in &result.rounds {
        for (step, (p, s)) in r.sweep.iter().zip(&r.solutions).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.round, step, p.total_buffer, p.throughput.throughput, s.throughput.throughput
            )
            .unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub round: usize,
    pub sweep_step: usize,
    pub total_buffer: u64,
    pub unmapped_throughput: f64,
    pub mapped_throughput: f64,
}

pub fn parse_series_csv(text: &str) -> Result<Vec<SeriesRow>, Error> {
    const F: &str = "series CSV";
    rows(text, F, SERIES_HEADER)?
        .into_iter()
        .map(|(n, f)| {
            Ok(SeriesRow {
                round: field(F, n, f[0])?,
                sweep_step: field(F, n, f[1])?,
                total_buffer: field(F, n, f[2])?,
                unmapped_throughput: field(F, n, f[3])?,
                mapped_throughput: field(F, n, f[4])?,
            })
        })
        .collect()
}

/// Cost trajectory of each round: sweep 0 is the initial cost, every later
/// row subtracts that sweep's improvement.
pub fn cost_csv(traces: &[(usize, &KlTrace)]) -> String {
    let mut out = String::from(COST_HEADER);
    out.push('\n');
    for (round, t) in traces {
        writeln!(out, "{round},0,0,{}", t.initial_cost).unwrap();
        let mut cost = t.initial_cost;
        for (k, d) in t.sweep_improvements.iter().enumerate() {
            cost -= d;
            writeln!(out, "{round},{},{d},{cost}", k + 1).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub round: usize,
    pub sweep: usize,
    pub delta: f64,
    pub cost: f64,
}

pub fn parse_cost_csv(text: &str) -> Result<Vec<CostRow>, Error> {
    const F: &str = "cost CSV";
    rows(text, F, COST_HEADER)?
        .into_iter()
        .map(|(n, f)| {
            Ok(CostRow {
                round: field(F, n, f[0])?,
                sweep: field(F, n, f[1])?,
                delta: field(F, n, f[2])?,
                cost: field(F, n, f[3])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub core: String,
    pub transient: Vec<String>,
    pub cycle: Vec<String>,
}

/// A mapping solution with actors and cores named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub round: Option<usize>,
    pub sweep_step: Option<usize>,
    /// Core name per cluster.
    pub mapping: Vec<String>,
    pub schedule: Vec<ScheduleRecord>,
    /// Capacity per channel; `null` is unbounded.
    pub allocation: Vec<Option<u64>>,
    pub total_buffer: Option<u64>,
    pub period_time: u64,
    pub period_iterations: u64,
    pub throughput: f64,
    /// Global-best throughput after initialization and each swarm step.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

impl SolutionRecord {
    pub fn new(s: &MappingSolution, g: &Sdfg, hw: &HardwareGraph, at: Option<(usize, usize)>) -> Self {
        let actor = |a: usize| g.actors()[a].name.clone();
        let core = |c: usize| hw.cores()[c].name.clone();
        SolutionRecord {
            round: at.map(|a| a.0),
            sweep_step: at.map(|a| a.1),
            mapping: s.mapping.core_of().iter().map(|&c| core(c)).collect(),
            schedule: s
                .schedule
                .cores
                .iter()
                .enumerate()
                .map(|(c, cs)| ScheduleRecord {
                    core: core(c),
                    transient: cs.transient.iter().map(|&a| actor(a)).collect(),
                    cycle: cs.cycle.iter().map(|&a| actor(a)).collect(),
                })
                .collect(),
            allocation: s.allocation.0.clone(),
            total_buffer: s.allocation.total(g),
            period_time: s.throughput.period_time,
            period_iterations: s.throughput.period_iterations,
            throughput: s.throughput.throughput,
            history: s.history.clone(),
            evaluations: s.evaluations,
        }
    }
}

pub fn solutions_json(records: &[SolutionRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

pub fn parse_solutions_json(text: &str) -> Result<Vec<SolutionRecord>, Error> {
    serde_json::from_str(text).map_err(|e| GraphError::parse("solutions JSON", e).into())
}

/// Inputs, parameters and outputs of a run. Holds no timestamps or thread
/// counts, so identical runs write identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    /// `ok`, `partial` or `failed`.
    pub status: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub failures: Vec<String>,
    pub config: crate::cli::RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    /// FNV-1a of the file contents, hex.
    pub fnv1a: String,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self, Error> {
        let bytes = std::fs::read(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Ok(InputDigest {
            path: path.display().to_string(),
            fnv1a: format!("{h:016x}"),
        })
    }
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| GraphError::parse("manifest", e).into())
    }
}

/// Writes files under one directory and remembers their relative names.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: PathBuf) -> Result<Self, Error> {
        std::fs::create_dir_all(&root).map_err(|source| GraphError::Io {
            path: root.clone(),
            source,
        })?;
        Ok(OutDir {
            root,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf, Error> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| GraphError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, contents).map_err(|source| GraphError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(rel.to_string());
        Ok(path)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}
