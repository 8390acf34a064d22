// SPDX-License-Identifier: Apache-2.0
//! Error types shared across the toolchain.

use std::path::PathBuf;

use thiserror::Error;

/// Failures while reading, parsing or validating graph-like input files.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The document is not well-formed; `message` carries line/column context.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("unsupported format_version {found} in {context} (expected {expected})")]
    Version {
        context: String,
        found: u32,
        expected: u32,
    },
    /// A structural invariant does not hold.
    #[error("invalid {context}: {message}")]
    Invalid { context: String, message: String },
}

impl GraphError {
    pub(crate) fn invalid(context: impl Into<String>, message: impl Into<String>) -> Self {
        GraphError::Invalid {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        GraphError::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RateError {
    #[error("input {input} has no spike train in frame {frame}")]
    UnassignedInput { input: String, frame: usize },
    #[error("spike train for unknown input {0}")]
    UnknownInput(String),
    #[error("invalid neuron parameters for {neuron}: {message}")]
    InvalidParams { neuron: String, message: String },
    #[error("invalid spike train: {0}")]
    InvalidTrain(String),
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("crossbar dimension must be at least 1")]
    ZeroCrossbar,
    #[error("neuron {neuron} has {fan_in} distinct pre-synaptic sources, more than the crossbar dimension {crossbar_dim}")]
    Infeasible {
        neuron: String,
        fan_in: usize,
        crossbar_dim: usize,
    },
    #[error("partition does not match graph: {0}")]
    Mismatch(String),
    #[error("eta must be at least 1")]
    ZeroRounds,
}

/// Failures of dataflow analysis.
#[derive(Debug, Error)]
pub enum SdfgError {
    #[error("inconsistent rates on channel {channel} ({src} -> {dst})")]
    Inconsistent {
        channel: usize,
        src: String,
        dst: String,
    },
    #[error("deadlock at time {time}: starving actors {actors:?}")]
    Deadlock { time: u64, actors: Vec<String> },
    #[error("no recurrent state within a budget of {0} states")]
    BudgetExceeded(usize),
    #[error("channel {channel}: capacity {capacity} is below the minimum feasible {minimum}")]
    InfeasibleCapacity {
        channel: usize,
        capacity: u64,
        minimum: u64,
    },
    #[error("actor {0} can fire without bound")]
    Unbounded(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("no feasible mapping: {0}")]
    Infeasible(String),
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Analysis(#[from] SdfgError),
}

/// Top-level error of the design flow.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Sdfg(#[from] SdfgError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("every partition round was infeasible: {0}")]
    AllRoundsInfeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True when the failure is a state-budget overrun somewhere in the analysis.
    pub fn is_budget_exceeded(&self) -> bool {
        matches!(
            self,
            Error::Sdfg(SdfgError::BudgetExceeded(_))
                | Error::Mapping(MappingError::Analysis(SdfgError::BudgetExceeded(_)))
        )
    }
}
