// SPDX-License-Identifier: Apache-2.0
//! Map spiking neural networks onto many-core neuromorphic hardware.

pub mod cli;
pub mod dse;
pub mod error;
pub mod graph;
pub mod mapping;
pub mod partition;
pub mod rates;
pub mod sdfg;
pub mod seed;
pub mod synth;

pub use error::Error;
