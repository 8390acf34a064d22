// SPDX-License-Identifier: Apache-2.0
//! Input spike trains and their file format.
//!
//! ```toml
//! format_version = 1
//! frame_length = 0.05          # seconds
//!
//! [[frame]]
//! A = [0.001, 0.0125]
//! B = []
//!
//! [[frame]]
//! A = [0.002]
//! B = [0.01, 0.02, 0.03]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, RateError};
use crate::graph::{parse_versioned, read_file, to_toml, with_path, FORMAT_VERSION};

/// Spike instants of one source within one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    times: Vec<f64>,
    frame_length: f64,
}

impl SpikeTrain {
    /// Times must be strictly increasing and lie in `[0, frame_length)`.
    pub fn new(times: Vec<f64>, frame_length: f64) -> Result<Self, RateError> {
        if !(frame_length > 0.0 && frame_length.is_finite()) {
            return Err(RateError::InvalidTrain(format!(
                "frame_length must be positive, got {frame_length}"
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(0.0..frame_length).contains(&t) {
                return Err(RateError::InvalidTrain(format!(
                    "spike time {t} outside [0, {frame_length})"
                )));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(RateError::InvalidTrain(format!(
                    "spike times not strictly increasing at {t}"
                )));
            }
        }
        Ok(SpikeTrain {
            times,
            frame_length,
        })
    }

    pub fn silent(frame_length: f64) -> Result<Self, RateError> {
        Self::new(Vec::new(), frame_length)
    }

    /// `count` spikes evenly spaced over the frame, starting at 0.
    pub fn regular(count: usize, frame_length: f64) -> Result<Self, RateError> {
        let times = (0..count)
            .map(|k| k as f64 * frame_length / count as f64)
            .collect();
        Self::new(times, frame_length)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frame_length(&self) -> f64 {
        self.frame_length
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spike counts per integration step of length `dt`.
    pub(crate) fn binned(&self, dt: f64, steps: usize) -> Vec<u32> {
        let mut bins = vec![0u32; steps];
        for &t in &self.times {
            let k = ((t / dt).floor() as usize).min(steps.saturating_sub(1));
            if steps > 0 {
                bins[k] += 1;
            }
        }
        bins
    }
}

/// Spike trains of every input for one frame, keyed by input id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameInputs {
    pub frame_length: f64,
    pub trains: BTreeMap<String, SpikeTrain>,
}

impl FrameInputs {
    pub fn new(frame_length: f64) -> Self {
        FrameInputs {
            frame_length,
            trains: BTreeMap::new(),
        }
    }

    /// Add a train; its frame length must match the frame's.
    pub fn with(mut self, input: &str, train: SpikeTrain) -> Result<Self, RateError> {
        if train.frame_length() != self.frame_length {
            return Err(RateError::InvalidTrain(format!(
                "train for {input} has frame length {}, frame has {}",
                train.frame_length(),
                self.frame_length
            )));
        }
        self.trains.insert(input.to_string(), train);
        Ok(self)
    }

    pub fn get(&self, input: &str) -> Option<&SpikeTrain> {
        self.trains.get(input)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    format_version: u32,
    frame_length: f64,
    #[serde(default, rename = "frame")]
    frames: Vec<BTreeMap<String, Vec<f64>>>,
}

pub fn parse_spike_trains(text: &str) -> Result<Vec<FrameInputs>, GraphError> {
    let doc: TrainFile = parse_versioned(text, "spike trains", |d: &TrainFile| d.format_version)?;
    doc.frames
        .into_iter()
        .enumerate()
        .map(|(k, frame)| {
            let trains = frame
                .into_iter()
                .map(|(input, times)| {
                    SpikeTrain::new(times, doc.frame_length)
                        .map(|t| (input.clone(), t))
                        .map_err(|e| {
                            GraphError::invalid("spike trains", format!("frame {k}, input {input}: {e}"))
                        })
                })
                .collect::<Result<_, _>>()?;
            Ok(FrameInputs {
                frame_length: doc.frame_length,
                trains,
            })
        })
        .collect()
}

pub fn load_spike_trains(path: impl AsRef<Path>) -> Result<Vec<FrameInputs>, GraphError> {
    let path = path.as_ref();
    parse_spike_trains(&read_file(path)?).map_err(|e| with_path(e, path))
}

/// Serialize frames; all frames must share one frame length.
pub fn spike_trains_to_string(frames: &[FrameInputs]) -> String {
    let frame_length = frames.first().map_or(1.0, |f| f.frame_length);
    let doc = TrainFile {
        format_version: FORMAT_VERSION,
        frame_length,
        frames: frames
            .iter()
            .map(|f| {
                f.trains
                    .iter()
                    .map(|(k, t)| (k.clone(), t.times().to_vec()))
                    .collect()
            })
            .collect(),
    };
    to_toml(&doc)
}
