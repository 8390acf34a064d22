// SPDX-License-Identifier: Apache-2.0
//! Leaky integrate-and-fire neuron with current-based synapses, integrated
//! with forward Euler.

use serde::{Deserialize, Serialize};

/// Electrical parameters of one LIF neuron. SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Membrane capacitance in farads.
    pub c_m: f64,
    /// Membrane resistance in ohms.
    pub r_m: f64,
    pub v_rest: f64,
    pub v_threshold: f64,
    /// Constant electrode current in amperes.
    pub i_inj: f64,
    /// Integration step in seconds.
    pub dt: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            c_m: 1e-9,
            r_m: 1e7,
            v_rest: -0.065,
            v_threshold: -0.050,
            i_inj: 0.0,
            dt: 1e-4,
        }
    }
}

impl LifParams {
    /// Membrane time constant `C_m * R_m`.
    pub fn tau_m(&self) -> f64 {
        self.c_m * self.r_m
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.c_m,
            self.r_m,
            self.v_rest,
            self.v_threshold,
            self.i_inj,
            self.dt,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err("parameters must be finite".into());
        }
        if self.c_m <= 0.0 {
            return Err(format!("c_m must be positive, got {}", self.c_m));
        }
        if self.r_m <= 0.0 {
            return Err(format!("r_m must be positive, got {}", self.r_m));
        }
        if self.v_threshold <= self.v_rest {
            return Err(format!(
                "v_threshold ({}) must exceed v_rest ({})",
                self.v_threshold, self.v_rest
            ));
        }
        if self.dt <= 0.0 {
            return Err(format!("dt must be positive, got {}", self.dt));
        }
        Ok(())
    }

    /// Time for the membrane to charge from rest to threshold under the
    /// constant current `current`, from the continuous RC solution. `None`
    /// when the steady-state voltage never reaches threshold.
    pub fn charging_time(&self, current: f64) -> Option<f64> {
        let swing = (self.v_threshold - self.v_rest) / (current * self.r_m);
        if current <= 0.0 || swing >= 1.0 {
            return None;
        }
        Some(-self.tau_m() * (1.0 - swing).ln())
    }
}

/// Advance one neuron by a single step of length `params.dt`.
///
/// Returns the new membrane voltage and whether the neuron fired. A firing
/// neuron is reset to `v_rest`, so the returned voltage is always below
/// threshold.
pub fn step_neuron(voltage: f64, params: &LifParams, synaptic_current: f64) -> (f64, bool) {
    let leak = -(params.c_m / params.tau_m()) * (voltage - params.v_rest);
    let next = voltage + (params.dt / params.c_m) * (leak + synaptic_current + params.i_inj);
    if voltage >= params.v_threshold || next >= params.v_threshold {
        (params.v_rest, true)
    } else {
        (next, false)
    }
}

/// CUBA synaptic current over one step: every spike that lands in the step
/// injects its weight (a charge) spread over `dt`.
///
/// `incoming` yields `(spike_count_in_step, weight)` per pre-synaptic source.
pub fn synaptic_current<I>(incoming: I, dt: f64) -> f64
where
    I: IntoIterator<Item = (u32, f64)>,
{
    incoming
        .into_iter()
        .map(|(spikes, weight)| f64::from(spikes) * weight)
        .sum::<f64>()
        / dt
}
