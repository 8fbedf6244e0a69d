//! Dense statevector simulator with analytic `<Z>` readout.
//!
//! Gradients are computed by a single reverse sweep over the gate list
//! (adjoint method); [`Simulator::parameter_shift`] is an independent
//! cross-check built only on forward evaluations.

mod graph;
mod state;

pub use graph::{GraphGradients, GraphRun};
pub use state::StateVector;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Axis, Circuit, Encoding, GateKind};

pub const DEFAULT_MAX_QUBITS: usize = 16;
pub const MAX_QUBITS_ENV: &str = "QCUT_MAX_QUBITS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("{qubits} qubits exceed the simulator capacity of {max}")]
    Capacity { qubits: usize, max: usize },
    #[error("amplitude encoding of an all-zero feature vector")]
    DegenerateEncoding,
    #[error("param slot {0} is not carried by a rotation gate")]
    UnsupportedGate(usize),
    #[error("boundary cache does not match the graph: {0}")]
    Sequencing(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    /// `<Z>` per output slot.
    pub outputs: Vec<f64>,
}

/// Full Jacobians; row `k` belongs to output slot `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobians {
    pub d_params: Vec<Vec<f64>>,
    pub d_inputs: Vec<Vec<f64>>,
}

/// Vector-Jacobian product `upstream^T J` for params and inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Vjp {
    pub outputs: Vec<f64>,
    pub d_params: Vec<f64>,
    pub d_inputs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simulator {
    max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    /// Capacity from `QCUT_MAX_QUBITS`, falling back to the default.
    pub fn from_env() -> Self {
        std::env::var(MAX_QUBITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Self::with_max_qubits)
            .unwrap_or_default()
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn check_capacity(&self, qubits: usize) -> Result<(), SimError> {
        if qubits > self.max_qubits {
            Err(SimError::Capacity {
                qubits,
                max: self.max_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Executes `circuit` from `|0...0>` (or the amplitude-encoded state).
    pub fn run(
        &self,
        circuit: &Circuit,
        params: &[f64],
        inputs: &[f64],
    ) -> Result<ExecutionResult, SimError> {
        self.check(circuit, params, inputs)?;
        let mut state = self.initial_state(circuit, inputs)?;
        let outputs = evolve(circuit, &mut state, params, inputs);
        Ok(ExecutionResult { outputs })
    }

    /// Like [`Simulator::run`], restricted to amplitude-encoded circuits.
    pub fn run_amplitude(
        &self,
        circuit: &Circuit,
        params: &[f64],
        features: &[f64],
    ) -> Result<ExecutionResult, SimError> {
        if circuit.encoding() != Encoding::Amplitude {
            return Err(SimError::Contract(
                "run_amplitude needs an amplitude-encoded circuit".into(),
            ));
        }
        self.run(circuit, params, features)
    }

    /// Final state after all gates; mainly for tests and diagnostics.
    pub fn final_state(
        &self,
        circuit: &Circuit,
        params: &[f64],
        inputs: &[f64],
    ) -> Result<StateVector, SimError> {
        self.check(circuit, params, inputs)?;
        let mut state = self.initial_state(circuit, inputs)?;
        evolve(circuit, &mut state, params, inputs);
        Ok(state)
    }

    /// `d loss / d params` and `d loss / d inputs` for
    /// `loss = sum_k upstream[k] * outputs[k]`, in one reverse sweep.
    pub fn vjp(
        &self,
        circuit: &Circuit,
        params: &[f64],
        inputs: &[f64],
        upstream: &[f64],
    ) -> Result<Vjp, SimError> {
        self.check(circuit, params, inputs)?;
        if upstream.len() != circuit.num_outputs() {
            return Err(SimError::Contract(format!(
                "upstream has {} entries, circuit has {} outputs",
                upstream.len(),
                circuit.num_outputs()
            )));
        }
        let mut psi = self.initial_state(circuit, inputs)?;
        let outputs = evolve(circuit, &mut psi, params, inputs);

        let mut lambda = StateVector::zeros(circuit.num_wires());
        let mut d_params = vec![0.0; circuit.num_params()];
        let mut d_inputs = vec![0.0; circuit.num_inputs()];
        for gate in circuit.gates().iter().rev() {
            match gate.kind {
                GateKind::MeasureZ(slot) => {
                    if upstream[slot] != 0.0 {
                        lambda.add_scaled_z(&psi, gate.wires[0], upstream[slot]);
                    }
                }
                GateKind::Cnot => {
                    psi.apply_cnot(gate.wires[0], gate.wires[1]);
                    lambda.apply_cnot(gate.wires[0], gate.wires[1]);
                }
                kind => {
                    let axis = kind.rotation_axis().expect("rotation gate");
                    let wire = gate.wires[0];
                    let (theta, sink) = match kind {
                        GateKind::EncodeAngle(s) => (inputs[s], &mut d_inputs[s]),
                        _ => {
                            let s = kind.param_slot().expect("param slot");
                            (params[s], &mut d_params[s])
                        }
                    };
                    // d/dtheta of exp(-i theta/2 P) is -i/2 P U; 2 Re(-i/2 z) = Im z.
                    *sink += lambda.pauli_element(&psi, axis, wire).im;
                    psi.apply_rotation(axis, wire, -theta);
                    lambda.apply_rotation(axis, wire, -theta);
                }
            }
        }

        if circuit.encoding() == Encoding::Amplitude {
            d_inputs = amplitude_feature_gradient(&lambda, inputs);
        }
        Ok(Vjp {
            outputs,
            d_params,
            d_inputs,
        })
    }

    /// Exact Jacobians of every output with respect to params and inputs.
    pub fn gradients(
        &self,
        circuit: &Circuit,
        params: &[f64],
        inputs: &[f64],
    ) -> Result<Jacobians, SimError> {
        let k = circuit.num_outputs();
        let mut d_params = Vec::with_capacity(k);
        let mut d_inputs = Vec::with_capacity(k);
        let mut upstream = vec![0.0; k];
        for out in 0..k {
            upstream[out] = 1.0;
            let v = self.vjp(circuit, params, inputs, &upstream)?;
            upstream[out] = 0.0;
            d_params.push(v.d_params);
            d_inputs.push(v.d_inputs);
        }
        Ok(Jacobians { d_params, d_inputs })
    }

    /// `[f(theta + pi/2) - f(theta - pi/2)] / 2` for every output.
    pub fn parameter_shift(
        &self,
        circuit: &Circuit,
        params: &[f64],
        inputs: &[f64],
        param_index: usize,
    ) -> Result<Vec<f64>, SimError> {
        if param_index >= circuit.num_params() {
            return Err(SimError::Contract(format!(
                "param index {param_index} out of range ({} params)",
                circuit.num_params()
            )));
        }
        match circuit.gate_for_param(param_index) {
            Some(g) if g.kind.rotation_axis().is_some() => {}
            _ => return Err(SimError::UnsupportedGate(param_index)),
        }
        let mut shifted = params.to_vec();
        shifted[param_index] = params[param_index] + FRAC_PI_2;
        let plus = self.run(circuit, &shifted, inputs)?.outputs;
        shifted[param_index] = params[param_index] - FRAC_PI_2;
        let minus = self.run(circuit, &shifted, inputs)?.outputs;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| 0.5 * (p - m))
            .collect())
    }

    fn check(&self, circuit: &Circuit, params: &[f64], inputs: &[f64]) -> Result<(), SimError> {
        self.check_capacity(circuit.num_wires())?;
        if params.len() != circuit.num_params() {
            return Err(SimError::Contract(format!(
                "expected {} params, got {}",
                circuit.num_params(),
                params.len()
            )));
        }
        if inputs.len() != circuit.num_inputs() {
            return Err(SimError::Contract(format!(
                "expected {} inputs, got {}",
                circuit.num_inputs(),
                inputs.len()
            )));
        }
        Ok(())
    }

    fn initial_state(&self, circuit: &Circuit, inputs: &[f64]) -> Result<StateVector, SimError> {
        match circuit.encoding() {
            Encoding::Angle => Ok(StateVector::zero(circuit.num_wires())),
            Encoding::Amplitude => amplitude_state(circuit.num_wires(), inputs),
        }
    }
}

/// Features L2-normalized and zero-padded to `2^qubits` amplitudes.
pub fn amplitude_state(qubits: usize, features: &[f64]) -> Result<StateVector, SimError> {
    let dim = 1usize << qubits;
    if features.len() > dim {
        return Err(SimError::Contract(format!(
            "{} features exceed {dim} amplitudes",
            features.len()
        )));
    }
    let norm = features.iter().map(|f| f * f).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(SimError::DegenerateEncoding);
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (a, f) in amps.iter_mut().zip(features) {
        a.re = f / norm;
    }
    Ok(StateVector::from_amplitudes(amps).expect("power-of-two length"))
}

/// Chain rule through `psi = f / |f|` given the adjoint at the initial state.
fn amplitude_feature_gradient(lambda: &StateVector, features: &[f64]) -> Vec<f64> {
    let norm = features.iter().map(|f| f * f).sum::<f64>().sqrt();
    let g: Vec<f64> = lambda.amplitudes()[..features.len()]
        .iter()
        .map(|l| 2.0 * l.re)
        .collect();
    let dot: f64 = features.iter().zip(&g).map(|(f, g)| f / norm * g).sum();
    features
        .iter()
        .zip(&g)
        .map(|(f, g)| (g - f / norm * dot) / norm)
        .collect()
}

fn evolve(circuit: &Circuit, state: &mut StateVector, params: &[f64], inputs: &[f64]) -> Vec<f64> {
    let mut outputs = vec![0.0; circuit.num_outputs()];
    for gate in circuit.gates() {
        let w = gate.wires[0];
        match gate.kind {
            GateKind::Rx(s) => state.apply_rotation(Axis::X, w, params[s]),
            GateKind::Ry(s) => state.apply_rotation(Axis::Y, w, params[s]),
            GateKind::Rz(s) => state.apply_rotation(Axis::Z, w, params[s]),
            GateKind::EncodeAngle(s) => state.apply_rotation(Axis::X, w, inputs[s]),
            GateKind::Cnot => state.apply_cnot(w, gate.wires[1]),
            GateKind::MeasureZ(s) => outputs[s] = state.expectation_z(w),
        }
    }
    outputs
}
