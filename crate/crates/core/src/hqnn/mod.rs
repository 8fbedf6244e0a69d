//! Hybrid model: dense layer, quantum layer (original or cut), dense layer.
//!
//! All trainable values live in one flat vector laid out as
//! `[W_in | b_in | theta | W_out | b_out]`, with weights row-major
//! (`out x in`). The quantum layer's input and output widths are those of its
//! circuit: `n` angles (or `2^n` amplitude features) in, `n` `<Z>` values out.

mod adam;
mod train;

pub use adam::{AdamState, DEFAULT_LEARNING_RATE};
pub use train::{train, EpochMetrics, TrainConfig, Trainer, TrainingRecord};

use std::f64::consts::TAU;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{AnsatzOptions, Axis, Circuit, CircuitError, Encoding};
use crate::cutplan::{cut_circuit, BoundaryEncoding, PlanError, SubcircuitGraph};
use crate::simulator::{GraphRun, SimError, Simulator};

pub const DEFAULT_CLASSES: usize = 10;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Everything needed to rebuild a model's structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub features: usize,
    pub qubits: usize,
    pub layers: usize,
    pub encoding: Encoding,
    pub rotation: Axis,
    /// `None` runs the original circuit; `Some(m)` cuts it for an `m`-qubit device.
    pub device_qubits: Option<usize>,
    pub boundary: BoundaryEncoding,
    pub classes: usize,
}

impl Architecture {
    pub fn new(features: usize, qubits: usize, device_qubits: Option<usize>) -> Self {
        Self {
            features,
            qubits,
            layers: 2,
            encoding: Encoding::Angle,
            rotation: Axis::X,
            device_qubits,
            boundary: BoundaryEncoding::Angle,
            classes: DEFAULT_CLASSES,
        }
    }

    fn ansatz(&self) -> Result<Circuit, CircuitError> {
        AnsatzOptions {
            qubits: self.qubits,
            layers: self.layers,
            encoding: self.encoding,
            rotation: self.rotation,
        }
        .build()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumLayer {
    Original(Circuit),
    Cut(SubcircuitGraph),
}

impl QuantumLayer {
    pub fn num_inputs(&self) -> usize {
        match self {
            QuantumLayer::Original(c) => c.num_inputs(),
            QuantumLayer::Cut(g) => g.original.inputs,
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            QuantumLayer::Original(c) => c.num_outputs(),
            QuantumLayer::Cut(g) => g.original.outputs,
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            QuantumLayer::Original(c) => c.num_params(),
            QuantumLayer::Cut(g) => g.original.params,
        }
    }

    /// Widest circuit the simulator has to hold.
    pub fn max_width(&self) -> usize {
        match self {
            QuantumLayer::Original(c) => c.num_wires(),
            QuantumLayer::Cut(g) => g.max_width(),
        }
    }

    fn forward(
        &self,
        sim: &Simulator,
        theta: &[f64],
        inputs: &[f64],
    ) -> Result<(Vec<f64>, Option<GraphRun>), SimError> {
        match self {
            QuantumLayer::Original(c) => Ok((sim.run(c, theta, inputs)?.outputs, None)),
            QuantumLayer::Cut(g) => {
                let run = sim.run_graph(g, theta, inputs)?;
                Ok((run.outputs.clone(), Some(run)))
            }
        }
    }

    /// `(d theta, d inputs)` for upstream `d loss / d outputs`.
    fn backward(
        &self,
        sim: &Simulator,
        theta: &[f64],
        inputs: &[f64],
        run: Option<&GraphRun>,
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), SimError> {
        match (self, run) {
            (QuantumLayer::Original(c), _) => {
                let v = sim.vjp(c, theta, inputs, upstream)?;
                Ok((v.d_params, v.d_inputs))
            }
            (QuantumLayer::Cut(g), Some(run)) => {
                let gr = sim.graph_gradients_cached(g, theta, run, upstream)?;
                Ok((gr.d_params, gr.d_inputs))
            }
            (QuantumLayer::Cut(_), None) => Err(SimError::Sequencing(
                "cut layer backward pass without a forward cache".into(),
            )),
        }
    }
}

/// Offsets of each block inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub features: usize,
    pub quantum_inputs: usize,
    pub quantum_outputs: usize,
    pub classes: usize,
    pub w_in: Range<usize>,
    pub b_in: Range<usize>,
    pub theta: Range<usize>,
    pub w_out: Range<usize>,
    pub b_out: Range<usize>,
}

impl Layout {
    fn new(features: usize, quantum: &QuantumLayer, classes: usize) -> Self {
        let qi = quantum.num_inputs();
        let qo = quantum.num_outputs();
        let mut at = 0;
        let mut take = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        let w_in = take(qi * features);
        let b_in = take(qi);
        let theta = take(quantum.num_params());
        let w_out = take(classes * qo);
        let b_out = take(classes);
        Self {
            features,
            quantum_inputs: qi,
            quantum_outputs: qo,
            classes,
            w_in,
            b_in,
            theta,
            w_out,
            b_out,
        }
    }

    pub fn len(&self) -> usize {
        self.b_out.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Read-only view of one dense layer inside the flat vector.
#[derive(Debug, Clone, Copy)]
pub struct DenseLayer<'a> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: &'a [f64],
    pub bias: &'a [f64],
}

impl DenseLayer<'_> {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

/// Per-sample values kept from the forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCache {
    pub angles: Vec<f64>,
    pub quantum_outputs: Vec<f64>,
    pub graph_run: Option<GraphRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossAndGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub correct: usize,
}

#[derive(Debug, Clone)]
pub struct HybridModel {
    architecture: Architecture,
    quantum: QuantumLayer,
    layout: Layout,
    params: Vec<f64>,
    simulator: Simulator,
}

impl HybridModel {
    /// Builds the model and draws its initial parameters from `seed`.
    ///
    /// Dense weights and biases are uniform in `+-sqrt(1/fan_in)`, quantum
    /// parameters uniform in `[0, 2pi)`.
    pub fn new(architecture: Architecture, seed: u64, simulator: Simulator) -> Result<Self, ModelError> {
        let mut model = Self::zeroed(architecture, simulator)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = &model.layout;
        let bound_in = (1.0 / l.features as f64).sqrt();
        let bound_out = (1.0 / l.quantum_outputs as f64).sqrt();
        let (w_in, b_in, theta, w_out, b_out) = (
            l.w_in.clone(),
            l.b_in.clone(),
            l.theta.clone(),
            l.w_out.clone(),
            l.b_out.clone(),
        );
        for i in w_in.chain(b_in) {
            model.params[i] = rng.gen_range(-bound_in..=bound_in);
        }
        for i in theta {
            model.params[i] = rng.gen_range(0.0..TAU);
        }
        for i in w_out.chain(b_out) {
            model.params[i] = rng.gen_range(-bound_out..=bound_out);
        }
        Ok(model)
    }

    /// Builds the model with every parameter set to zero.
    pub fn zeroed(architecture: Architecture, simulator: Simulator) -> Result<Self, ModelError> {
        if architecture.features == 0 || architecture.classes == 0 {
            return Err(ModelError::Contract(
                "model needs at least one feature and one class".into(),
            ));
        }
        let circuit = architecture.ansatz()?;
        let quantum = match architecture.device_qubits {
            Some(m) => {
                simulator.check_capacity(m.min(circuit.num_wires()))?;
                let (_, graph) = cut_circuit(&circuit, m)?;
                QuantumLayer::Cut(graph.with_boundary(architecture.boundary))
            }
            None => {
                simulator.check_capacity(circuit.num_wires())?;
                QuantumLayer::Original(circuit)
            }
        };
        let layout = Layout::new(architecture.features, &quantum, architecture.classes);
        Ok(Self {
            architecture,
            params: vec![0.0; layout.len()],
            quantum,
            layout,
            simulator,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn quantum(&self) -> &QuantumLayer {
        &self.quantum
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), ModelError> {
        if params.len() != self.layout.len() {
            return Err(ModelError::Contract(format!(
                "expected {} parameters, got {}",
                self.layout.len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }

    pub fn dense_in(&self) -> DenseLayer<'_> {
        DenseLayer {
            inputs: self.layout.features,
            outputs: self.layout.quantum_inputs,
            weights: &self.params[self.layout.w_in.clone()],
            bias: &self.params[self.layout.b_in.clone()],
        }
    }

    pub fn dense_out(&self) -> DenseLayer<'_> {
        DenseLayer {
            inputs: self.layout.quantum_outputs,
            outputs: self.layout.classes,
            weights: &self.params[self.layout.w_out.clone()],
            bias: &self.params[self.layout.b_out.clone()],
        }
    }

    pub fn quantum_params(&self) -> &[f64] {
        &self.params[self.layout.theta.clone()]
    }

    /// Flat-vector indices of each subcircuit's parameters (one block for an uncut layer).
    pub fn quantum_param_blocks(&self) -> Vec<Vec<usize>> {
        let base = self.layout.theta.start;
        match &self.quantum {
            QuantumLayer::Original(c) => vec![(base..base + c.num_params()).collect()],
            QuantumLayer::Cut(g) => g
                .subcircuits
                .iter()
                .map(|s| s.param_map.iter().map(|p| base + p).collect())
                .collect(),
        }
    }

    fn check_sample(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.layout.features {
            return Err(ModelError::Contract(format!(
                "sample has {} features, model expects {}",
                x.len(),
                self.layout.features
            )));
        }
        Ok(())
    }

    /// Logits of one sample plus the values the backward pass needs.
    pub fn forward_sample(&self, x: &[f64]) -> Result<(Vec<f64>, SampleCache), ModelError> {
        self.check_sample(x)?;
        let angles = self.dense_in().apply(x);
        let (q, graph_run) = self
            .quantum
            .forward(&self.simulator, self.quantum_params(), &angles)?;
        let logits = self.dense_out().apply(&q);
        Ok((
            logits,
            SampleCache {
                angles,
                quantum_outputs: q,
                graph_run,
            },
        ))
    }

    pub fn forward(&self, batch: &[&[f64]]) -> Result<(Vec<Vec<f64>>, Vec<SampleCache>), ModelError> {
        batch.iter().map(|x| self.forward_sample(x)).unzip_results()
    }

    /// Mean softmax cross-entropy over the batch and its gradient with respect
    /// to every entry of the flat parameter vector.
    pub fn loss_and_grad(&self, batch: &[&[f64]], labels: &[u8]) -> Result<LossAndGrad, ModelError> {
        if batch.len() != labels.len() || batch.is_empty() {
            return Err(ModelError::Contract(format!(
                "{} samples with {} labels",
                batch.len(),
                labels.len()
            )));
        }
        let l = &self.layout;
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; l.len()];
        let mut loss = 0.0;
        let mut correct = 0;
        for (x, &label) in batch.iter().zip(labels) {
            let label = label as usize;
            if label >= l.classes {
                return Err(ModelError::Contract(format!(
                    "label {label} outside 0..{}",
                    l.classes
                )));
            }
            let (logits, cache) = self.forward_sample(x)?;
            let (sample_loss, probs) = softmax_cross_entropy(&logits, label);
            loss += sample_loss * scale;
            if argmax(&logits) == label {
                correct += 1;
            }

            let d_logits: Vec<f64> = probs
                .iter()
                .enumerate()
                .map(|(c, p)| (p - if c == label { 1.0 } else { 0.0 }) * scale)
                .collect();
            let q = &cache.quantum_outputs;
            let w_out = &self.params[l.w_out.clone()];
            let mut d_q = vec![0.0; l.quantum_outputs];
            for (c, &dl) in d_logits.iter().enumerate() {
                let row = c * l.quantum_outputs;
                grad[l.b_out.start + c] += dl;
                for (j, &qj) in q.iter().enumerate() {
                    grad[l.w_out.start + row + j] += dl * qj;
                    d_q[j] += dl * w_out[row + j];
                }
            }

            let (d_theta, d_angles) = self.quantum.backward(
                &self.simulator,
                self.quantum_params(),
                &cache.angles,
                cache.graph_run.as_ref(),
                &d_q,
            )?;
            for (g, d) in grad[l.theta.clone()].iter_mut().zip(&d_theta) {
                *g += d;
            }
            for (i, &da) in d_angles.iter().enumerate() {
                grad[l.b_in.start + i] += da;
                let row = l.w_in.start + i * l.features;
                for (g, &xv) in grad[row..row + l.features].iter_mut().zip(x.iter()) {
                    *g += da * xv;
                }
            }
        }
        Ok(LossAndGrad {
            loss,
            grad,
            correct,
        })
    }

    /// Mean loss and accuracy over a dataset, forward only.
    pub fn evaluate(&self, data: &crate::data::Dataset) -> Result<(f64, f64), ModelError> {
        if data.is_empty() {
            return Err(ModelError::Contract("evaluation set is empty".into()));
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        for i in 0..data.len() {
            let (logits, _) = self.forward_sample(data.sample(i))?;
            let label = data.label(i) as usize;
            loss += softmax_cross_entropy(&logits, label).0;
            if argmax(&logits) == label {
                correct += 1;
            }
        }
        let n = data.len() as f64;
        Ok((loss / n, correct as f64 / n))
    }

    pub fn checkpoint(&self, seed: u64, optimizer: Option<&AdamState>) -> Checkpoint {
        Checkpoint {
            architecture: self.architecture,
            seed,
            params: self.params.clone(),
            optimizer: optimizer.cloned(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint, simulator: Simulator) -> Result<Self, ModelError> {
        let mut model = Self::zeroed(ckpt.architecture, simulator)?;
        model.set_params(ckpt.params.clone())?;
        Ok(model)
    }
}

/// Serialized model state: architecture, flat parameters, optimizer and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub architecture: Architecture,
    pub seed: u64,
    pub params: Vec<f64>,
    pub optimizer: Option<AdamState>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `(-log softmax(logits)[label], softmax(logits))`, computed stably.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[label] - max);
    (loss, exps.into_iter().map(|e| e / sum).collect())
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

trait UnzipResults<A, B, E> {
    fn unzip_results(self) -> Result<(Vec<A>, Vec<B>), E>;
}

impl<I, A, B, E> UnzipResults<A, B, E> for I
where
    I: Iterator<Item = Result<(A, B), E>>,
{
    fn unzip_results(self) -> Result<(Vec<A>, Vec<B>), E> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for item in self {
            let (x, y) = item?;
            a.push(x);
            b.push(y);
        }
        Ok((a, b))
    }
}
