//! Sequential execution of a [`SubcircuitGraph`] and reverse-mode gradients
//! across its classical boundary links.

use crate::cutplan::SubcircuitGraph;

use super::{SimError, Simulator};

/// Forward values of a graph run, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphRun {
    /// Outputs in original output-slot order.
    pub outputs: Vec<f64>,
    pub subcircuit_inputs: Vec<Vec<f64>>,
    pub subcircuit_outputs: Vec<Vec<f64>>,
}

impl GraphRun {
    /// Measured `<Z>` carried by each link, in `graph.links` order.
    pub fn boundary_values(&self, graph: &SubcircuitGraph) -> Vec<f64> {
        graph
            .links
            .iter()
            .map(|l| self.subcircuit_outputs[l.producer.subcircuit][l.producer.slot])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphGradients {
    pub d_params: Vec<f64>,
    pub d_inputs: Vec<f64>,
}

/// Links and external inputs grouped by consuming subcircuit.
struct Routing {
    /// (consumer slot, original input)
    external: Vec<Vec<(usize, usize)>>,
    /// (consumer slot, producer subcircuit, producer slot)
    linked: Vec<Vec<(usize, usize, usize)>>,
}

impl Routing {
    fn new(graph: &SubcircuitGraph) -> Self {
        let k = graph.subcircuits.len();
        let mut external = vec![Vec::new(); k];
        let mut linked = vec![Vec::new(); k];
        for e in &graph.external_inputs {
            external[e.at.subcircuit].push((e.at.slot, e.original));
        }
        for l in &graph.links {
            linked[l.consumer.subcircuit].push((
                l.consumer.slot,
                l.producer.subcircuit,
                l.producer.slot,
            ));
        }
        Self { external, linked }
    }
}

fn local_params(params: &[f64], map: &[usize]) -> Vec<f64> {
    map.iter().map(|&p| params[p]).collect()
}

impl Simulator {
    /// Runs every subcircuit in order, feeding each producer's `<Z>` into the
    /// linked consumer's `EncodeAngle` input.
    pub fn run_graph(
        &self,
        graph: &SubcircuitGraph,
        params: &[f64],
        inputs: &[f64],
    ) -> Result<GraphRun, SimError> {
        if params.len() != graph.original.params || inputs.len() != graph.original.inputs {
            return Err(SimError::Contract(format!(
                "graph expects {} params and {} inputs, got {} and {}",
                graph.original.params,
                graph.original.inputs,
                params.len(),
                inputs.len()
            )));
        }
        let routing = Routing::new(graph);
        let mut subcircuit_inputs = Vec::with_capacity(graph.subcircuits.len());
        let mut subcircuit_outputs: Vec<Vec<f64>> = Vec::with_capacity(graph.subcircuits.len());
        for (k, sub) in graph.subcircuits.iter().enumerate() {
            let mut local_in = vec![0.0; sub.circuit.num_inputs()];
            for &(slot, orig) in &routing.external[k] {
                local_in[slot] = inputs[orig];
            }
            for &(slot, producer, pslot) in &routing.linked[k] {
                let v = subcircuit_outputs
                    .get(producer)
                    .and_then(|o| o.get(pslot))
                    .ok_or_else(|| {
                        SimError::Contract(format!(
                            "subcircuit {k} reads unproduced value {pslot} of subcircuit {producer}"
                        ))
                    })?;
                local_in[slot] = graph.boundary.encode(*v);
            }
            let out = self
                .run(&sub.circuit, &local_params(params, &sub.param_map), &local_in)?
                .outputs;
            subcircuit_inputs.push(local_in);
            subcircuit_outputs.push(out);
        }
        let mut outputs = vec![0.0; graph.original.outputs];
        for fo in &graph.final_outputs {
            outputs[fo.original] = subcircuit_outputs[fo.at.subcircuit][fo.at.slot];
        }
        Ok(GraphRun {
            outputs,
            subcircuit_inputs,
            subcircuit_outputs,
        })
    }

    /// Runs the graph, then back-propagates `upstream` through it.
    pub fn graph_gradients(
        &self,
        graph: &SubcircuitGraph,
        params: &[f64],
        inputs: &[f64],
        upstream: &[f64],
    ) -> Result<GraphGradients, SimError> {
        let run = self.run_graph(graph, params, inputs)?;
        self.graph_gradients_cached(graph, params, &run, upstream)
    }

    /// Reverse-mode pass over a previous [`Simulator::run_graph`] result.
    ///
    /// Subcircuits are visited last to first; the input sensitivities of a
    /// consumer's re-encoded wires are added to the producer's output
    /// sensitivities before the producer is processed.
    pub fn graph_gradients_cached(
        &self,
        graph: &SubcircuitGraph,
        params: &[f64],
        run: &GraphRun,
        upstream: &[f64],
    ) -> Result<GraphGradients, SimError> {
        let k_total = graph.subcircuits.len();
        if run.subcircuit_inputs.len() != k_total || run.subcircuit_outputs.len() != k_total {
            return Err(SimError::Sequencing(format!(
                "cache holds {} subcircuits, graph has {k_total}",
                run.subcircuit_outputs.len()
            )));
        }
        for (k, sub) in graph.subcircuits.iter().enumerate() {
            if run.subcircuit_inputs[k].len() != sub.circuit.num_inputs()
                || run.subcircuit_outputs[k].len() != sub.circuit.num_outputs()
            {
                return Err(SimError::Sequencing(format!(
                    "cached values of subcircuit {k} have the wrong shape"
                )));
            }
        }
        if upstream.len() != graph.original.outputs || params.len() != graph.original.params {
            return Err(SimError::Contract(format!(
                "expected {} upstream values and {} params",
                graph.original.outputs, graph.original.params
            )));
        }

        let routing = Routing::new(graph);
        let mut sens: Vec<Vec<f64>> = graph
            .subcircuits
            .iter()
            .map(|s| vec![0.0; s.circuit.num_outputs()])
            .collect();
        for fo in &graph.final_outputs {
            sens[fo.at.subcircuit][fo.at.slot] += upstream[fo.original];
        }

        let mut d_params = vec![0.0; graph.original.params];
        let mut d_inputs = vec![0.0; graph.original.inputs];
        for k in (0..k_total).rev() {
            let sub = &graph.subcircuits[k];
            if sens[k].iter().all(|&s| s == 0.0) {
                continue;
            }
            let v = self.vjp(
                &sub.circuit,
                &local_params(params, &sub.param_map),
                &run.subcircuit_inputs[k],
                &sens[k],
            )?;
            for (local, &orig) in sub.param_map.iter().enumerate() {
                d_params[orig] += v.d_params[local];
            }
            for &(slot, orig) in &routing.external[k] {
                d_inputs[orig] += v.d_inputs[slot];
            }
            for &(slot, producer, pslot) in &routing.linked[k] {
                let value = run.subcircuit_outputs[producer][pslot];
                sens[producer][pslot] += v.d_inputs[slot] * graph.boundary.derivative(value);
            }
        }
        Ok(GraphGradients { d_params, d_inputs })
    }
}
