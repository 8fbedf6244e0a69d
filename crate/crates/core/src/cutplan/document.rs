use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;

use super::{
    BoundaryEncoding, BoundaryLink, Cut, CutPlan, ExternalInput, FinalOutput, OriginalShape,
    PlanError, Subcircuit, SubcircuitGraph,
};

/// JSON form of a plan and its generated subcircuits. Subcircuits are embedded
/// as circuit-text blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub device_qubits: usize,
    pub original: OriginalShape,
    pub boundary: BoundaryEncoding,
    pub cuts: Vec<Cut>,
    pub assignment: Vec<usize>,
    pub subcircuits: Vec<SubcircuitEntry>,
    pub links: Vec<BoundaryLink>,
    pub external_inputs: Vec<ExternalInput>,
    pub final_outputs: Vec<FinalOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcircuitEntry {
    pub circuit: String,
    pub wire_map: Vec<usize>,
    pub param_map: Vec<usize>,
}

impl PlanDocument {
    pub fn new(plan: &CutPlan, graph: &SubcircuitGraph) -> Self {
        Self {
            device_qubits: plan.device_qubits,
            original: graph.original,
            boundary: graph.boundary,
            cuts: plan.cuts.clone(),
            assignment: plan.assignment.clone(),
            subcircuits: graph
                .subcircuits
                .iter()
                .map(|s| SubcircuitEntry {
                    circuit: s.circuit.to_text(),
                    wire_map: s.wire_map.clone(),
                    param_map: s.param_map.clone(),
                })
                .collect(),
            links: graph.links.clone(),
            external_inputs: graph.external_inputs.clone(),
            final_outputs: graph.final_outputs.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn into_parts(self) -> Result<(CutPlan, SubcircuitGraph), PlanError> {
        let subcircuits = self
            .subcircuits
            .into_iter()
            .map(|e| {
                Ok(Subcircuit {
                    circuit: Circuit::from_text(&e.circuit)?,
                    wire_map: e.wire_map,
                    param_map: e.param_map,
                })
            })
            .collect::<Result<Vec<_>, PlanError>>()?;
        let plan = CutPlan {
            device_qubits: self.device_qubits,
            cuts: self.cuts,
            assignment: self.assignment,
        };
        let graph = SubcircuitGraph {
            subcircuits,
            links: self.links,
            external_inputs: self.external_inputs,
            final_outputs: self.final_outputs,
            original: self.original,
            boundary: self.boundary,
        };
        Ok((plan, graph))
    }
}

/// Graphviz rendering: one node per subcircuit, one edge per boundary link.
pub fn to_dot(graph: &SubcircuitGraph) -> String {
    let mut s = String::from("digraph subcircuits {\n  rankdir=LR;\n  node [shape=box];\n");
    for (k, sub) in graph.subcircuits.iter().enumerate() {
        let wires: Vec<String> = sub.wire_map.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            s,
            "  s{k} [label=\"S{k}\\n{} qubits, {} gates\\nwires {}\"];",
            sub.circuit.num_wires(),
            sub.circuit.num_gates(),
            wires.join(",")
        );
    }
    for link in &graph.links {
        let _ = writeln!(
            s,
            "  s{} -> s{} [label=\"w{}\"];",
            link.producer.subcircuit, link.consumer.subcircuit, link.original_wire
        );
    }
    s.push_str("}\n");
    s
}
