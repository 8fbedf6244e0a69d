//! Item-based FLOPs accounting for the quantum layer.
//!
//! Forward: 2 per gate instance, which covers rotations, CNOTs, encodings,
//! measurements and boundary re-encodings alike.
//! Backward: 2 per gate revisited by the reverse sweep, 2 per gradient
//! accumulation (each rotation's parameter and each encoding's input), and 2
//! per boundary sensitivity handed from a consumer to its producer.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{build_ansatz, Circuit, Encoding, GateKind};
use crate::cutplan::{cut_circuit, PlanError, SubcircuitGraph};

pub const FLOPS_PER_ITEM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubcircuitFlops {
    pub forward: u64,
    pub backward: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsReport {
    pub forward: u64,
    pub backward: u64,
    pub total: u64,
    /// One entry per subcircuit; boundary propagations are charged to the consumer.
    pub breakdown: Vec<SubcircuitFlops>,
}

#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Circuit(&'a Circuit),
    Graph(&'a SubcircuitGraph),
}

impl<'a> From<&'a Circuit> for Target<'a> {
    fn from(c: &'a Circuit) -> Self {
        Target::Circuit(c)
    }
}

impl<'a> From<&'a SubcircuitGraph> for Target<'a> {
    fn from(g: &'a SubcircuitGraph) -> Self {
        Target::Graph(g)
    }
}

fn circuit_items(c: &Circuit) -> SubcircuitFlops {
    let gates = c.num_gates() as u64;
    let accumulations = c
        .gates()
        .iter()
        .filter(|g| g.kind.param_slot().is_some() || matches!(g.kind, GateKind::EncodeAngle(_)))
        .count() as u64;
    SubcircuitFlops {
        forward: FLOPS_PER_ITEM * gates,
        backward: FLOPS_PER_ITEM * (gates + accumulations),
    }
}

fn breakdown(target: Target<'_>) -> Vec<SubcircuitFlops> {
    match target {
        Target::Circuit(c) => vec![circuit_items(c)],
        Target::Graph(g) => {
            let mut parts: Vec<SubcircuitFlops> =
                g.subcircuits.iter().map(|s| circuit_items(&s.circuit)).collect();
            for link in &g.links {
                parts[link.consumer.subcircuit].backward += FLOPS_PER_ITEM;
            }
            parts
        }
    }
}

pub fn count_forward<'a>(target: impl Into<Target<'a>>) -> u64 {
    breakdown(target.into()).iter().map(|p| p.forward).sum()
}

pub fn count_backward<'a>(target: impl Into<Target<'a>>) -> u64 {
    breakdown(target.into()).iter().map(|p| p.backward).sum()
}

pub fn profile<'a>(target: impl Into<Target<'a>>) -> FlopsReport {
    let parts = breakdown(target.into());
    let forward = parts.iter().map(|p| p.forward).sum();
    let backward = parts.iter().map(|p| p.backward).sum();
    FlopsReport {
        forward,
        backward,
        total: forward + backward,
        breakdown: parts,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsColumn {
    pub qubits: usize,
    /// `None` for the original circuit.
    pub device_qubits: Option<usize>,
    pub report: FlopsReport,
}

impl FlopsColumn {
    pub fn label(&self) -> String {
        match self.device_qubits {
            Some(m) => format!("{}-{m}", self.qubits),
            None => self.qubits.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsTable {
    pub columns: Vec<FlopsColumn>,
}

impl FlopsTable {
    /// For each `n`: the original ansatz, then its cut for every `m < n` in `devices`.
    pub fn build(qubits: &[usize], devices: &[usize], layers: usize) -> Result<Self, PlanError> {
        let mut columns = Vec::new();
        for &n in qubits {
            let circuit = build_ansatz(n, layers, Encoding::Angle)?;
            columns.push(FlopsColumn {
                qubits: n,
                device_qubits: None,
                report: profile(&circuit),
            });
            for &m in devices.iter().filter(|&&m| m < n) {
                let (_, graph) = cut_circuit(&circuit, m)?;
                columns.push(FlopsColumn {
                    qubits: n,
                    device_qubits: Some(m),
                    report: profile(&graph),
                });
            }
        }
        Ok(Self { columns })
    }

    pub fn get(&self, qubits: usize, device_qubits: Option<usize>) -> Option<&FlopsReport> {
        self.columns
            .iter()
            .find(|c| c.qubits == qubits && c.device_qubits == device_qubits)
            .map(|c| &c.report)
    }

    /// Configurations as columns, FW/BW/Tot as rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("Circuit");
        for c in &self.columns {
            let _ = write!(s, ",{}", c.label());
        }
        s.push('\n');
        let rows: [(&str, fn(&FlopsReport) -> u64); 3] = [
            ("FW FLOPs", |r| r.forward),
            ("BW FLOPs", |r| r.backward),
            ("Tot FLOPs", |r| r.total),
        ];
        for (name, get) in rows {
            s.push_str(name);
            for c in &self.columns {
                let _ = write!(s, ",{}", get(&c.report));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    #[test]
    fn original_forward_counts() {
        for (n, fw) in [(4, 48), (6, 72), (8, 96), (10, 120)] {
            let c = build_ansatz(n, 2, Encoding::Angle).unwrap();
            assert_eq!(count_forward(&c), fw);
        }
    }

    #[test]
    fn empty_circuit_costs_nothing() {
        let c = CircuitBuilder::new(1).build().unwrap();
        assert_eq!(count_backward(&c), 0);
        assert_eq!(profile(&c).total, 0);
    }

    #[test]
    fn report_totals_and_breakdown_agree() {
        let c = build_ansatz(6, 2, Encoding::Angle).unwrap();
        let (_, g) = cut_circuit(&c, 3).unwrap();
        let r = profile(&g);
        assert_eq!(r.total, r.forward + r.backward);
        assert_eq!(r.breakdown.len(), g.num_subcircuits());
        assert_eq!(r.forward, r.breakdown.iter().map(|p| p.forward).sum::<u64>());
        assert_eq!(r.backward, r.breakdown.iter().map(|p| p.backward).sum::<u64>());
        assert!(r.backward >= r.forward);
    }

    #[test]
    fn table_layout() {
        let t = FlopsTable::build(&[4, 6], &[2, 3, 4], 2).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Circuit,4,4-2,4-3,6,6-2,6-3,6-4");
        assert!(lines[1].starts_with("FW FLOPs,48,"));
        assert!(lines[3].starts_with("Tot FLOPs,"));
        assert_eq!(lines.len(), 4);
    }
}
