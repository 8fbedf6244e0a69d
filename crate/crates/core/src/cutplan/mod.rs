//! Greedy wire-cut planning and subcircuit generation.
//!
//! [`design_cutting_points`] walks the gates in priority order and fills one
//! `m`-wire subcircuit at a time. A gate whose wires are all selected but
//! whose dependencies are not yet mapped blocks its wires for the rest of the
//! current subcircuit. [`generate_subcircuits`] then turns every wire that
//! crosses between subcircuits into a `MeasureZ` in the producer and an
//! `EncodeAngle` of the measured value in the consumer.

mod document;
mod validate;

pub use document::{to_dot, PlanDocument};
pub use validate::{validate, Violation};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{dependency_graph, Circuit, CircuitError, Encoding, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("a {0}-qubit device cannot host a CNOT; at least 2 qubits are required")]
    UnsupportedDevice(usize),
    #[error("amplitude-encoded circuits on {n} qubits cannot be cut for a {m}-qubit device")]
    UnsupportedEncoding { n: usize, m: usize },
    #[error("planning made no progress in subcircuit {subcircuit} with {unmapped} gate(s) left")]
    PlanningStuck { subcircuit: usize, unmapped: usize },
    #[error("plan does not match circuit: {0}")]
    InconsistentPlan(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A wire cut placed immediately before `before_gate` on `wire`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub wire: usize,
    pub before_gate: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub device_qubits: usize,
    /// Every place where consecutive gates on a wire land in different subcircuits.
    pub cuts: Vec<Cut>,
    /// Subcircuit index per gate id.
    pub assignment: Vec<usize>,
}

impl CutPlan {
    pub fn num_subcircuits(&self) -> usize {
        self.assignment.iter().max().map_or(0, |k| k + 1)
    }
}

/// How a measured boundary value is re-encoded in the consumer subcircuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryEncoding {
    /// `RX(v)`: plain angle embedding of the measured `<Z>`.
    #[default]
    Angle,
    /// `RX(arccos v)`: reproduces `<Z> = v` on the fresh wire.
    Arccos,
}

impl BoundaryEncoding {
    pub fn encode(self, v: f64) -> f64 {
        match self {
            BoundaryEncoding::Angle => v,
            BoundaryEncoding::Arccos => v.clamp(-1.0, 1.0).acos(),
        }
    }

    /// Derivative of [`BoundaryEncoding::encode`]; the arccos slope is capped near `|v| = 1`.
    pub fn derivative(self, v: f64) -> f64 {
        match self {
            BoundaryEncoding::Angle => 1.0,
            BoundaryEncoding::Arccos => -1.0 / (1.0 - v * v).max(1e-12).sqrt(),
        }
    }
}

impl std::str::FromStr for BoundaryEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "angle" => Ok(Self::Angle),
            "arccos" => Ok(Self::Arccos),
            other => Err(format!("unknown boundary encoding `{other}`")),
        }
    }
}

/// A `(subcircuit, slot)` address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotRef {
    pub subcircuit: usize,
    pub slot: usize,
}

/// Classical channel: producer `<Z>` output feeds a consumer `EncodeAngle` input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryLink {
    pub producer: SlotRef,
    pub consumer: SlotRef,
    pub original_wire: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExternalInput {
    pub at: SlotRef,
    pub original: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinalOutput {
    pub original: usize,
    pub at: SlotRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcircuit {
    pub circuit: Circuit,
    /// Local wire -> original wire.
    pub wire_map: Vec<usize>,
    /// Local param slot -> original param slot.
    pub param_map: Vec<usize>,
}

/// Slot counts of the circuit a graph was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginalShape {
    pub wires: usize,
    pub params: usize,
    pub inputs: usize,
    pub outputs: usize,
}

impl OriginalShape {
    pub fn of(circuit: &Circuit) -> Self {
        Self {
            wires: circuit.num_wires(),
            params: circuit.num_params(),
            inputs: circuit.num_inputs(),
            outputs: circuit.num_outputs(),
        }
    }
}

/// Sequentially executed subcircuits plus the classical wiring between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcircuitGraph {
    pub subcircuits: Vec<Subcircuit>,
    pub links: Vec<BoundaryLink>,
    pub external_inputs: Vec<ExternalInput>,
    /// Sorted by original output slot.
    pub final_outputs: Vec<FinalOutput>,
    pub original: OriginalShape,
    pub boundary: BoundaryEncoding,
}

impl SubcircuitGraph {
    pub fn num_subcircuits(&self) -> usize {
        self.subcircuits.len()
    }

    pub fn max_width(&self) -> usize {
        self.subcircuits
            .iter()
            .map(|s| s.circuit.num_wires())
            .max()
            .unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.subcircuits.iter().map(|s| s.circuit.num_params()).sum()
    }

    pub fn with_boundary(mut self, boundary: BoundaryEncoding) -> Self {
        self.boundary = boundary;
        self
    }
}

/// Greedy cutting-points design for an `m`-qubit device.
pub fn design_cutting_points(circuit: &Circuit, m: usize) -> Result<CutPlan, PlanError> {
    if m < 2 {
        return Err(PlanError::UnsupportedDevice(m));
    }
    let n = circuit.num_wires();
    if circuit.encoding() == Encoding::Amplitude && m < n {
        return Err(PlanError::UnsupportedEncoding { n, m });
    }
    let deps = dependency_graph(circuit);
    let order = deps.priority_order()?;
    let gates = circuit.gates();

    let mut assignment: Vec<Option<usize>> = vec![None; gates.len()];
    let mut unmapped = order;
    let mut subcircuit = 0;
    while !unmapped.is_empty() {
        let selected = select_wires(circuit, &unmapped, m);
        let mut blocked = vec![false; n];
        let mut still_unmapped = Vec::with_capacity(unmapped.len());
        let mut mapped_now = 0;
        for &g in &unmapped {
            let wires = &gates[g].wires;
            let fits = wires.iter().all(|&w| selected[w] && !blocked[w]);
            if !fits {
                still_unmapped.push(g);
                continue;
            }
            if deps.predecessors(g).iter().all(|&p| assignment[p].is_some()) {
                assignment[g] = Some(subcircuit);
                mapped_now += 1;
            } else {
                // cut before g: nothing further on its wires joins this subcircuit
                for &w in wires {
                    blocked[w] = true;
                }
                still_unmapped.push(g);
            }
        }
        if mapped_now == 0 {
            return Err(PlanError::PlanningStuck {
                subcircuit,
                unmapped: still_unmapped.len(),
            });
        }
        unmapped = still_unmapped;
        subcircuit += 1;
    }

    let assignment: Vec<usize> = assignment.into_iter().map(|a| a.expect("all mapped")).collect();
    let cuts = crossings(circuit, &assignment);
    Ok(CutPlan {
        device_qubits: m,
        cuts,
        assignment,
    })
}

/// Up to `m` wires touched by the earliest unmapped gates; a gate contributes
/// only if all of its wires still fit.
fn select_wires(circuit: &Circuit, unmapped: &[usize], m: usize) -> Vec<bool> {
    let mut selected = vec![false; circuit.num_wires()];
    let mut count = 0;
    for &g in unmapped {
        if count == m {
            break;
        }
        let wires = &circuit.gates()[g].wires;
        let new = wires.iter().filter(|&&w| !selected[w]).count();
        if count + new <= m {
            for &w in wires {
                selected[w] = true;
            }
            count += new;
        }
    }
    selected
}

/// `(wire, gate)` pairs where the previous gate on `wire` sits in another subcircuit.
fn crossings(circuit: &Circuit, assignment: &[usize]) -> Vec<Cut> {
    let mut last: Vec<Option<usize>> = vec![None; circuit.num_wires()];
    let mut cuts = Vec::new();
    for g in circuit.gates() {
        for &w in &g.wires {
            if let Some(prev) = last[w] {
                if assignment[prev] != assignment[g.id] {
                    cuts.push(Cut {
                        wire: w,
                        before_gate: g.id,
                    });
                }
            }
            last[w] = Some(g.id);
        }
    }
    cuts.sort_unstable_by_key(|c| (c.before_gate, c.wire));
    cuts
}

fn check_plan(circuit: &Circuit, plan: &CutPlan) -> Result<(), PlanError> {
    let bad = |msg: String| Err(PlanError::InconsistentPlan(msg));
    if plan.assignment.len() != circuit.num_gates() {
        return bad(format!(
            "assignment covers {} gates, circuit has {}",
            plan.assignment.len(),
            circuit.num_gates()
        ));
    }
    let k = plan.num_subcircuits();
    let mut used = vec![false; k];
    let mut wires = vec![std::collections::BTreeSet::new(); k];
    for g in circuit.gates() {
        let s = plan.assignment[g.id];
        used[s] = true;
        wires[s].extend(g.wires.iter().copied());
    }
    if let Some(empty) = used.iter().position(|u| !u) {
        return bad(format!("subcircuit {empty} has no gates"));
    }
    for (s, ws) in wires.iter().enumerate() {
        if ws.len() > plan.device_qubits {
            return bad(format!(
                "subcircuit {s} touches {} wires on a {}-qubit device",
                ws.len(),
                plan.device_qubits
            ));
        }
    }
    let deps = dependency_graph(circuit);
    for g in circuit.gates() {
        for &p in deps.predecessors(g.id) {
            if plan.assignment[p] > plan.assignment[g.id] {
                return bad(format!(
                    "gate {} runs before its dependency {p}",
                    g.id
                ));
            }
        }
    }
    let expected = crossings(circuit, &plan.assignment);
    let mut given = plan.cuts.clone();
    given.sort_unstable_by_key(|c| (c.before_gate, c.wire));
    if given != expected {
        return bad("cut list does not match the gate assignment".into());
    }
    Ok(())
}

/// Materializes the subcircuits of `plan`, replacing each cut with a
/// `MeasureZ` / `EncodeAngle` pair joined by a [`BoundaryLink`].
pub fn generate_subcircuits(
    circuit: &Circuit,
    plan: &CutPlan,
) -> Result<SubcircuitGraph, PlanError> {
    check_plan(circuit, plan)?;
    let k_total = plan.num_subcircuits();
    let gates = circuit.gates();

    // Per wire, the gate ids in list order.
    let mut on_wire: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_wires()];
    for g in gates {
        for &w in &g.wires {
            on_wire[w].push(g.id);
        }
    }
    // Per wire, the subcircuits its runs occupy, in execution order.
    let runs: Vec<Vec<usize>> = on_wire
        .iter()
        .map(|ids| {
            let mut r: Vec<usize> = ids.iter().map(|&g| plan.assignment[g]).collect();
            r.dedup();
            r
        })
        .collect();

    let mut subcircuits = Vec::with_capacity(k_total);
    let mut external_inputs = Vec::new();
    let mut final_outputs = Vec::new();
    // (wire, producer subcircuit) -> producer output slot
    let mut outbound: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    // (wire, consumer subcircuit) -> consumer input slot
    let mut inbound: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for k in 0..k_total {
        let members: Vec<usize> = gates
            .iter()
            .filter(|g| plan.assignment[g.id] == k)
            .map(|g| g.id)
            .collect();
        let mut wire_map: Vec<usize> = members
            .iter()
            .flat_map(|&g| gates[g].wires.iter().copied())
            .collect();
        wire_map.sort_unstable();
        wire_map.dedup();
        let local_wire = |w: usize| wire_map.binary_search(&w).expect("member wire");

        let mut param_map: Vec<usize> = members
            .iter()
            .filter_map(|&g| gates[g].kind.param_slot())
            .collect();
        param_map.sort_unstable();
        let mut input_origs: Vec<usize> = match circuit.encoding() {
            // uncut only: the single subcircuit takes every feature
            Encoding::Amplitude => (0..circuit.num_inputs()).collect(),
            Encoding::Angle => members
                .iter()
                .filter_map(|&g| gates[g].kind.input_slot())
                .collect(),
        };
        input_origs.sort_unstable();
        let mut output_origs: Vec<usize> = members
            .iter()
            .filter_map(|&g| gates[g].kind.output_slot())
            .collect();
        output_origs.sort_unstable();

        let incoming: Vec<usize> = wire_map
            .iter()
            .copied()
            .filter(|&w| runs[w].first() != Some(&k))
            .collect();
        let outgoing: Vec<usize> = wire_map
            .iter()
            .copied()
            .filter(|&w| runs[w].last() != Some(&k))
            .collect();

        let mut ops: Vec<(GateKind, Vec<usize>)> = Vec::new();
        for (i, &w) in incoming.iter().enumerate() {
            let slot = input_origs.len() + i;
            inbound.insert((w, k), slot);
            ops.push((GateKind::EncodeAngle(slot), vec![local_wire(w)]));
        }
        for &g in &members {
            let gate = &gates[g];
            let kind = match gate.kind {
                GateKind::Rx(p) => GateKind::Rx(param_map.binary_search(&p).unwrap()),
                GateKind::Ry(p) => GateKind::Ry(param_map.binary_search(&p).unwrap()),
                GateKind::Rz(p) => GateKind::Rz(param_map.binary_search(&p).unwrap()),
                GateKind::EncodeAngle(i) => {
                    GateKind::EncodeAngle(input_origs.binary_search(&i).unwrap())
                }
                GateKind::MeasureZ(o) => GateKind::MeasureZ(output_origs.binary_search(&o).unwrap()),
                GateKind::Cnot => GateKind::Cnot,
            };
            ops.push((kind, gate.wires.iter().map(|&w| local_wire(w)).collect()));
        }
        for (i, &w) in outgoing.iter().enumerate() {
            let slot = output_origs.len() + i;
            outbound.insert((w, k), slot);
            ops.push((GateKind::MeasureZ(slot), vec![local_wire(w)]));
        }

        for (slot, &orig) in input_origs.iter().enumerate() {
            external_inputs.push(ExternalInput {
                at: SlotRef { subcircuit: k, slot },
                original: orig,
            });
        }
        for (slot, &orig) in output_origs.iter().enumerate() {
            final_outputs.push(FinalOutput {
                original: orig,
                at: SlotRef { subcircuit: k, slot },
            });
        }

        let sub = Circuit::new(
            wire_map.len(),
            param_map.len(),
            input_origs.len() + incoming.len(),
            output_origs.len() + outgoing.len(),
            circuit.encoding(),
            ops,
        )?;
        subcircuits.push(Subcircuit {
            circuit: sub,
            wire_map,
            param_map,
        });
    }

    let mut links = Vec::new();
    for (w, r) in runs.iter().enumerate() {
        for pair in r.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            links.push(BoundaryLink {
                producer: SlotRef {
                    subcircuit: from,
                    slot: outbound[&(w, from)],
                },
                consumer: SlotRef {
                    subcircuit: to,
                    slot: inbound[&(w, to)],
                },
                original_wire: w,
            });
        }
    }
    links.sort_unstable_by_key(|l| (l.consumer, l.producer));
    final_outputs.sort_unstable_by_key(|f| f.original);

    Ok(SubcircuitGraph {
        subcircuits,
        links,
        external_inputs,
        final_outputs,
        original: OriginalShape::of(circuit),
        boundary: BoundaryEncoding::default(),
    })
}

/// Plans and generates in one step.
pub fn cut_circuit(circuit: &Circuit, m: usize) -> Result<(CutPlan, SubcircuitGraph), PlanError> {
    let plan = design_cutting_points(circuit, m)?;
    let graph = generate_subcircuits(circuit, &plan)?;
    Ok((plan, graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, CircuitBuilder};

    /// Five wires: a 3-wire block feeding a second 3-wire block through wire 2.
    pub(crate) fn five_to_three() -> Circuit {
        let mut b = CircuitBuilder::new(5);
        for w in 0..5 {
            b.encode(w);
        }
        for w in 0..5 {
            b.rx(w);
        }
        b.cnot(0, 1).cnot(1, 2).cnot(2, 3).cnot(3, 4);
        for w in 0..5 {
            b.measure(w);
        }
        b.build().unwrap()
    }

    #[test]
    fn no_cut_when_device_is_large_enough() {
        let c = build_ansatz(4, 2, Encoding::Angle).unwrap();
        for m in [4, 5, 10] {
            let plan = design_cutting_points(&c, m).unwrap();
            assert!(plan.cuts.is_empty());
            assert_eq!(plan.num_subcircuits(), 1);
            let g = generate_subcircuits(&c, &plan).unwrap();
            assert_eq!(g.subcircuits.len(), 1);
            assert_eq!(g.subcircuits[0].circuit, c);
            assert_eq!(g.subcircuits[0].wire_map, vec![0, 1, 2, 3]);
            assert!(g.links.is_empty());
        }
    }

    #[test]
    fn five_qubits_on_three_needs_one_cut() {
        let c = five_to_three();
        let plan = design_cutting_points(&c, 3).unwrap();
        assert_eq!(plan.cuts, vec![Cut { wire: 2, before_gate: 12 }]);
        assert_eq!(plan.num_subcircuits(), 2);
        let g = generate_subcircuits(&c, &plan).unwrap();
        assert_eq!(g.subcircuits[0].wire_map, vec![0, 1, 2]);
        assert_eq!(g.subcircuits[1].wire_map, vec![2, 3, 4]);
        assert_eq!(g.links.len(), 1);
        assert_eq!(g.links[0].original_wire, 2);
        assert!(validate(&g, 3).is_empty());
    }

    #[test]
    fn rejects_tiny_device() {
        let c = build_ansatz(3, 1, Encoding::Angle).unwrap();
        assert_eq!(design_cutting_points(&c, 1), Err(PlanError::UnsupportedDevice(1)));
        assert_eq!(design_cutting_points(&c, 0), Err(PlanError::UnsupportedDevice(0)));
    }

    #[test]
    fn amplitude_circuits_only_run_uncut() {
        let c = build_ansatz(3, 1, Encoding::Amplitude).unwrap();
        assert!(matches!(
            design_cutting_points(&c, 2),
            Err(PlanError::UnsupportedEncoding { n: 3, m: 2 })
        ));
        assert!(design_cutting_points(&c, 3).is_ok());
    }

    #[test]
    fn six_on_four_links_every_cut_once() {
        let c = build_ansatz(6, 2, Encoding::Angle).unwrap();
        let (plan, g) = cut_circuit(&c, 4).unwrap();
        assert!(!plan.cuts.is_empty());
        assert!(g.subcircuits.iter().all(|s| s.circuit.num_wires() <= 4));
        assert_eq!(g.links.len(), plan.cuts.len());
        for cut in &plan.cuts {
            let consumer = plan.assignment[cut.before_gate];
            let matching: Vec<_> = g
                .links
                .iter()
                .filter(|l| l.original_wire == cut.wire && l.consumer.subcircuit == consumer)
                .collect();
            assert_eq!(matching.len(), 1, "cut {cut:?}");
        }
        assert!(validate(&g, 4).is_empty());
    }

    #[test]
    fn cutting_keeps_parameter_count() {
        for n in [4, 6, 8] {
            let c = build_ansatz(n, 2, Encoding::Angle).unwrap();
            for m in 2..=n {
                let (_, g) = cut_circuit(&c, m).unwrap();
                assert_eq!(g.num_params(), c.num_params());
            }
        }
    }

    #[test]
    fn mismatched_plan_is_rejected() {
        let c = build_ansatz(4, 1, Encoding::Angle).unwrap();
        let other = build_ansatz(5, 1, Encoding::Angle).unwrap();
        let plan = design_cutting_points(&other, 2).unwrap();
        assert!(matches!(
            generate_subcircuits(&c, &plan),
            Err(PlanError::InconsistentPlan(_))
        ));

        let mut plan = design_cutting_points(&c, 2).unwrap();
        plan.assignment.reverse();
        assert!(matches!(
            generate_subcircuits(&c, &plan),
            Err(PlanError::InconsistentPlan(_))
        ));
    }

    #[test]
    fn planning_is_deterministic() {
        let c = build_ansatz(10, 2, Encoding::Angle).unwrap();
        assert_eq!(cut_circuit(&c, 3).unwrap(), cut_circuit(&c, 3).unwrap());
    }

    #[test]
    fn boundary_encoding_derivatives() {
        assert_eq!(BoundaryEncoding::Angle.encode(0.3), 0.3);
        let h = 1e-6;
        let v = 0.4;
        let fd = (BoundaryEncoding::Arccos.encode(v + h) - BoundaryEncoding::Arccos.encode(v - h)) / (2.0 * h);
        assert!((fd - BoundaryEncoding::Arccos.derivative(v)).abs() < 1e-6);
    }
}
