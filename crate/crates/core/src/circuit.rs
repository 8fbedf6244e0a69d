//! Quantum circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over `num_wires` qubits. The order of
//! the list is an execution order; the per-wire chains of gates form the
//! dependency DAG consumed by the cut planner.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("gate {gate}: wire {wire} out of range for {num_wires} wires")]
    WireOutOfRange {
        gate: usize,
        wire: usize,
        num_wires: usize,
    },
    #[error("gate {gate}: expected {expected} wire(s), found {found}")]
    Arity {
        gate: usize,
        expected: usize,
        found: usize,
    },
    #[error("gate {gate}: CNOT control and target must differ")]
    RepeatedWire { gate: usize },
    #[error("gate {gate}: {kind} slot {slot} out of range (len {len})")]
    SlotOutOfRange {
        gate: usize,
        kind: SlotKind,
        slot: usize,
        len: usize,
    },
    #[error("{kind} slot {slot} referenced {count} times, expected exactly once")]
    SlotMultiplicity {
        kind: SlotKind,
        slot: usize,
        count: usize,
    },
    #[error("dependency cycle detected; {remaining} gate(s) could not be ordered")]
    Cycle { remaining: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Param,
    Input,
    Output,
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotKind::Param => "param",
            SlotKind::Input => "input",
            SlotKind::Output => "output",
        })
    }
}

/// Rotation axis of a single-qubit rotation gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "rx" => Ok(Axis::X),
            "y" | "ry" => Ok(Axis::Y),
            "z" | "rz" => Ok(Axis::Z),
            other => Err(format!("unknown rotation axis `{other}`")),
        }
    }
}

/// How classical features reach the quantum state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// One `EncodeAngle` gate per feature.
    #[default]
    Angle,
    /// Features become the (normalized) amplitudes of the initial state.
    Amplitude,
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "angle" => Ok(Encoding::Angle),
            "amplitude" => Ok(Encoding::Amplitude),
            other => Err(format!("unknown encoder `{other}`")),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Angle => "angle",
            Encoding::Amplitude => "amplitude",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx(usize),
    Ry(usize),
    Rz(usize),
    Cnot,
    /// `RX(inputs[slot])`.
    EncodeAngle(usize),
    /// Non-collapsing `<Z>` readout into `outputs[slot]`.
    MeasureZ(usize),
}

impl GateKind {
    pub fn rotation(axis: Axis, slot: usize) -> Self {
        match axis {
            Axis::X => GateKind::Rx(slot),
            Axis::Y => GateKind::Ry(slot),
            Axis::Z => GateKind::Rz(slot),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn param_slot(&self) -> Option<usize> {
        match *self {
            GateKind::Rx(s) | GateKind::Ry(s) | GateKind::Rz(s) => Some(s),
            _ => None,
        }
    }

    pub fn input_slot(&self) -> Option<usize> {
        match *self {
            GateKind::EncodeAngle(s) => Some(s),
            _ => None,
        }
    }

    pub fn output_slot(&self) -> Option<usize> {
        match *self {
            GateKind::MeasureZ(s) => Some(s),
            _ => None,
        }
    }

    /// Axis of the rotation this gate applies, if it is a rotation.
    pub fn rotation_axis(&self) -> Option<Axis> {
        match self {
            GateKind::Rx(_) | GateKind::EncodeAngle(_) => Some(Axis::X),
            GateKind::Ry(_) => Some(Axis::Y),
            GateKind::Rz(_) => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::EncodeAngle(_) => "ENC",
            GateKind::MeasureZ(_) => "MZ",
        }
    }

    fn slot(&self) -> Option<(SlotKind, usize)> {
        self.param_slot()
            .map(|s| (SlotKind::Param, s))
            .or_else(|| self.input_slot().map(|s| (SlotKind::Input, s)))
            .or_else(|| self.output_slot().map(|s| (SlotKind::Output, s)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub id: usize,
    pub kind: GateKind,
    pub wires: Vec<usize>,
}

impl Gate {
    pub fn touches(&self, wire: usize) -> bool {
        self.wires.contains(&wire)
    }
}

/// A validated circuit. Construct with [`Circuit::new`] or [`CircuitBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_wires: usize,
    gates: Vec<Gate>,
    num_params: usize,
    num_inputs: usize,
    num_outputs: usize,
    encoding: Encoding,
}

impl Circuit {
    /// Validates and assembles a circuit; gate ids are assigned from list order.
    ///
    /// For angle-encoded circuits every param, input and output slot must be
    /// referenced exactly once. Amplitude-encoded circuits carry no
    /// `EncodeAngle` gates; `num_inputs` is then the feature width, which must
    /// not exceed `2^num_wires`.
    pub fn new(
        num_wires: usize,
        num_params: usize,
        num_inputs: usize,
        num_outputs: usize,
        encoding: Encoding,
        ops: Vec<(GateKind, Vec<usize>)>,
    ) -> Result<Self, CircuitError> {
        if num_wires == 0 {
            return Err(CircuitError::Invalid("circuit has zero wires".into()));
        }
        let gates: Vec<Gate> = ops
            .into_iter()
            .enumerate()
            .map(|(id, (kind, wires))| Gate { id, kind, wires })
            .collect();

        let mut counts = [
            vec![0usize; num_params],
            vec![0usize; num_inputs],
            vec![0usize; num_outputs],
        ];
        for g in &gates {
            if g.wires.len() != g.kind.arity() {
                return Err(CircuitError::Arity {
                    gate: g.id,
                    expected: g.kind.arity(),
                    found: g.wires.len(),
                });
            }
            if let Some(&wire) = g.wires.iter().find(|&&w| w >= num_wires) {
                return Err(CircuitError::WireOutOfRange {
                    gate: g.id,
                    wire,
                    num_wires,
                });
            }
            if g.wires.len() == 2 && g.wires[0] == g.wires[1] {
                return Err(CircuitError::RepeatedWire { gate: g.id });
            }
            if let Some((kind, slot)) = g.kind.slot() {
                if kind == SlotKind::Input && encoding == Encoding::Amplitude {
                    return Err(CircuitError::Invalid(format!(
                        "gate {}: EncodeAngle in an amplitude-encoded circuit",
                        g.id
                    )));
                }
                let table = &mut counts[kind as usize];
                if slot >= table.len() {
                    return Err(CircuitError::SlotOutOfRange {
                        gate: g.id,
                        kind,
                        slot,
                        len: table.len(),
                    });
                }
                table[slot] += 1;
            }
        }
        for (kind, table) in [SlotKind::Param, SlotKind::Input, SlotKind::Output]
            .into_iter()
            .zip(&counts)
        {
            if kind == SlotKind::Input && encoding == Encoding::Amplitude {
                continue;
            }
            if let Some((slot, &count)) = table.iter().enumerate().find(|(_, &c)| c != 1) {
                return Err(CircuitError::SlotMultiplicity { kind, slot, count });
            }
        }
        if encoding == Encoding::Amplitude
            && (num_wires >= usize::BITS as usize || num_inputs > 1usize << num_wires)
        {
            return Err(CircuitError::Invalid(format!(
                "{num_inputs} amplitude features do not fit in {num_wires} qubits"
            )));
        }

        Ok(Self {
            num_wires,
            gates,
            num_params,
            num_inputs,
            num_outputs,
            encoding,
        })
    }

    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    /// Gate that reads `param` slot, if any.
    pub fn gate_for_param(&self, param: usize) -> Option<&Gate> {
        self.gates.iter().find(|g| g.kind.param_slot() == Some(param))
    }

    pub fn dependency_graph(&self) -> DependencyGraph {
        dependency_graph(self)
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, CircuitError> {
        text.parse()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CIRCUIT n={} params={} inputs={} outputs={}",
            self.num_wires, self.num_params, self.num_inputs, self.num_outputs
        )?;
        if self.encoding == Encoding::Amplitude {
            f.write_str(" encoding=amplitude")?;
        }
        writeln!(f)?;
        for g in &self.gates {
            f.write_str(g.kind.mnemonic())?;
            for w in &g.wires {
                write!(f, " {w}")?;
            }
            if let Some((_, slot)) = g.kind.slot() {
                write!(f, " {slot}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(CircuitError::Parse {
            line: 1,
            msg: "missing CIRCUIT header".into(),
        })?;
        let perr = |line: usize, msg: String| CircuitError::Parse { line, msg };
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("CIRCUIT") {
            return Err(perr(hline, "header must start with CIRCUIT".into()));
        }
        let (mut n, mut params, mut inputs, mut outputs) = (None, None, None, None);
        let mut encoding = Encoding::Angle;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| perr(hline, format!("malformed header field `{tok}`")))?;
            if key == "encoding" {
                encoding = value.parse().map_err(|e| perr(hline, e))?;
                continue;
            }
            let v: usize = value
                .parse()
                .map_err(|_| perr(hline, format!("bad integer in `{tok}`")))?;
            match key {
                "n" => n = Some(v),
                "params" => params = Some(v),
                "inputs" => inputs = Some(v),
                "outputs" => outputs = Some(v),
                _ => return Err(perr(hline, format!("unknown header field `{key}`"))),
            }
        }
        let missing = |name: &str| perr(hline, format!("header lacks `{name}=`"));
        let n = n.ok_or_else(|| missing("n"))?;
        let params = params.ok_or_else(|| missing("params"))?;
        let inputs = inputs.ok_or_else(|| missing("inputs"))?;
        let outputs = outputs.ok_or_else(|| missing("outputs"))?;

        let mut ops = Vec::new();
        for (line, body) in lines {
            let mut parts = body.split_whitespace();
            let mnemonic = parts.next().unwrap_or_default();
            let nums: Vec<usize> = parts
                .map(|p| {
                    p.parse()
                        .map_err(|_| perr(line, format!("bad integer `{p}`")))
                })
                .collect::<Result<_, _>>()?;
            let expect = |k: usize| {
                if nums.len() == k {
                    Ok(())
                } else {
                    Err(perr(
                        line,
                        format!("{mnemonic} takes {k} operand(s), found {}", nums.len()),
                    ))
                }
            };
            let op = match mnemonic {
                "CNOT" => {
                    expect(2)?;
                    (GateKind::Cnot, vec![nums[0], nums[1]])
                }
                "RX" | "RY" | "RZ" | "ENC" | "MZ" => {
                    expect(2)?;
                    let slot = nums[1];
                    let kind = match mnemonic {
                        "RX" => GateKind::Rx(slot),
                        "RY" => GateKind::Ry(slot),
                        "RZ" => GateKind::Rz(slot),
                        "ENC" => GateKind::EncodeAngle(slot),
                        _ => GateKind::MeasureZ(slot),
                    };
                    (kind, vec![nums[0]])
                }
                other => return Err(perr(line, format!("unknown gate `{other}`"))),
            };
            ops.push(op);
        }
        Circuit::new(n, params, inputs, outputs, encoding, ops)
    }
}

/// Incremental circuit construction with automatic slot allocation.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    num_wires: usize,
    encoding: Encoding,
    ops: Vec<(GateKind, Vec<usize>)>,
    params: usize,
    inputs: usize,
    outputs: usize,
}

impl CircuitBuilder {
    pub fn new(num_wires: usize) -> Self {
        Self {
            num_wires,
            encoding: Encoding::Angle,
            ops: Vec::new(),
            params: 0,
            inputs: 0,
            outputs: 0,
        }
    }

    /// Marks the circuit amplitude-encoded with `features` input values.
    pub fn amplitude(mut self, features: usize) -> Self {
        self.encoding = Encoding::Amplitude;
        self.inputs = features;
        self
    }

    pub fn rotation(&mut self, axis: Axis, wire: usize) -> &mut Self {
        let slot = self.params;
        self.params += 1;
        self.ops.push((GateKind::rotation(axis, slot), vec![wire]));
        self
    }

    pub fn rx(&mut self, wire: usize) -> &mut Self {
        self.rotation(Axis::X, wire)
    }

    pub fn ry(&mut self, wire: usize) -> &mut Self {
        self.rotation(Axis::Y, wire)
    }

    pub fn rz(&mut self, wire: usize) -> &mut Self {
        self.rotation(Axis::Z, wire)
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.ops.push((GateKind::Cnot, vec![control, target]));
        self
    }

    pub fn encode(&mut self, wire: usize) -> &mut Self {
        let slot = self.inputs;
        self.inputs += 1;
        self.ops.push((GateKind::EncodeAngle(slot), vec![wire]));
        self
    }

    pub fn measure(&mut self, wire: usize) -> &mut Self {
        let slot = self.outputs;
        self.outputs += 1;
        self.ops.push((GateKind::MeasureZ(slot), vec![wire]));
        self
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        Circuit::new(
            self.num_wires,
            self.params,
            self.inputs,
            self.outputs,
            self.encoding,
            self.ops,
        )
    }
}

/// Shape of the benchmark "basic entangling" ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzOptions {
    pub qubits: usize,
    pub layers: usize,
    pub encoding: Encoding,
    pub rotation: Axis,
}

impl AnsatzOptions {
    pub fn new(qubits: usize, layers: usize, encoding: Encoding) -> Self {
        Self {
            qubits,
            layers,
            encoding,
            rotation: Axis::X,
        }
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        let n = self.qubits;
        if n < 2 {
            return Err(CircuitError::Invalid(format!(
                "entangling ring needs at least 2 qubits, got {n}"
            )));
        }
        if self.layers == 0 {
            return Err(CircuitError::Invalid("ansatz needs at least one layer".into()));
        }
        let mut b = CircuitBuilder::new(n);
        match self.encoding {
            Encoding::Angle => {
                for w in 0..n {
                    b.encode(w);
                }
            }
            Encoding::Amplitude => {
                if n >= usize::BITS as usize {
                    return Err(CircuitError::Invalid(format!(
                        "{n} qubits is too many for amplitude encoding"
                    )));
                }
                b = b.amplitude(1 << n);
            }
        }
        for _ in 0..self.layers {
            for w in 0..n {
                b.rotation(self.rotation, w);
            }
            for w in 0..n {
                b.cnot(w, (w + 1) % n);
            }
        }
        for w in 0..n {
            b.measure(w);
        }
        b.build()
    }
}

/// Per layer: one rotation per wire, then a CNOT ring; `<Z>` on every wire.
pub fn build_ansatz(n: usize, layers: usize, encoding: Encoding) -> Result<Circuit, CircuitError> {
    AnsatzOptions::new(n, layers, encoding).build()
}

/// Per-wire data dependencies between gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    predecessors: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Builds a graph from explicit predecessor lists.
    pub fn from_predecessors(predecessors: Vec<Vec<usize>>) -> Self {
        let mut successors = vec![Vec::new(); predecessors.len()];
        for (g, preds) in predecessors.iter().enumerate() {
            for &p in preds {
                successors[p].push(g);
            }
        }
        Self {
            predecessors,
            successors,
        }
    }

    pub fn len(&self) -> usize {
        self.predecessors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predecessors.is_empty()
    }

    pub fn predecessors(&self, gate: usize) -> &[usize] {
        &self.predecessors[gate]
    }

    pub fn successors(&self, gate: usize) -> &[usize] {
        &self.successors[gate]
    }

    /// All `(from, to)` edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .predecessors
            .iter()
            .enumerate()
            .flat_map(|(g, ps)| ps.iter().map(move |&p| (p, g)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Topological order; among ready gates the smallest id goes first.
    pub fn priority_order(&self) -> Result<Vec<usize>, CircuitError> {
        let mut indegree: Vec<usize> = self.predecessors.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(g, _)| Reverse(g))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(g)) = ready.pop() {
            order.push(g);
            for &s in &self.successors[g] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.push(Reverse(s));
                }
            }
        }
        if order.len() != self.len() {
            return Err(CircuitError::Cycle {
                remaining: self.len() - order.len(),
            });
        }
        Ok(order)
    }
}

/// For each gate and each of its wires, the previous gate on that wire.
pub fn dependency_graph(circuit: &Circuit) -> DependencyGraph {
    let mut last_on_wire: Vec<Option<usize>> = vec![None; circuit.num_wires()];
    let mut predecessors = Vec::with_capacity(circuit.num_gates());
    for g in circuit.gates() {
        let mut preds: Vec<usize> = g
            .wires
            .iter()
            .filter_map(|&w| last_on_wire[w])
            .collect();
        preds.sort_unstable();
        preds.dedup();
        predecessors.push(preds);
        for &w in &g.wires {
            last_on_wire[w] = Some(g.id);
        }
    }
    DependencyGraph::from_predecessors(predecessors)
}

pub fn priority_order(circuit: &Circuit) -> Result<Vec<usize>, CircuitError> {
    dependency_graph(circuit).priority_order()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_ansatz_matches_construction_rule() {
        let c = build_ansatz(2, 1, Encoding::Angle).unwrap();
        let kinds: Vec<_> = c.gates().iter().map(|g| (g.kind, g.wires.clone())).collect();
        assert_eq!(
            kinds,
            vec![
                (GateKind::EncodeAngle(0), vec![0]),
                (GateKind::EncodeAngle(1), vec![1]),
                (GateKind::Rx(0), vec![0]),
                (GateKind::Rx(1), vec![1]),
                (GateKind::Cnot, vec![0, 1]),
                (GateKind::Cnot, vec![1, 0]),
                (GateKind::MeasureZ(0), vec![0]),
                (GateKind::MeasureZ(1), vec![1]),
            ]
        );
    }

    #[test]
    fn ansatz_counts() {
        let c = build_ansatz(8, 2, Encoding::Angle).unwrap();
        assert_eq!(c.num_params(), 16);
        assert_eq!(c.num_gates(), 48);
        for n in 2..12 {
            for layers in 1..4 {
                let c = build_ansatz(n, layers, Encoding::Angle).unwrap();
                assert_eq!(c.num_gates(), n + layers * 2 * n + n);
                assert_eq!(c.num_params(), layers * n);
                assert_eq!(c.num_inputs(), n);
                assert_eq!(c.num_outputs(), n);
            }
        }
        assert_eq!(build_ansatz(4, 2, Encoding::Angle).unwrap().num_gates(), 24);
    }

    #[test]
    fn amplitude_ansatz_has_no_encoders() {
        let c = build_ansatz(3, 2, Encoding::Amplitude).unwrap();
        assert_eq!(c.num_inputs(), 8);
        assert_eq!(c.num_gates(), 2 * 2 * 3 + 3);
        assert!(c.gates().iter().all(|g| g.kind.input_slot().is_none()));
    }

    #[test]
    fn ansatz_rejects_degenerate_shapes() {
        assert!(build_ansatz(1, 2, Encoding::Angle).is_err());
        assert!(build_ansatz(0, 2, Encoding::Angle).is_err());
        assert!(build_ansatz(3, 0, Encoding::Angle).is_err());
    }

    #[test]
    fn configurable_rotation_axis() {
        let mut opts = AnsatzOptions::new(3, 1, Encoding::Angle);
        opts.rotation = Axis::Y;
        let c = opts.build().unwrap();
        assert!(c.gates().iter().any(|g| matches!(g.kind, GateKind::Ry(_))));
        assert!(!c.gates().iter().any(|g| matches!(g.kind, GateKind::Rx(_))));
    }

    #[test]
    fn single_gate_has_no_predecessors() {
        let mut b = CircuitBuilder::new(1);
        b.rx(0);
        let c = b.build().unwrap();
        assert!(c.dependency_graph().predecessors(0).is_empty());
    }

    #[test]
    fn cnot_depends_on_last_gate_of_each_wire() {
        let c = build_ansatz(2, 1, Encoding::Angle).unwrap();
        let dg = c.dependency_graph();
        // CNOT(w0,w1) is gate 4; RX(p0,w0)=2, RX(p1,w1)=3.
        assert_eq!(dg.predecessors(4), &[2, 3]);
        // CNOT(w1,w0) depends only on the previous CNOT (deduplicated).
        assert_eq!(dg.predecessors(5), &[4]);
    }

    #[test]
    fn priority_order_is_identity_for_list_order() {
        let c = build_ansatz(5, 2, Encoding::Angle).unwrap();
        let order = priority_order(&c).unwrap();
        assert_eq!(order, (0..c.num_gates()).collect::<Vec<_>>());
    }

    #[test]
    fn independent_gate_keeps_id_order() {
        let mut b = CircuitBuilder::new(3);
        b.rx(0).rx(0).cnot(0, 1).rx(2);
        let c = b.build().unwrap();
        let order = priority_order(&c).unwrap();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn cycle_is_reported() {
        let dg = DependencyGraph::from_predecessors(vec![vec![1], vec![0], vec![]]);
        assert_eq!(dg.priority_order(), Err(CircuitError::Cycle { remaining: 2 }));
    }

    #[test]
    fn validation_errors() {
        let bad_wire = Circuit::new(2, 0, 0, 0, Encoding::Angle, vec![(GateKind::Cnot, vec![0, 2])]);
        assert!(matches!(bad_wire, Err(CircuitError::WireOutOfRange { .. })));
        let same = Circuit::new(2, 0, 0, 0, Encoding::Angle, vec![(GateKind::Cnot, vec![1, 1])]);
        assert!(matches!(same, Err(CircuitError::RepeatedWire { .. })));
        let arity = Circuit::new(2, 1, 0, 0, Encoding::Angle, vec![(GateKind::Rx(0), vec![0, 1])]);
        assert!(matches!(arity, Err(CircuitError::Arity { .. })));
        let unused = Circuit::new(2, 2, 0, 0, Encoding::Angle, vec![(GateKind::Rx(0), vec![0])]);
        assert!(matches!(
            unused,
            Err(CircuitError::SlotMultiplicity { kind: SlotKind::Param, slot: 1, count: 0 })
        ));
        let reused = Circuit::new(
            2,
            0,
            0,
            1,
            Encoding::Angle,
            vec![(GateKind::MeasureZ(0), vec![0]), (GateKind::MeasureZ(0), vec![1])],
        );
        assert!(matches!(reused, Err(CircuitError::SlotMultiplicity { count: 2, .. })));
        let oob = Circuit::new(1, 0, 1, 0, Encoding::Angle, vec![(GateKind::EncodeAngle(3), vec![0])]);
        assert!(matches!(oob, Err(CircuitError::SlotOutOfRange { .. })));
    }

    #[test]
    fn text_format_round_trip() {
        let c = build_ansatz(3, 2, Encoding::Angle).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("CIRCUIT n=3 params=6 inputs=3 outputs=3\n"));
        assert!(text.contains("\nRX 0 0\n"));
        assert!(text.contains("\nCNOT 2 0\n"));
        assert!(text.contains("\nMZ 2 2\n"));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);

        let amp = build_ansatz(2, 1, Encoding::Amplitude).unwrap();
        assert_eq!(Circuit::from_text(&amp.to_text()).unwrap(), amp);
    }

    #[test]
    fn text_format_errors_carry_line_numbers() {
        let err = Circuit::from_text("CIRCUIT n=2 params=0 inputs=0 outputs=0\nCNOT 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = Circuit::from_text("CIRCUIT n=2 params=0 inputs=0 outputs=0\nH 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        assert!(Circuit::from_text("").is_err());
        assert!(Circuit::from_text("CIRCUIT n=2 params=0 inputs=0").is_err());
    }
}
