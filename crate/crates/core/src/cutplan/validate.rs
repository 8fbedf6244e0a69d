use std::fmt;

use crate::circuit::GateKind;

use super::{SlotRef, SubcircuitGraph};

/// One broken invariant of a [`SubcircuitGraph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooWide {
        subcircuit: usize,
        wires: usize,
        limit: usize,
    },
    IdleWire {
        subcircuit: usize,
        wire: usize,
    },
    WireMap {
        subcircuit: usize,
        detail: String,
    },
    ParamMap {
        subcircuit: usize,
        detail: String,
    },
    ParamCoverage {
        param: usize,
        count: usize,
    },
    LinkOrder {
        link: usize,
        producer: usize,
        consumer: usize,
    },
    LinkWire {
        link: usize,
        detail: String,
    },
    DanglingSlot {
        context: String,
        at: SlotRef,
    },
    InputBinding {
        at: SlotRef,
        count: usize,
    },
    InputCoverage {
        original: usize,
        count: usize,
    },
    OutputCoverage {
        original: usize,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooWide {
                subcircuit,
                wires,
                limit,
            } => write!(f, "subcircuit {subcircuit} uses {wires} > {limit} wires"),
            Violation::IdleWire { subcircuit, wire } => {
                write!(f, "subcircuit {subcircuit}: local wire {wire} hosts no gate")
            }
            Violation::WireMap { subcircuit, detail } => {
                write!(f, "subcircuit {subcircuit}: wire map {detail}")
            }
            Violation::ParamMap { subcircuit, detail } => {
                write!(f, "subcircuit {subcircuit}: param map {detail}")
            }
            Violation::ParamCoverage { param, count } => {
                write!(f, "original param {param} mapped {count} times")
            }
            Violation::LinkOrder {
                link,
                producer,
                consumer,
            } => write!(
                f,
                "link {link}: producer subcircuit {producer} does not precede consumer {consumer}"
            ),
            Violation::LinkWire { link, detail } => write!(f, "link {link}: {detail}"),
            Violation::DanglingSlot { context, at } => write!(
                f,
                "{context} refers to missing slot {} of subcircuit {}",
                at.slot, at.subcircuit
            ),
            Violation::InputBinding { at, count } => write!(
                f,
                "input {} of subcircuit {} bound {count} times",
                at.slot, at.subcircuit
            ),
            Violation::InputCoverage { original, count } => {
                write!(f, "original input {original} fed {count} times")
            }
            Violation::OutputCoverage { original, count } => {
                write!(f, "original output {original} produced {count} times")
            }
        }
    }
}

/// All invariant violations of `graph` for an `m`-qubit device; empty means valid.
pub fn validate(graph: &SubcircuitGraph, m: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let subs = &graph.subcircuits;
    let orig = graph.original;

    let mut param_count = vec![0usize; orig.params];
    for (k, sub) in subs.iter().enumerate() {
        let c = &sub.circuit;
        if c.num_wires() > m {
            out.push(Violation::TooWide {
                subcircuit: k,
                wires: c.num_wires(),
                limit: m,
            });
        }
        let mut busy = vec![false; c.num_wires()];
        for g in c.gates() {
            for &w in &g.wires {
                busy[w] = true;
            }
        }
        for (wire, _) in busy.iter().enumerate().filter(|(_, b)| !**b) {
            out.push(Violation::IdleWire { subcircuit: k, wire });
        }
        if sub.wire_map.len() != c.num_wires() {
            out.push(Violation::WireMap {
                subcircuit: k,
                detail: format!("has {} entries for {} wires", sub.wire_map.len(), c.num_wires()),
            });
        }
        let mut seen = sub.wire_map.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != sub.wire_map.len() {
            out.push(Violation::WireMap {
                subcircuit: k,
                detail: "repeats an original wire".into(),
            });
        }
        if let Some(w) = sub.wire_map.iter().find(|&&w| w >= orig.wires) {
            out.push(Violation::WireMap {
                subcircuit: k,
                detail: format!("names wire {w} beyond the original {}", orig.wires),
            });
        }
        if sub.param_map.len() != c.num_params() {
            out.push(Violation::ParamMap {
                subcircuit: k,
                detail: format!("has {} entries for {} params", sub.param_map.len(), c.num_params()),
            });
        }
        for &p in &sub.param_map {
            match param_count.get_mut(p) {
                Some(n) => *n += 1,
                None => out.push(Violation::ParamMap {
                    subcircuit: k,
                    detail: format!("names param {p} beyond the original {}", orig.params),
                }),
            }
        }
    }
    for (param, &count) in param_count.iter().enumerate() {
        if count != 1 {
            out.push(Violation::ParamCoverage { param, count });
        }
    }

    let output_ok = |at: &SlotRef| subs.get(at.subcircuit).is_some_and(|s| at.slot < s.circuit.num_outputs());
    let input_ok = |at: &SlotRef| subs.get(at.subcircuit).is_some_and(|s| at.slot < s.circuit.num_inputs());
    let mut bindings: Vec<Vec<usize>> = subs.iter().map(|s| vec![0; s.circuit.num_inputs()]).collect();

    for (i, link) in graph.links.iter().enumerate() {
        let mut ok = true;
        if !output_ok(&link.producer) {
            out.push(Violation::DanglingSlot {
                context: format!("link {i} producer"),
                at: link.producer,
            });
            ok = false;
        }
        if !input_ok(&link.consumer) {
            out.push(Violation::DanglingSlot {
                context: format!("link {i} consumer"),
                at: link.consumer,
            });
            ok = false;
        }
        if link.producer.subcircuit >= link.consumer.subcircuit {
            out.push(Violation::LinkOrder {
                link: i,
                producer: link.producer.subcircuit,
                consumer: link.consumer.subcircuit,
            });
        }
        if !ok {
            continue;
        }
        bindings[link.consumer.subcircuit][link.consumer.slot] += 1;
        let wire_of = |at: &SlotRef, want: fn(&GateKind) -> Option<usize>| {
            let sub = &subs[at.subcircuit];
            sub.circuit
                .gates()
                .iter()
                .find(|g| want(&g.kind) == Some(at.slot))
                .and_then(|g| sub.wire_map.get(g.wires[0]).copied())
        };
        for (end, found) in [
            ("producer", wire_of(&link.producer, GateKind::output_slot)),
            ("consumer", wire_of(&link.consumer, GateKind::input_slot)),
        ] {
            if found != Some(link.original_wire) {
                out.push(Violation::LinkWire {
                    link: i,
                    detail: format!(
                        "{end} sits on wire {found:?}, link claims wire {}",
                        link.original_wire
                    ),
                });
            }
        }
    }

    let mut input_count = vec![0usize; orig.inputs];
    for ext in &graph.external_inputs {
        if !input_ok(&ext.at) {
            out.push(Violation::DanglingSlot {
                context: format!("external input {}", ext.original),
                at: ext.at,
            });
        } else {
            bindings[ext.at.subcircuit][ext.at.slot] += 1;
        }
        match input_count.get_mut(ext.original) {
            Some(n) => *n += 1,
            None => out.push(Violation::InputCoverage {
                original: ext.original,
                count: 1,
            }),
        }
    }
    for (original, &count) in input_count.iter().enumerate() {
        if count != 1 {
            out.push(Violation::InputCoverage { original, count });
        }
    }
    for (k, slots) in bindings.iter().enumerate() {
        for (slot, &count) in slots.iter().enumerate() {
            if count != 1 {
                out.push(Violation::InputBinding {
                    at: SlotRef { subcircuit: k, slot },
                    count,
                });
            }
        }
    }

    let mut output_count = vec![0usize; orig.outputs];
    for fo in &graph.final_outputs {
        if !output_ok(&fo.at) {
            out.push(Violation::DanglingSlot {
                context: format!("final output {}", fo.original),
                at: fo.at,
            });
        }
        match output_count.get_mut(fo.original) {
            Some(n) => *n += 1,
            None => out.push(Violation::OutputCoverage {
                original: fo.original,
                count: 1,
            }),
        }
    }
    for (original, &count) in output_count.iter().enumerate() {
        if count != 1 {
            out.push(Violation::OutputCoverage { original, count });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, Circuit, CircuitBuilder, Encoding};
    use crate::cutplan::{cut_circuit, Subcircuit};

    fn graph_6_3() -> SubcircuitGraph {
        let c = build_ansatz(6, 2, Encoding::Angle).unwrap();
        cut_circuit(&c, 3).unwrap().1
    }

    #[test]
    fn generated_graph_is_valid() {
        assert!(validate(&graph_6_3(), 3).is_empty());
    }

    #[test]
    fn oversized_subcircuit_is_reported() {
        let mut g = graph_6_3();
        let mut b = CircuitBuilder::new(5);
        for w in 0..5 {
            b.rx(w);
        }
        let wide: Circuit = b.build().unwrap();
        g.subcircuits[2] = Subcircuit {
            circuit: wide,
            wire_map: vec![0, 1, 2, 3, 4],
            param_map: g.subcircuits[2].param_map.clone(),
        };
        let report = validate(&g, 4);
        let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
        assert!(msgs.contains(&"subcircuit 2 uses 5 > 4 wires".to_string()), "{msgs:?}");
        assert_eq!(
            report.iter().filter(|v| matches!(v, Violation::TooWide { .. })).count(),
            1
        );
    }
}
