use qcut_core::circuit::{build_ansatz, Encoding, GateKind};
use qcut_core::cutplan::cut_circuit;
use qcut_core::profiler::{count_backward, count_forward, profile, FlopsTable};

const TABLE_CSV: &str = "\
Circuit,4,4-2,4-3,6,6-2,6-3,6-4,8,8-2,8-3,8-4,10,10-2,10-3,10-4
FW FLOPs,48,104,80,72,160,132,112,96,216,180,168,120,272,232,216
BW FLOPs,72,184,136,108,284,228,188,144,384,312,288,180,484,404,372
Tot FLOPs,120,288,216,180,444,360,300,240,600,492,456,300,756,636,588
";

#[test]
fn table_regression() {
    let table = FlopsTable::build(&[4, 6, 8, 10], &[2, 3, 4], 2).unwrap();
    assert_eq!(table.to_csv(), TABLE_CSV);
}

#[test]
fn original_forward_is_twelve_per_qubit() {
    for (n, fw) in [(4, 48), (6, 72), (8, 96), (10, 120)] {
        let c = build_ansatz(n, 2, Encoding::Angle).unwrap();
        assert_eq!(count_forward(&c), fw);
    }
}

/// Counts items by walking the generated subcircuits directly.
#[test]
fn six_four_counts_match_item_enumeration() {
    let c = build_ansatz(6, 2, Encoding::Angle).unwrap();
    let (_, g) = cut_circuit(&c, 4).unwrap();
    let mut gates = 0u64;
    let mut accumulations = 0u64;
    for sub in &g.subcircuits {
        for gate in sub.circuit.gates() {
            gates += 1;
            if !matches!(gate.kind, GateKind::Cnot | GateKind::MeasureZ(_)) {
                accumulations += 1;
            }
        }
    }
    let links = g.links.len() as u64;
    assert_eq!(gates, 36 + 2 * links);
    assert_eq!(count_forward(&g), 2 * gates);
    assert_eq!(count_backward(&g), 2 * (gates + accumulations + links));
    assert_eq!(count_forward(&g), 112);
}

#[test]
fn cutting_costs_more_and_wider_devices_cost_less() {
    let table = FlopsTable::build(&[4, 6, 8, 10], &[2, 3, 4], 2).unwrap();
    for n in [4, 6, 8, 10] {
        let orig = table.get(n, None).unwrap().total;
        let cut: Vec<u64> = [2, 3, 4]
            .iter()
            .filter(|&&m| m < n)
            .map(|&m| table.get(n, Some(m)).unwrap().total)
            .collect();
        assert!(cut.iter().all(|&t| t > orig), "{n}");
        assert!(cut.windows(2).all(|w| w[0] > w[1]), "{n}");
    }
    for col in &table.columns {
        let r = &col.report;
        assert_eq!(r.total, r.forward + r.backward);
        assert!(r.backward >= r.forward);
        assert_eq!(profile(&build_ansatz(col.qubits, 2, Encoding::Angle).unwrap()).forward, 12 * col.qubits as u64);
    }
}
