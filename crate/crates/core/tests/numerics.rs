use qcut_core::circuit::{build_ansatz, CircuitBuilder, Encoding};
use qcut_core::cutplan::{cut_circuit, BoundaryEncoding, SubcircuitGraph};
use qcut_core::verify::{self, oracle_outputs, VerifyOptions};
use qcut_core::Simulator;

fn values(len: usize, scale: f64, shift: f64) -> Vec<f64> {
    (0..len).map(|i| ((i * 37 % 17) as f64 * scale) - shift).collect()
}

#[test]
fn simulator_agrees_with_dense_oracle() {
    let sim = Simulator::new();
    let options = VerifyOptions {
        oracle_cases: 300,
        seed: 11,
        ..VerifyOptions::default()
    };
    let check = verify::check_oracle_equivalence(|c, p, x| sim.run(c, p, x).map(|r| r.outputs), &options);
    assert!(check.passed(), "{:?}", check);
}

#[test]
fn adjoint_shift_and_finite_differences_agree() {
    let options = VerifyOptions {
        gradient_cases: 60,
        seed: 12,
        ..VerifyOptions::default()
    };
    for check in verify::check_gradients(&Simulator::new(), &options) {
        assert!(check.passed(), "{:?}", check);
    }
}

/// Two hand-built halves of the five-wire example, joined by hand.
#[test]
fn graph_run_matches_hand_composition() {
    let mut b = CircuitBuilder::new(5);
    for w in 0..5 {
        b.encode(w);
    }
    for w in 0..5 {
        b.rx(w);
    }
    for w in 0..4 {
        b.cnot(w, w + 1);
    }
    for w in 0..5 {
        b.measure(w);
    }
    let c = b.build().unwrap();
    let (_, graph) = cut_circuit(&c, 3).unwrap();

    let theta = [0.3, -1.1, 0.8, 2.0, -0.4];
    let x = [0.5, 1.2, -0.7, 0.9, 0.1];

    // wires 0,1,2: encode, rotate, CNOT(0,1), CNOT(1,2), measure all three
    let mut a = CircuitBuilder::new(3);
    for w in 0..3 {
        a.encode(w);
    }
    for w in 0..3 {
        a.rx(w);
    }
    a.cnot(0, 1).cnot(1, 2);
    for w in 0..3 {
        a.measure(w);
    }
    let a = a.build().unwrap();
    let out_a = oracle_outputs(&a, &theta[..3], &x[..3]);

    // wires 2,3,4: wire 2 restarts from the measured value
    let mut bb = CircuitBuilder::new(3);
    bb.encode(0).encode(1).encode(2).rx(1).rx(2).cnot(0, 1).cnot(1, 2);
    for w in 0..3 {
        bb.measure(w);
    }
    let bb = bb.build().unwrap();
    let out_b = oracle_outputs(&bb, &theta[3..], &[out_a[2], x[3], x[4]]);

    let expected = [out_a[0], out_a[1], out_b[0], out_b[1], out_b[2]];
    let got = Simulator::new().run_graph(&graph, &theta, &x).unwrap().outputs;
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-10, "{got:?} vs {expected:?}");
    }
}

/// Routes values along the graph's links but evaluates every subcircuit with the
/// dense oracle instead of the statevector kernels.
fn oracle_graph_outputs(graph: &SubcircuitGraph, params: &[f64], inputs: &[f64]) -> Vec<f64> {
    let mut outs: Vec<Vec<f64>> = Vec::new();
    for (k, sub) in graph.subcircuits.iter().enumerate() {
        let mut local = vec![f64::NAN; sub.circuit.num_inputs()];
        for e in graph.external_inputs.iter().filter(|e| e.at.subcircuit == k) {
            local[e.at.slot] = inputs[e.original];
        }
        for l in graph.links.iter().filter(|l| l.consumer.subcircuit == k) {
            local[l.consumer.slot] = graph.boundary.encode(outs[l.producer.subcircuit][l.producer.slot]);
        }
        assert!(local.iter().all(|v| v.is_finite()));
        let p: Vec<f64> = sub.param_map.iter().map(|&i| params[i]).collect();
        outs.push(oracle_outputs(&sub.circuit, &p, &local));
    }
    let mut result = vec![f64::NAN; graph.original.outputs];
    for fo in &graph.final_outputs {
        result[fo.original] = outs[fo.at.subcircuit][fo.at.slot];
    }
    result
}

#[test]
fn six_to_three_graph_matches_oracle_composition() {
    let c = build_ansatz(6, 2, Encoding::Angle).unwrap();
    let (_, graph) = cut_circuit(&c, 3).unwrap();
    let (p, x) = (values(12, 0.41, 2.0), values(6, 0.3, 1.4));
    for boundary in [BoundaryEncoding::Angle, BoundaryEncoding::Arccos] {
        let g = graph.clone().with_boundary(boundary);
        let got = Simulator::new().run_graph(&g, &p, &x).unwrap().outputs;
        let expected = oracle_graph_outputs(&g, &p, &x);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

fn check_graph_gradients(n: usize, m: usize) {
    let sim = Simulator::new();
    let c = build_ansatz(n, 2, Encoding::Angle).unwrap();
    let (_, g) = cut_circuit(&c, m).unwrap();
    let (p, x) = (values(2 * n, 0.37, 1.5), values(n, 0.21, 0.9));
    let up = values(n, 0.13, 1.0);
    let grads = sim.graph_gradients(&g, &p, &x, &up).unwrap();
    let f = |p: &[f64], x: &[f64]| -> f64 {
        let o = sim.run_graph(&g, p, x).unwrap().outputs;
        o.iter().zip(&up).map(|(a, b)| a * b).sum()
    };
    let h = 1e-5;
    for i in 0..p.len() {
        let (mut a, mut b) = (p.clone(), p.clone());
        a[i] += h;
        b[i] -= h;
        let fd = (f(&a, &x) - f(&b, &x)) / (2.0 * h);
        assert!((fd - grads.d_params[i]).abs() < 1e-7, "{n}-{m} param {i}");
    }
    for i in 0..x.len() {
        let (mut a, mut b) = (x.clone(), x.clone());
        a[i] += h;
        b[i] -= h;
        let fd = (f(&p, &a) - f(&p, &b)) / (2.0 * h);
        assert!((fd - grads.d_inputs[i]).abs() < 1e-7, "{n}-{m} input {i}");
    }
}

#[test]
fn graph_gradients_match_finite_differences() {
    check_graph_gradients(6, 3);
    check_graph_gradients(8, 3);
    check_graph_gradients(6, 2);
}

#[test]
fn zero_cut_identity_for_benchmark_sizes() {
    for check in verify::check_zero_cut_identity(&Simulator::new(), &VerifyOptions::default()) {
        assert!(check.passed(), "{:?}", check);
    }
}

#[test]
fn amplitude_circuit_runs_only_uncut() {
    let c = build_ansatz(3, 2, Encoding::Amplitude).unwrap();
    assert!(cut_circuit(&c, 2).is_err());
    let (_, graph) = cut_circuit(&c, 3).unwrap();
    let p = values(6, 0.5, 1.0);
    let x = values(8, 0.1, -0.2);
    let sim = Simulator::new();
    let a = sim.run(&c, &p, &x).unwrap().outputs;
    let b = sim.run_graph(&graph, &p, &x).unwrap().outputs;
    let o = oracle_outputs(&c, &p, &x);
    for ((u, v), w) in a.iter().zip(&b).zip(&o) {
        assert!((u - v).abs() < 1e-12 && (u - w).abs() < 1e-10);
    }
}
