use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qcut_core::circuit::{build_ansatz, Encoding};
use qcut_core::cutplan::cut_circuit;
use qcut_core::Simulator;

fn inputs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let params = (0..2 * n).map(|i| 0.3 + 0.1 * i as f64).collect();
    let x = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
    (params, x)
}

fn original(c: &mut Criterion) {
    let sim = Simulator::new();
    let mut group = c.benchmark_group("original");
    for n in [4, 8, 12] {
        let circuit = build_ansatz(n, 2, Encoding::Angle).unwrap();
        let (params, x) = inputs(n);
        let upstream = vec![1.0; circuit.num_outputs()];
        group.bench_with_input(BenchmarkId::new("run", n), &n, |b, _| {
            b.iter(|| sim.run(&circuit, black_box(&params), black_box(&x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("vjp", n), &n, |b, _| {
            b.iter(|| sim.vjp(&circuit, black_box(&params), black_box(&x), &upstream).unwrap())
        });
    }
    group.finish();
}

fn cut(c: &mut Criterion) {
    let sim = Simulator::new();
    let mut group = c.benchmark_group("cut");
    for (n, m) in [(6, 2), (6, 3), (8, 3)] {
        let circuit = build_ansatz(n, 2, Encoding::Angle).unwrap();
        let (_, graph) = cut_circuit(&circuit, m).unwrap();
        let (params, x) = inputs(n);
        let upstream = vec![1.0; circuit.num_outputs()];
        let id = format!("{n}-{m}");
        group.bench_function(BenchmarkId::new("run_graph", &id), |b| {
            b.iter(|| sim.run_graph(&graph, black_box(&params), black_box(&x)).unwrap())
        });
        group.bench_function(BenchmarkId::new("graph_gradients", &id), |b| {
            b.iter(|| sim.graph_gradients(&graph, black_box(&params), black_box(&x), &upstream).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, original, cut);
criterion_main!(benches);
