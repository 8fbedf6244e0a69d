//! Numerical self-checks: an independent dense-matrix oracle, a random
//! circuit generator, and the suites behind `qcut verify`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Axis, Circuit, CircuitBuilder, Encoding, GateKind};
use crate::hqnn::{Architecture, HybridModel, ModelError};
use crate::simulator::{SimError, Simulator};

type Matrix = Vec<Vec<Complex64>>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn identity2() -> Matrix {
    vec![vec![ONE, ZERO], vec![ZERO, ONE]]
}

fn rotation_matrix(axis: Axis, theta: f64) -> Matrix {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    match axis {
        Axis::X => vec![
            vec![c, Complex64::new(0.0, -s)],
            vec![Complex64::new(0.0, -s), c],
        ],
        Axis::Y => vec![
            vec![c, Complex64::new(-s, 0.0)],
            vec![Complex64::new(s, 0.0), c],
        ],
        Axis::Z => vec![
            vec![Complex64::from_polar(1.0, -theta / 2.0), ZERO],
            vec![ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ],
    }
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![ZERO; ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Full operator from per-wire factors; wire `w` is bit `w` of the basis index,
/// so the highest wire is the leftmost Kronecker factor.
fn tensor(num_wires: usize, factor: impl Fn(usize) -> Matrix) -> Matrix {
    let mut m = vec![vec![ONE]];
    for w in (0..num_wires).rev() {
        m = kron(&m, &factor(w));
    }
    m
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn gate_matrix(num_wires: usize, kind: GateKind, wires: &[usize], params: &[f64], inputs: &[f64]) -> Matrix {
    let single = |target: usize, u: Matrix| {
        tensor(num_wires, |w| if w == target { u.clone() } else { identity2() })
    };
    match kind {
        GateKind::Rx(s) => single(wires[0], rotation_matrix(Axis::X, params[s])),
        GateKind::Ry(s) => single(wires[0], rotation_matrix(Axis::Y, params[s])),
        GateKind::Rz(s) => single(wires[0], rotation_matrix(Axis::Z, params[s])),
        GateKind::EncodeAngle(s) => single(wires[0], rotation_matrix(Axis::X, inputs[s])),
        GateKind::Cnot => {
            let (c, t) = (wires[0], wires[1]);
            let p0 = vec![vec![ONE, ZERO], vec![ZERO, ZERO]];
            let p1 = vec![vec![ZERO, ZERO], vec![ZERO, ONE]];
            let x = vec![vec![ZERO, ONE], vec![ONE, ZERO]];
            let keep = tensor(num_wires, |w| if w == c { p0.clone() } else { identity2() });
            let flip = tensor(num_wires, |w| {
                if w == c {
                    p1.clone()
                } else if w == t {
                    x.clone()
                } else {
                    identity2()
                }
            });
            add(&keep, &flip)
        }
        GateKind::MeasureZ(_) => tensor(num_wires, |_| identity2()),
    }
}

/// Reference evaluation by explicit unitary-matrix products. Slow, dense, and
/// deliberately independent of the statevector kernels.
pub fn oracle_outputs(circuit: &Circuit, params: &[f64], inputs: &[f64]) -> Vec<f64> {
    let n = circuit.num_wires();
    let dim = 1usize << n;
    let mut psi = vec![ZERO; dim];
    match circuit.encoding() {
        Encoding::Angle => psi[0] = ONE,
        Encoding::Amplitude => {
            let norm = inputs.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (a, x) in psi.iter_mut().zip(inputs) {
                *a = Complex64::new(x / norm, 0.0);
            }
        }
    }
    let z = vec![vec![ONE, ZERO], vec![ZERO, -ONE]];
    let mut outputs = vec![0.0; circuit.num_outputs()];
    for gate in circuit.gates() {
        if let GateKind::MeasureZ(slot) = gate.kind {
            let zw = tensor(n, |w| if w == gate.wires[0] { z.clone() } else { identity2() });
            let zpsi = apply(&zw, &psi);
            outputs[slot] = psi.iter().zip(&zpsi).map(|(a, b)| (a.conj() * b).re).sum();
        } else {
            psi = apply(&gate_matrix(n, gate.kind, &gate.wires, params, inputs), &psi);
        }
    }
    outputs
}

/// A circuit with concrete parameter and input values.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCase {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub inputs: Vec<f64>,
}

/// Random circuit over the full gate set, ending in at least one measurement.
/// Measurements may also appear mid-circuit. About one case in five is
/// amplitude-encoded.
pub fn random_circuit(rng: &mut impl Rng, max_qubits: usize, max_gates: usize) -> RandomCase {
    let n = rng.gen_range(1..=max_qubits.max(1));
    let amplitude = rng.gen_bool(0.2);
    let mut b = CircuitBuilder::new(n);
    if amplitude {
        b = b.amplitude(rng.gen_range(1..=1usize << n));
    }
    let gates = rng.gen_range(1..=max_gates.max(1));
    for _ in 0..gates - 1 {
        let wire = rng.gen_range(0..n);
        match rng.gen_range(0..20) {
            0..=2 if !amplitude => {
                b.encode(wire);
            }
            3..=5 => {
                b.measure(wire);
            }
            6..=10 if n > 1 => {
                let mut target = rng.gen_range(0..n - 1);
                if target >= wire {
                    target += 1;
                }
                b.cnot(wire, target);
            }
            k => {
                let axis = [Axis::X, Axis::Y, Axis::Z][k % 3];
                b.rotation(axis, wire);
            }
        }
    }
    b.measure(rng.gen_range(0..n));
    let circuit = b.build().expect("generated circuit is valid");
    let params = (0..circuit.num_params())
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    let inputs = (0..circuit.num_inputs())
        .map(|_| {
            if amplitude {
                rng.gen_range(0.1..1.0)
            } else {
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
            }
        })
        .collect();
    RandomCase {
        circuit,
        params,
        inputs,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failure: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            max_error: 0.0,
            tolerance,
            failure: None,
        }
    }

    fn record(&mut self, error: f64, context: impl FnOnce() -> String) {
        if error > self.max_error || error.is_nan() {
            self.max_error = error;
        }
        if self.failure.is_none() && !(error <= self.tolerance) {
            self.failure = Some(context());
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = write!(
                s,
                "{} {}: {} cases, max error {:.3e} (tolerance {:.0e})",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_error,
                c.tolerance
            );
            if let Some(f) = &c.failure {
                let _ = write!(s, "; first failure: {f}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub oracle_cases: usize,
    pub gradient_cases: usize,
    pub max_qubits: usize,
    pub max_gates: usize,
    pub zero_cut_qubits: [usize; 4],
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            oracle_cases: 1000,
            gradient_cases: 200,
            max_qubits: 6,
            max_gates: 40,
            zero_cut_qubits: [4, 6, 8, 10],
            seed: 0,
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares `runner` against [`oracle_outputs`] on random circuits.
pub fn check_oracle_equivalence<F>(runner: F, options: &VerifyOptions) -> CheckResult
where
    F: Fn(&Circuit, &[f64], &[f64]) -> Result<Vec<f64>, SimError>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut check = CheckResult::new("oracle-equivalence", 1e-10);
    for case_id in 0..options.oracle_cases {
        let case = random_circuit(&mut rng, options.max_qubits, options.max_gates);
        check.cases += 1;
        match runner(&case.circuit, &case.params, &case.inputs) {
            Ok(out) => {
                let expected = oracle_outputs(&case.circuit, &case.params, &case.inputs);
                let err = max_abs_diff(&out, &expected);
                check.record(err, || format!("case {case_id}, error {err:.3e}"));
            }
            Err(e) => check.fail(format!("case {case_id}: {e}")),
        }
    }
    check
}

/// Adjoint Jacobians against parameter shift (params) and central finite
/// differences with `h = 1e-5` (params and inputs).
pub fn check_gradients(sim: &Simulator, options: &VerifyOptions) -> [CheckResult; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x9e37_79b9);
    let mut shift = CheckResult::new("gradient-parameter-shift", 1e-10);
    let mut fd = CheckResult::new("gradient-finite-difference", 1e-5);
    let h = 1e-5;
    for case_id in 0..options.gradient_cases {
        let RandomCase {
            circuit,
            params,
            inputs,
        } = random_circuit(&mut rng, options.max_qubits, options.max_gates);
        shift.cases += 1;
        fd.cases += 1;
        let jac = match sim.gradients(&circuit, &params, &inputs) {
            Ok(j) => j,
            Err(e) => {
                shift.fail(format!("case {case_id}: {e}"));
                fd.fail(format!("case {case_id}: {e}"));
                continue;
            }
        };
        let column = |rows: &[Vec<f64>], i: usize| -> Vec<f64> { rows.iter().map(|r| r[i]).collect() };
        let run = |p: &[f64], x: &[f64]| sim.run(&circuit, p, x).map(|r| r.outputs);
        for i in 0..circuit.num_params() {
            let adjoint = column(&jac.d_params, i);
            match sim.parameter_shift(&circuit, &params, &inputs, i) {
                Ok(ps) => {
                    let err = max_abs_diff(&adjoint, &ps);
                    shift.record(err, || format!("case {case_id}, param {i}, error {err:.3e}"));
                }
                Err(e) => shift.fail(format!("case {case_id}, param {i}: {e}")),
            }
            let mut p = params.clone();
            p[i] += h;
            let plus = run(&p, &inputs);
            p[i] -= 2.0 * h;
            let minus = run(&p, &inputs);
            if let (Ok(plus), Ok(minus)) = (plus, minus) {
                let numeric: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let err = max_abs_diff(&adjoint, &numeric);
                fd.record(err, || format!("case {case_id}, param {i}, error {err:.3e}"));
            }
        }
        for i in 0..circuit.num_inputs() {
            let adjoint = column(&jac.d_inputs, i);
            let mut x = inputs.clone();
            x[i] += h;
            let plus = run(&params, &x);
            x[i] -= 2.0 * h;
            let minus = run(&params, &x);
            if let (Ok(plus), Ok(minus)) = (plus, minus) {
                let numeric: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let err = max_abs_diff(&adjoint, &numeric);
                fd.record(err, || format!("case {case_id}, input {i}, error {err:.3e}"));
            }
        }
    }
    [shift, fd]
}

/// Uncut model against the same model routed through a cut graph with `m >= n`:
/// forward logits to 1e-10 and the full loss gradient to 1e-8.
pub fn check_zero_cut_identity(sim: &Simulator, options: &VerifyOptions) -> [CheckResult; 2] {
    let mut forward = CheckResult::new("zero-cut-forward", 1e-10);
    let mut gradient = CheckResult::new("zero-cut-gradient", 1e-8);
    let features = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x5eed);
    for &n in &options.zero_cut_qubits {
        for m in [n, n + 2] {
            let outcome = (|| -> Result<(), ModelError> {
                let uncut = HybridModel::new(Architecture::new(features, n, None), options.seed, *sim)?;
                let mut cut = HybridModel::zeroed(Architecture::new(features, n, Some(m)), *sim)?;
                cut.set_params(uncut.params().to_vec())?;
                let xs: Vec<Vec<f64>> = (0..5)
                    .map(|_| (0..features).map(|_| rng.gen_range(0.0..1.0)).collect())
                    .collect();
                let labels: Vec<u8> = (0..5).map(|_| rng.gen_range(0..10)).collect();
                for x in &xs {
                    let (a, _) = uncut.forward_sample(x)?;
                    let (b, _) = cut.forward_sample(x)?;
                    let err = max_abs_diff(&a, &b);
                    forward.record(err, || format!("{n}-{m}, error {err:.3e}"));
                }
                forward.cases += 1;
                let batch: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
                let a = uncut.loss_and_grad(&batch, &labels)?;
                let b = cut.loss_and_grad(&batch, &labels)?;
                let err = max_abs_diff(&a.grad, &b.grad).max((a.loss - b.loss).abs());
                gradient.record(err, || format!("{n}-{m}, error {err:.3e}"));
                gradient.cases += 1;
                Ok(())
            })();
            if let Err(e) = outcome {
                forward.fail(format!("{n}-{m}: {e}"));
                gradient.fail(format!("{n}-{m}: {e}"));
            }
        }
    }
    [forward, gradient]
}

pub fn run_all(sim: &Simulator, options: &VerifyOptions) -> VerifyReport {
    let mut checks = vec![check_oracle_equivalence(
        |c, p, x| sim.run(c, p, x).map(|r| r.outputs),
        options,
    )];
    checks.extend(check_gradients(sim, options));
    checks.extend(check_zero_cut_identity(sim, options));
    VerifyReport { checks }
}
