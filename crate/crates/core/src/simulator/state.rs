use num_complex::Complex64;

use crate::circuit::Axis;

/// Dense statevector over `qubits` wires. Wire `w` is bit `w` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    /// All-zero vector (not a physical state); used as the adjoint accumulator.
    pub fn zeros(qubits: usize) -> Self {
        Self {
            qubits,
            amps: vec![Complex64::new(0.0, 0.0); 1 << qubits],
        }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Option<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return None;
        }
        let qubits = amps.len().trailing_zeros() as usize;
        Some(Self { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `exp(-i theta/2 P)` on `wire`, with `P` the Pauli matrix of `axis`.
    pub fn apply_rotation(&mut self, axis: Axis, wire: usize, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        match axis {
            Axis::X => {
                let mis = Complex64::new(0.0, -s);
                self.for_pairs(wire, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * mis;
                    *a1 = x0 * mis + x1 * c;
                });
            }
            Axis::Y => self.for_pairs(wire, |a0, a1| {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }),
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                self.for_pairs(wire, |a0, a1| {
                    *a0 *= lo;
                    *a1 *= hi;
                });
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    pub fn expectation_z(&self, wire: usize) -> f64 {
        let bit = 1usize << wire;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `self += weight * Z_wire |other>`.
    pub fn add_scaled_z(&mut self, other: &StateVector, wire: usize, weight: f64) {
        let bit = 1usize << wire;
        for (i, (dst, src)) in self.amps.iter_mut().zip(&other.amps).enumerate() {
            if i & bit == 0 {
                *dst += src * weight;
            } else {
                *dst -= src * weight;
            }
        }
    }

    /// `<self| P_wire |other>` for the Pauli matrix of `axis`.
    pub fn pauli_element(&self, other: &StateVector, axis: Axis, wire: usize) -> Complex64 {
        let bit = 1usize << wire;
        let mut acc = Complex64::new(0.0, 0.0);
        match axis {
            Axis::X => {
                for (i, l) in self.amps.iter().enumerate() {
                    acc += l.conj() * other.amps[i ^ bit];
                }
            }
            Axis::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                for (i, l) in self.amps.iter().enumerate() {
                    let flipped = other.amps[i ^ bit];
                    let py = if i & bit == 0 {
                        Complex64::new(flipped.im, -flipped.re)
                    } else {
                        Complex64::new(-flipped.im, flipped.re)
                    };
                    acc += l.conj() * py;
                }
            }
            Axis::Z => {
                for (i, (l, r)) in self.amps.iter().zip(&other.amps).enumerate() {
                    let t = l.conj() * r;
                    if i & bit == 0 {
                        acc += t;
                    } else {
                        acc -= t;
                    }
                }
            }
        }
        acc
    }

    fn for_pairs(&mut self, wire: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1usize << wire;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let mut s = StateVector::zero(1);
        s.apply_rotation(Axis::X, 0, PI);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0)));
        assert!((s.expectation_z(0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ry_and_rz_conventions() {
        let mut s = StateVector::zero(1);
        s.apply_rotation(Axis::Y, 0, PI);
        assert!(close(s.amplitudes()[1], Complex64::new(1.0, 0.0)));
        let mut s = StateVector::zero(1);
        s.apply_rotation(Axis::Z, 0, PI);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn cnot_on_little_endian_wires() {
        let mut s = StateVector::zero(3);
        s.apply_rotation(Axis::X, 2, PI); // |100>, wire 2 set
        s.apply_cnot(2, 0);
        assert!(s.amplitudes()[0b101].norm() > 0.999);
        assert!((s.expectation_z(0) + 1.0).abs() < 1e-12);
        assert!((s.expectation_z(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_elements_match_definitions() {
        let mut a = StateVector::zero(2);
        a.apply_rotation(Axis::Y, 0, 0.7);
        a.apply_rotation(Axis::X, 1, 1.3);
        a.apply_cnot(0, 1);
        // <a|Z_1|a> equals the Z expectation.
        let z = a.pauli_element(&a, Axis::Z, 1);
        assert!((z.re - a.expectation_z(1)).abs() < 1e-12);
        // Pauli operators are Hermitian: <a|P|a> is real.
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            assert!(a.pauli_element(&a, axis, 0).im.abs() < 1e-12);
        }
        // <0|Y|1> = -i
        let zero = StateVector::zero(1);
        let mut one = StateVector::zero(1);
        one.apply_rotation(Axis::Y, 0, PI);
        assert!(close(zero.pauli_element(&one, Axis::Y, 0), Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn rotation_preserves_norm() {
        let mut s = StateVector::zero(4);
        for (i, axis) in [Axis::X, Axis::Y, Axis::Z, Axis::X].into_iter().enumerate() {
            s.apply_rotation(axis, i, 0.3 + i as f64);
            s.apply_cnot(i, (i + 1) % 4);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
