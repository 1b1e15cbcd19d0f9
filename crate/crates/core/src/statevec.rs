//! Dense statevector simulator restricted to the gates used by the
//! feature map and ansatz.
//!
//! Qubit ordering is little-endian: qubit 0 is the least significant bit of
//! the basis index, so `|01⟩` written with qubit 0 set is basis index 1.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::tolerance;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    /// Phase gate `diag(1, e^{iλ})`.
    P(usize, f64),
    Cx {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::P(q, _) => q,
            Gate::Cx { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cx { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry(_, a) | Gate::Rz(_, a) | Gate::P(_, a) => Some(a),
            _ => None,
        }
    }

    /// 2×2 matrix of a single-qubit gate, row-major `[[m00, m01], [m10, m11]]`.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Gate::H(_) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::Ry(_, theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                Some([
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ])
            }
            Gate::Rz(_, theta) => Some([
                [Complex64::from_polar(1.0, -theta / 2.0), zero],
                [zero, Complex64::from_polar(1.0, theta / 2.0)],
            ]),
            Gate::P(_, lambda) => Some([[one, zero], [zero, Complex64::from_polar(1.0, lambda)]]),
            Gate::Cx { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {n_qubits}"),
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::contract(format!(
                "amplitude vector length {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::config(
                "n_qubits",
                format!("{n_qubits} exceeds {MAX_QUBITS}"),
            ));
        }
        let state = StateVector {
            n_qubits,
            amplitudes,
        };
        if (state.norm_sqr() - 1.0).abs() > tolerance::NORM {
            return Err(Error::contract("amplitudes are not normalized"));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, gate: &Gate) -> Result<()> {
        let n = self.n_qubits;
        let target = gate.target();
        if target >= n {
            return Err(Error::contract(format!(
                "gate target {target} out of range for {n} qubits"
            )));
        }
        if let Some(control) = gate.control() {
            if control >= n {
                return Err(Error::contract(format!(
                    "gate control {control} out of range for {n} qubits"
                )));
            }
            if control == target {
                return Err(Error::contract("control and target coincide"));
            }
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.check(gate)?;
        match *gate {
            Gate::Cx { control, target } => {
                let (cmask, tmask) = (1usize << control, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    // visit each swapped pair once, from the side with target bit clear
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
            }
            Gate::P(q, lambda) => {
                let phase = Complex64::from_polar(1.0, lambda);
                let mask = 1usize << q;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a *= phase;
                    }
                }
            }
            _ => {
                let m = gate
                    .single_qubit_matrix()
                    .expect("non-CX gates have a 2x2 matrix");
                let mask = 1usize << gate.target();
                for i in 0..self.amplitudes.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                        self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                        self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Returns a new state with `gate` applied, leaving `self` untouched.
    pub fn with_gate(&self, gate: &Gate) -> Result<Self> {
        let mut out = self.clone();
        out.apply(gate)?;
        Ok(out)
    }
}
