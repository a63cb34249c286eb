//! RY/X/CNOT circuits and a dense statevector engine.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{qubit_mask, Pauli, PauliString};
use crate::{Error, Result};

/// Angle of an RY gate: fixed, or bound to an optimization parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Slot(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Ry { target: usize, angle: Angle },
    X { target: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn ry_param(target: usize, slot: usize) -> Self {
        Gate::Ry { target, angle: Angle::Slot(slot) }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    fn max_qubit(&self) -> usize {
        match *self {
            Gate::Ry { target, .. } | Gate::X { target } => target,
            Gate::Cnot { control, target } => control.max(target),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    num_parameters: usize,
}

impl Circuit {
    /// Validates qubit indices, CNOT operands and that parameter slots form
    /// `0..k` without gaps.
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        let mut slots = Vec::new();
        for g in &gates {
            if g.max_qubit() >= num_qubits {
                return Err(Error::InvalidCircuit(format!("{g:?} addresses a qubit outside 0..{num_qubits}")));
            }
            match *g {
                Gate::Cnot { control, target } if control == target => {
                    return Err(Error::InvalidCircuit(format!("CNOT with control = target = {control}")));
                }
                Gate::Ry { angle: Angle::Slot(s), .. } => slots.push(s),
                _ => {}
            }
        }
        slots.sort_unstable();
        slots.dedup();
        if slots.iter().enumerate().any(|(i, &s)| i != s) {
            return Err(Error::InvalidCircuit(format!("parameter slots {slots:?} have gaps")));
        }
        Ok(Self { num_qubits, gates, num_parameters: slots.len() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cnot()).count()
    }

    pub fn check_parameters(&self, parameters: &[f64]) -> Result<()> {
        if parameters.len() != self.num_parameters {
            return Err(Error::ParameterCount { expected: self.num_parameters, got: parameters.len() });
        }
        Ok(())
    }

    /// Resolved RY angle for `gate` under `parameters`.
    pub fn angle(angle: Angle, parameters: &[f64]) -> f64 {
        match angle {
            Angle::Fixed(a) => a,
            Angle::Slot(s) => parameters[s],
        }
    }
}

/// Single-qubit ansatz: `RY(theta)|0>`.
pub fn ansatz_1q() -> Circuit {
    Circuit::new(1, vec![Gate::ry_param(0, 0)]).expect("valid ansatz")
}

/// Two-qubit, three-parameter ansatz:
/// `RY(t0)` on q1, `CNOT(1 -> 0)`, `RY(t1)` on q0, `CNOT(1 -> 0)`, `RY(t2)` on q1.
pub fn ansatz_2q() -> Circuit {
    Circuit::new(
        2,
        vec![
            Gate::ry_param(1, 0),
            Gate::Cnot { control: 1, target: 0 },
            Gate::ry_param(0, 1),
            Gate::Cnot { control: 1, target: 0 },
            Gate::ry_param(1, 2),
        ],
    )
    .expect("valid ansatz")
}

/// Ansatz matched to a block of dimension `dim` (2 or 4).
pub fn ansatz_for_dim(dim: usize) -> Result<Circuit> {
    match dim {
        2 => Ok(ansatz_1q()),
        4 => Ok(ansatz_2q()),
        d => Err(Error::InvalidCircuit(format!("no built-in ansatz for dimension {d}"))),
    }
}

/// Replaces every CNOT by `fold` consecutive copies. Odd folds leave the
/// circuit unitarily unchanged.
pub fn fold_cnots(circuit: &Circuit, fold: u32) -> Result<Circuit> {
    if fold.is_multiple_of(2) {
        return Err(Error::InvalidFold(fold as i64));
    }
    let gates = circuit
        .gates
        .iter()
        .flat_map(|g| {
            let copies = if g.is_cnot() { fold as usize } else { 1 };
            std::iter::repeat_n(*g, copies)
        })
        .collect();
    Ok(Circuit { gates, ..circuit.clone() })
}

pub type Matrix2 = [[Complex64; 2]; 2];

fn real2(m: [[f64; 2]; 2]) -> Matrix2 {
    m.map(|row| row.map(|x| Complex64::new(x, 0.0)))
}

pub fn ry_matrix(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    real2([[c, -s], [s, c]])
}

pub fn rx_matrix(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let (c, s) = (Complex64::new(c, 0.0), Complex64::new(0.0, -s));
    [[c, s], [s, c]]
}

/// Rotation taking the +1/-1 eigenstates of `pauli` to `|0>`/`|1>`.
pub fn basis_change(pauli: Pauli) -> Option<Matrix2> {
    match pauli {
        Pauli::I | Pauli::Z => None,
        Pauli::X => Some(ry_matrix(-std::f64::consts::FRAC_PI_2)),
        Pauli::Y => Some(rx_matrix(std::f64::consts::FRAC_PI_2)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { num_qubits, amplitudes }
    }

    /// Wraps amplitudes, checking length and normalization (1e-9).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let sv = Self { num_qubits: dim.trailing_zeros() as usize, amplitudes };
        let n = sv.norm_sqr();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
        Ok(sv)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.re).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn apply_1q(&mut self, qubit: usize, u: &Matrix2) {
        let mask = qubit_mask(self.num_qubits, qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[j] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_x(&mut self, qubit: usize) {
        let mask = qubit_mask(self.num_qubits, qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                self.amplitudes.swap(i, i | mask);
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let c = qubit_mask(self.num_qubits, control);
        let t = qubit_mask(self.num_qubits, target);
        for i in 0..self.amplitudes.len() {
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    /// Applies a Pauli string as an operator (used for stochastic errors).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (col, &a) in self.amplitudes.iter().enumerate() {
            let (phase, row) = p.apply_to_basis(col);
            out[row] = phase * a;
        }
        self.amplitudes = out;
    }

    pub fn apply_gate(&mut self, gate: &Gate, parameters: &[f64]) {
        match *gate {
            Gate::Ry { target, angle } => self.apply_1q(target, &ry_matrix(Circuit::angle(angle, parameters))),
            Gate::X { target } => self.apply_x(target),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `<psi|P|psi>` for a single Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::QubitMismatch { expected: self.num_qubits, got: p.num_qubits() });
        }
        let v: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(col, &a)| {
                let (phase, row) = p.apply_to_basis(col);
                self.amplitudes[row].conj() * phase * a
            })
            .sum();
        Ok(v.re)
    }
}

/// Noiseless execution from `|0...0>`.
pub fn run(circuit: &Circuit, parameters: &[f64]) -> Result<Statevector> {
    circuit.check_parameters(parameters)?;
    let mut state = Statevector::zero(circuit.num_qubits);
    for g in &circuit.gates {
        state.apply_gate(g, parameters);
    }
    Ok(state)
}
