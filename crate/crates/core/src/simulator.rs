//! Shot-based measurement of Pauli strings with readout and CNOT noise.
//!
//! Every term is measured on its own circuit: the ansatz, then the
//! single-qubit rotations that map the term's eigenbasis onto the
//! computational basis, then a computational-basis readout.
//!
//! CNOT noise: after every CNOT, with probability `cnot_depolarizing`, a
//! uniformly random non-identity two-qubit Pauli hits the CNOT's operands.
//! Readout flips every bit independently (`0 -> 1` with `p01`, `1 -> 0`
//! with `p10`). Shots are i.i.d. draws from the resulting outcome
//! distribution, which [`outcome_distribution`] computes exactly by evolving
//! the density matrix; [`measure_term`] then draws one multinomial sample.
//! [`measure_term_trajectories`] samples the same channel shot by shot and
//! serves as an independent check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuits::{basis_change, Circuit, Gate, Statevector};
use crate::pauli::{qubit_mask, Pauli, PauliString};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// P(read 1 | true 0), per qubit.
    #[serde(default)]
    pub readout_p01: f64,
    /// P(read 0 | true 1), per qubit.
    #[serde(default)]
    pub readout_p10: f64,
    /// Probability of a random non-identity two-qubit Pauli after each CNOT.
    #[serde(default)]
    pub cnot_depolarizing: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// 2% symmetric readout flips and 1% CNOT depolarizing.
    pub fn synthetic_default() -> Self {
        Self { readout_p01: 0.02, readout_p10: 0.02, cnot_depolarizing: 0.01 }
    }

    pub fn readout(p: f64) -> Self {
        Self { readout_p01: p, readout_p10: p, cnot_depolarizing: 0.0 }
    }

    pub fn cnot(p: f64) -> Self {
        Self { cnot_depolarizing: p, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("readout_p01", self.readout_p01), ("readout_p10", self.readout_p10)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} outside [0, 1)")));
            }
        }
        if !(0.0..0.5).contains(&self.cnot_depolarizing) {
            return Err(Error::InvalidNoise(format!(
                "cnot_depolarizing = {} outside [0, 0.5)",
                self.cnot_depolarizing
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.readout_p01 == 0.0 && self.readout_p10 == 0.0 && self.cnot_depolarizing == 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_p01 > 0.0 || self.readout_p10 > 0.0
    }

    /// The same model with gate noise removed.
    pub fn readout_only(&self) -> Self {
        Self { cnot_depolarizing: 0.0, ..*self }
    }
}

/// Histogram of measured basis states.
///
/// `counts[b]` is the number of shots that read basis index `b`. Bitstrings
/// are written with qubit 0 leftmost, i.e. as the binary form of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    num_qubits: usize,
    counts: Vec<u64>,
    shots: u64,
}

impl ShotResult {
    pub fn from_counts(num_qubits: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << num_qubits, got: counts.len() });
        }
        let shots = counts.iter().sum();
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(Self { num_qubits, counts, shots })
    }

    /// Builds a result from `{"01": 12, ...}`-style bitstring counts.
    pub fn from_bitstrings(num_qubits: usize, counts: &[(&str, u64)]) -> Result<Self> {
        let mut dense = vec![0; 1 << num_qubits];
        for &(bits, n) in counts {
            if bits.len() != num_qubits {
                return Err(Error::Parse { what: "bitstring", detail: bits.to_string() });
            }
            let b = usize::from_str_radix(bits, 2)
                .map_err(|_| Error::Parse { what: "bitstring", detail: bits.to_string() })?;
            dense[b] += n;
        }
        Self::from_counts(num_qubits, dense)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    pub fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.num_qubits)
    }

    /// Nonzero counts keyed by bitstring.
    pub fn counts_map(&self) -> BTreeMap<String, u64> {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(b, &c)| (self.bitstring(b), c)).collect()
    }
}

/// `(-1)^popcount(index & mask)`.
pub fn parity_sign(index: usize, mask: usize) -> f64 {
    if (index & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Applies the independent per-qubit readout channel to a distribution.
pub fn apply_readout_channel(probabilities: &mut [f64], num_qubits: usize, noise: &NoiseModel) {
    let (p01, p10) = (noise.readout_p01, noise.readout_p10);
    for q in 0..num_qubits {
        let mask = qubit_mask(num_qubits, q);
        for i in 0..probabilities.len() {
            if i & mask == 0 {
                let (a0, a1) = (probabilities[i], probabilities[i | mask]);
                probabilities[i] = (1.0 - p01) * a0 + p10 * a1;
                probabilities[i | mask] = p01 * a0 + (1.0 - p10) * a1;
            }
        }
    }
}

fn rotate_to_measurement_basis(state: &mut Statevector, term: &PauliString) {
    for (q, &p) in term.labels().iter().enumerate() {
        if let Some(u) = basis_change(p) {
            state.apply_1q(q, &u);
        }
    }
}

fn sample_multinomial(rng: &mut ChaCha8Rng, probabilities: &[f64], shots: u64) -> Vec<u64> {
    let mut counts = vec![0; probabilities.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probabilities.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

fn sample_index(rng: &mut ChaCha8Rng, probabilities: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

fn random_two_qubit_error(rng: &mut ChaCha8Rng, num_qubits: usize, a: usize, b: usize) -> PauliString {
    // 1..16 in base 4 over (a, b), excluding II
    let k = rng.random_range(1..16usize);
    PauliString::from_factors(num_qubits, &[(a, Pauli::ALL[k / 4]), (b, Pauli::ALL[k % 4])])
        .expect("operands inside register")
}

fn flip_readout(rng: &mut ChaCha8Rng, index: usize, num_qubits: usize, noise: &NoiseModel) -> usize {
    let mut out = index;
    for q in 0..num_qubits {
        let mask = qubit_mask(num_qubits, q);
        let p = if index & mask == 0 { noise.readout_p01 } else { noise.readout_p10 };
        if p > 0.0 && rng.random::<f64>() < p {
            out ^= mask;
        }
    }
    out
}

fn check_inputs(
    circuit: &Circuit,
    parameters: &[f64],
    term: &PauliString,
    shots: u64,
    noise: &NoiseModel,
) -> Result<()> {
    let n = circuit.num_qubits();
    if term.num_qubits() != n {
        return Err(Error::QubitMismatch { expected: n, got: term.num_qubits() });
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    circuit.check_parameters(parameters)?;
    noise.validate()
}

/// Matrix of the map `f` on the `num_qubits` register, column by column.
fn unitary_of(num_qubits: usize, f: impl Fn(&mut Statevector)) -> DMatrix<Complex64> {
    let dim = 1 << num_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[c] = Complex64::new(1.0, 0.0);
        let mut state = Statevector::from_amplitudes(amplitudes).expect("basis state");
        f(&mut state);
        for (r, a) in state.amplitudes().iter().enumerate() {
            u[(r, c)] = *a;
        }
    }
    u
}

fn conjugate(rho: &DMatrix<Complex64>, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    u * rho * u.adjoint()
}

/// Exact distribution of the noisy readout of the measurement circuit for
/// `term`, indexed like the statevector.
pub fn outcome_distribution(
    circuit: &Circuit,
    parameters: &[f64],
    term: &PauliString,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    check_inputs(circuit, parameters, term, 1, noise)?;
    let n = circuit.num_qubits();
    let mut probabilities = if noise.cnot_depolarizing == 0.0 || circuit.cnot_count() == 0 {
        let mut state = crate::circuits::run(circuit, parameters)?;
        rotate_to_measurement_basis(&mut state, term);
        state.probabilities()
    } else {
        let dim = 1 << n;
        let p = noise.cnot_depolarizing;
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        for g in circuit.gates() {
            rho = conjugate(&rho, &unitary_of(n, |s| s.apply_gate(g, parameters)));
            if let Gate::Cnot { control, target } = *g {
                let mut mixed = &rho * Complex64::new(1.0 - p, 0.0);
                for k in 1..16 {
                    let error =
                        PauliString::from_factors(n, &[(control, Pauli::ALL[k / 4]), (target, Pauli::ALL[k % 4])])?;
                    mixed += conjugate(&rho, &error.matrix()) * Complex64::new(p / 15.0, 0.0);
                }
                rho = mixed;
            }
        }
        rho = conjugate(&rho, &unitary_of(n, |s| rotate_to_measurement_basis(s, term)));
        (0..dim).map(|i| rho[(i, i)].re.max(0.0)).collect()
    };
    apply_readout_channel(&mut probabilities, n, noise);
    Ok(probabilities)
}

/// Samples `shots` readouts of the measurement circuit for `term`.
///
/// Deterministic for fixed inputs and `seed`.
pub fn measure_term(
    circuit: &Circuit,
    parameters: &[f64],
    term: &PauliString,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<ShotResult> {
    check_inputs(circuit, parameters, term, shots, noise)?;
    let probabilities = outcome_distribution(circuit, parameters, term, noise)?;
    let mut rng = seed::rng(seed);
    ShotResult::from_counts(circuit.num_qubits(), sample_multinomial(&mut rng, &probabilities, shots))
}

/// Same channel as [`measure_term`], simulated one shot at a time: each
/// shot draws its own Pauli errors and readout flips.
pub fn measure_term_trajectories(
    circuit: &Circuit,
    parameters: &[f64],
    term: &PauliString,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<ShotResult> {
    check_inputs(circuit, parameters, term, shots, noise)?;
    let n = circuit.num_qubits();
    let mut rng = seed::rng(seed);
    let mut counts = vec![0u64; 1 << n];
    for _ in 0..shots {
        let mut state = Statevector::zero(n);
        for g in circuit.gates() {
            state.apply_gate(g, parameters);
            if let Gate::Cnot { control, target } = *g {
                if rng.random::<f64>() < noise.cnot_depolarizing {
                    state.apply_pauli(&random_two_qubit_error(&mut rng, n, control, target));
                }
            }
        }
        rotate_to_measurement_basis(&mut state, term);
        let b = sample_index(&mut rng, &state.probabilities());
        counts[flip_readout(&mut rng, b, n, noise)] += 1;
    }
    ShotResult::from_counts(n, counts)
}

/// Eigenvalue-weighted mean of `term` over the counts and its binomial
/// standard error `sqrt((1 - mean^2) / shots)`.
pub fn expectation_from_counts(result: &ShotResult, term: &PauliString) -> (f64, f64) {
    if term.is_identity() {
        return (1.0, 0.0);
    }
    let mask = term.support_mask();
    let shots = result.shots() as f64;
    let mean = result.counts().iter().enumerate().map(|(b, &c)| parity_sign(b, mask) * c as f64).sum::<f64>() / shots;
    (mean, ((1.0 - mean * mean).max(0.0) / shots).sqrt())
}
