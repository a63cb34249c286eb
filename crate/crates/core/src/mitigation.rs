//! Readout correction via a calibrated confusion matrix, and linear
//! zero-noise extrapolation over CNOT fold counts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Gate};
use crate::pauli::{qubit_mask, PauliString};
use crate::simulator::{measure_term, parity_sign, NoiseModel, ShotResult};
use crate::{seed, Error, Result};

/// Column-stochastic readout matrix: `matrix[(i, j)]` is the probability of
/// reading basis index `i` after preparing basis index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    num_qubits: usize,
    matrix: DMatrix<f64>,
    shots_per_column: u64,
}

impl ConfusionMatrix {
    pub fn identity(num_qubits: usize) -> Self {
        let d = 1 << num_qubits;
        Self { num_qubits, matrix: DMatrix::identity(d, d), shots_per_column: 0 }
    }

    /// Wraps an explicit matrix after checking that its columns are
    /// probability vectors (1e-9).
    pub fn from_matrix(matrix: DMatrix<f64>, shots_per_column: u64) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || !d.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.ncols() });
        }
        for j in 0..d {
            let col = matrix.column(j);
            if col.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (col.sum() - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("calibration column {j} is not a probability vector")));
            }
        }
        Ok(Self { num_qubits: d.trailing_zeros() as usize, matrix, shots_per_column })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn shots_per_column(&self) -> u64 {
        self.shots_per_column
    }
}

/// Circuit of X gates preparing basis index `index`.
fn preparation_circuit(num_qubits: usize, index: usize) -> Circuit {
    let gates =
        (0..num_qubits).filter(|&q| index & qubit_mask(num_qubits, q) != 0).map(|target| Gate::X { target }).collect();
    Circuit::new(num_qubits, gates).expect("valid preparation circuit")
}

/// Runs the `2^n` basis-state preparation circuits under the readout part of
/// `noise` and assembles the empirical confusion matrix.
pub fn calibrate(num_qubits: usize, noise: &NoiseModel, shots: u64, seed: u64) -> Result<ConfusionMatrix> {
    if num_qubits == 0 {
        return Err(Error::InvalidCircuit("calibration needs at least one qubit".into()));
    }
    let d = 1 << num_qubits;
    let readout = noise.readout_only();
    let z = PauliString::identity(num_qubits);
    let mut matrix = DMatrix::zeros(d, d);
    for j in 0..d {
        let r =
            measure_term(&preparation_circuit(num_qubits, j), &[], &z, shots, &readout, seed::derive(seed, j as u64))?;
        for (i, f) in r.frequencies().into_iter().enumerate() {
            matrix[(i, j)] = f;
        }
    }
    Ok(ConfusionMatrix { num_qubits, matrix, shots_per_column: shots })
}

/// Readout-corrected quasi-probabilities. Entries may be slightly negative;
/// they are kept so that expectation values stay unbiased.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    num_qubits: usize,
    probabilities: Vec<f64>,
    frequencies: Vec<f64>,
    inverse: DMatrix<f64>,
    shots: u64,
}

impl QuasiDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Mean of `term` and its multinomial standard error.
    ///
    /// The mitigated mean is linear in the raw frequencies, `w . f` with
    /// `w = C^-T s`, so its variance is `(sum_b w_b^2 f_b - mean^2) / shots`.
    /// Calibration shot noise is not included.
    pub fn expectation(&self, term: &PauliString) -> (f64, f64) {
        if term.is_identity() {
            return (1.0, 0.0);
        }
        let mask = term.support_mask();
        let signs = DVector::from_iterator(
            self.probabilities.len(),
            (0..self.probabilities.len()).map(|b| parity_sign(b, mask)),
        );
        let mean: f64 = self.probabilities.iter().zip(signs.iter()).map(|(p, s)| p * s).sum();
        let weights = self.inverse.transpose() * signs;
        let second: f64 = weights.iter().zip(&self.frequencies).map(|(w, f)| w * w * f).sum();
        (mean, ((second - mean * mean).max(0.0) / self.shots as f64).sqrt())
    }
}

/// Solves `cal * x = frequencies` for the quasi-distribution `x`.
pub fn mitigate_counts(result: &ShotResult, cal: &ConfusionMatrix) -> Result<QuasiDistribution> {
    if result.num_qubits() != cal.num_qubits {
        return Err(Error::QubitMismatch { expected: cal.num_qubits, got: result.num_qubits() });
    }
    let frequencies = result.frequencies();
    let lu = cal.matrix.clone().lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::Unmitigable);
    }
    let x = lu.solve(&DVector::from_vec(frequencies.clone())).ok_or(Error::Unmitigable)?;
    let inverse = lu.try_inverse().ok_or(Error::Unmitigable)?;
    Ok(QuasiDistribution {
        num_qubits: cal.num_qubits,
        probabilities: x.iter().copied().collect(),
        frequencies,
        inverse,
        shots: result.shots(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldEstimate {
    pub fold: u32,
    pub estimate: f64,
    pub stderr: f64,
}

impl FoldEstimate {
    pub fn new(fold: u32, estimate: f64, stderr: f64) -> Self {
        Self { fold, estimate, stderr }
    }
}

/// Linear fit of estimate against fold count, evaluated at zero folds.
///
/// Points are weighted by `1 / stderr^2` when every stderr is positive and
/// equally otherwise. The intercept is a fixed linear combination
/// `sum_i c_i y_i` of the estimates, so its standard error is
/// `sqrt(sum_i c_i^2 s_i^2)`. For folds `(1, 3)` this is
/// `(3 y1 - y3) / 2` with `sqrt(9 s1^2 + s3^2) / 2`.
pub fn cnot_extrapolate(values: &[FoldEstimate]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Extrapolation(format!("got {} point(s)", values.len())));
    }
    let mut folds: Vec<u32> = values.iter().map(|v| v.fold).collect();
    folds.sort_unstable();
    if folds.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Extrapolation(format!("duplicate folds in {folds:?}")));
    }
    let weighted = values.iter().all(|v| v.stderr > 0.0);
    let w: Vec<f64> = values.iter().map(|v| if weighted { 1.0 / (v.stderr * v.stderr) } else { 1.0 }).collect();
    let x: Vec<f64> = values.iter().map(|v| v.fold as f64).collect();
    let sw: f64 = w.iter().sum();
    let swx: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
    let swxx: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
    let det = sw * swxx - swx * swx;
    // intercept = sum_i w_i (swxx - swx x_i) / det * y_i
    let coeffs: Vec<f64> = w.iter().zip(&x).map(|(w, x)| w * (swxx - swx * x) / det).collect();
    let value = coeffs.iter().zip(values).map(|(c, v)| c * v.estimate).sum();
    let var: f64 = coeffs.iter().zip(values).map(|(c, v)| c * c * v.stderr * v.stderr).sum();
    Ok((value, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_calibration_is_identity() {
        for n in [1, 2] {
            let cal = calibrate(n, &NoiseModel::noiseless(), 500, 1).unwrap();
            assert_eq!(cal.matrix(), &DMatrix::identity(1 << n, 1 << n));
            assert_eq!(cal.shots_per_column(), 500);
        }
    }

    #[test]
    fn one_qubit_calibration_converges() {
        let cal = calibrate(1, &NoiseModel::readout(0.02), 2_000_000, 4).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.98, 0.02, 0.02, 0.98]);
        // 5 sigma of a 2% binomial at 2e6 shots is ~5e-4
        assert_abs_diff_eq!(cal.matrix().clone(), expect, epsilon = 5e-4);
    }

    #[test]
    fn two_qubit_calibration_is_tensor_product() {
        let cal = calibrate(2, &NoiseModel::readout(0.02), 1_000_000, 9).unwrap();
        let one = DMatrix::from_row_slice(2, 2, &[0.98, 0.02, 0.02, 0.98]);
        let expect = one.kronecker(&one);
        assert_abs_diff_eq!(cal.matrix().clone(), expect, epsilon = 1e-3);
        for j in 0..4 {
            assert_abs_diff_eq!(cal.matrix().column(j).sum(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_calibration_is_a_no_op() {
        let r = ShotResult::from_counts(2, vec![10, 20, 30, 40]).unwrap();
        let q = mitigate_counts(&r, &ConfusionMatrix::identity(2)).unwrap();
        for (a, b) in q.probabilities().iter().zip(r.frequencies()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let t = PauliString::parse("Z0", 2).unwrap();
        let raw = crate::simulator::expectation_from_counts(&r, &t);
        let m = q.expectation(&t);
        assert_abs_diff_eq!(m.0, raw.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.1, raw.1, epsilon = 1e-15);
    }

    #[test]
    fn exact_linear_solve() {
        let cal = ConfusionMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.98, 0.02, 0.02, 0.98]), 0).unwrap();
        let r = ShotResult::from_counts(1, vec![9600, 400]).unwrap();
        let q = mitigate_counts(&r, &cal).unwrap();
        // (0.96, 0.04) = C (x0, x1): x0 = (0.96 - 0.02) / 0.96
        assert_abs_diff_eq!(q.probabilities()[0], 0.94 / 0.96, epsilon = 1e-12);
        assert_abs_diff_eq!(q.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quasi_probabilities_can_be_negative() {
        let cal = ConfusionMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.1, 0.9]), 0).unwrap();
        let r = ShotResult::from_counts(1, vec![1000, 0]).unwrap();
        let q = mitigate_counts(&r, &cal).unwrap();
        assert!(q.probabilities()[1] < 0.0);
        assert_abs_diff_eq!(q.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_calibration() {
        let cal = ConfusionMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]), 0).unwrap();
        let r = ShotResult::from_counts(1, vec![1, 1]).unwrap();
        assert!(matches!(mitigate_counts(&r, &cal), Err(Error::Unmitigable)));
    }

    #[test]
    fn bad_calibration_matrix() {
        assert!(ConfusionMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.9]), 0).is_err());
    }

    #[test]
    fn two_point_extrapolation() {
        let (v, s) = cnot_extrapolate(&[FoldEstimate::new(1, 1.0, 0.0), FoldEstimate::new(3, 0.8, 0.0)]).unwrap();
        assert_abs_diff_eq!(v, 1.1, epsilon = 1e-14);
        assert_eq!(s, 0.0);
        let (v, s) = cnot_extrapolate(&[FoldEstimate::new(1, 0.7, 0.01), FoldEstimate::new(3, 0.7, 0.01)]).unwrap();
        assert_abs_diff_eq!(v, 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(s, 10f64.sqrt() / 2.0 * 0.01, epsilon = 1e-15);
        let (_, s) = cnot_extrapolate(&[FoldEstimate::new(1, 0.5, 0.02), FoldEstimate::new(3, 0.3, 0.05)]).unwrap();
        assert_abs_diff_eq!(s, (9.0 * 0.02f64.powi(2) + 0.05f64.powi(2)).sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_linear_data() {
        let pts: Vec<_> = [1u32, 3, 5, 7]
            .iter()
            .zip([0.011, 0.02, 0.013, 0.03])
            .map(|(&f, s)| FoldEstimate::new(f, 0.625 - 0.0375 * f as f64, s))
            .collect();
        let (v, _) = cnot_extrapolate(&pts).unwrap();
        assert_abs_diff_eq!(v, 0.625, epsilon = 1e-14);
    }

    #[test]
    fn extrapolation_errors() {
        assert!(cnot_extrapolate(&[FoldEstimate::new(1, 1.0, 0.1)]).is_err());
        assert!(cnot_extrapolate(&[FoldEstimate::new(3, 1.0, 0.1), FoldEstimate::new(3, 0.9, 0.1)]).is_err());
    }
}
