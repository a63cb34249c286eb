//! Exact diagonalization, fidelities and report tables.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::circuits::{run, Circuit};
use crate::optimizer::SpectrumReport;
use crate::{Error, Result};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
///
/// Column `i` of `eigenvectors` belongs to `eigenvalues[i]`; each column's
/// first non-negligible component is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
/// below `1e-14 * max(1, ||A||_F)`.
pub fn eigensolve(matrix: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
    }
    let asym = (matrix - matrix.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = 1e-14 * matrix.norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J with J the (p, q) Givens rotation
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut vec = v.column(i).clone_owned();
        if let Some(first) = vec.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                vec.neg_mut();
            }
        }
        eigenvectors.set_column(col, &vec);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// `|<phi|psi>|^2`. Both inputs must be normalized to 1e-9.
pub fn fidelity(psi: &[Complex64], phi: &[f64]) -> Result<f64> {
    if psi.len() != phi.len() {
        return Err(Error::DimensionMismatch { expected: phi.len(), got: psi.len() });
    }
    let n_psi: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let n_phi: f64 = phi.iter().map(|x| x * x).sum();
    for n in [n_psi, n_phi] {
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
    }
    let ip: Complex64 = psi.iter().zip(phi).map(|(a, &b)| a * b).sum();
    Ok(ip.norm_sqr())
}

/// [`fidelity`] for two real vectors.
pub fn fidelity_real(psi: &[f64], phi: &[f64]) -> Result<f64> {
    let psi: Vec<Complex64> = psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fidelity(&psi, phi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapRow {
    pub label: String,
    pub energy: f64,
    pub fidelities: Vec<f64>,
}

/// Fidelities of discovered states (rows) against oracle eigenvectors
/// (columns, headed by their eigenvalues).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapTable {
    pub eigenvalues: Vec<f64>,
    pub rows: Vec<OverlapRow>,
}

impl OverlapTable {
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().enumerate().filter_map(|(i, r)| r.fidelities.get(i).copied()).collect()
    }
}

/// Overlap of each reported cluster's representative state with every
/// oracle eigenvector.
pub fn overlap_table(
    report: &SpectrumReport,
    circuit: &Circuit,
    decomposition: &EigenDecomposition,
) -> Result<OverlapTable> {
    let rows = report
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let state = run(circuit, &c.representative_parameters)?;
            let fidelities = (0..decomposition.dim())
                .map(|k| fidelity(state.amplitudes(), &decomposition.eigenvector(k)))
                .collect::<Result<Vec<_>>>()?;
            Ok(OverlapRow { label: ordinal_label(i), energy: c.energy, fidelities })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapTable { eigenvalues: decomposition.eigenvalues.clone(), rows })
}

/// `Ground`, `1st`, `2nd`, `3rd`, `4th`, ...
pub fn ordinal_label(i: usize) -> String {
    if i == 0 {
        return "Ground".to_string();
    }
    let suffix = match (i % 10, i % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{i}{suffix}")
}

/// One line of a spectrum table: which eigenstate, its exact value, and
/// what the variational runs measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub eigenstate: String,
    pub block: String,
    pub exact: f64,
    pub measured: Option<f64>,
    pub stderr: Option<f64>,
    pub variance: Option<f64>,
}

/// Pairs every oracle eigenvalue of a block with the closest reported
/// cluster inside the cluster radius. Ordinals count through `full_spectrum`
/// (both blocks of the multiplet), so a block-B row can read `1st`.
pub fn spectrum_rows(report: &SpectrumReport, block: &str, full_spectrum: &[f64]) -> Vec<SpectrumRow> {
    report
        .oracle_eigenvalues
        .iter()
        .map(|&exact| {
            let ordinal = full_spectrum
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - exact).abs().total_cmp(&(b.1 - exact).abs()))
                .map_or(0, |(i, _)| i);
            let hit = report.cluster_for(exact);
            SpectrumRow {
                eigenstate: ordinal_label(ordinal),
                block: block.to_string(),
                exact,
                measured: hit.map(|c| c.energy),
                stderr: hit.map(|c| c.stderr),
                variance: hit.map(|c| c.variance),
            }
        })
        .collect()
}

/// Values measured on superconducting hardware at 20,000 shots per circuit,
/// carried in reports as annotations next to the simulated results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardwareReference {
    pub device: &'static str,
    pub shots: u64,
    /// `(eigenstate, exact, variance, measured, uncertainty)`.
    pub rows: Vec<(&'static str, f64, f64, f64, f64)>,
    /// Overlap rows against the exact eigenvectors, when available.
    pub overlaps: Option<Vec<[f64; 4]>>,
}

pub fn hardware_reference(n_particles: u32) -> Option<HardwareReference> {
    match n_particles {
        3 => Some(HardwareReference {
            device: "ibmq_manila",
            shots: 20_000,
            rows: vec![
                ("Ground", -1.823, 0.073, -1.788, 0.062),
                ("2nd", 0.823, 0.001, 0.826, 0.064),
                ("1st", -0.823, -0.004, -0.816, 0.063),
                ("3rd", 1.823, 0.001, 1.810, 0.063),
            ],
            overlaps: None,
        }),
        7 => Some(HardwareReference {
            device: "ibm_nairobi",
            shots: 20_000,
            rows: vec![
                ("Ground", -6.208, 0.139, -6.067, 0.901),
                ("1st", -2.944, 0.016, -3.151, 0.503),
                ("2nd", 1.208, 0.010, 1.184, 0.484),
                ("3rd", 5.944, 0.114, 5.902, 0.660),
            ],
            // "<0.001" entries are recorded as 0.001
            overlaps: Some(vec![
                [0.924, 0.073, 0.002, 0.001],
                [0.020, 0.947, 0.033, 0.001],
                [0.001, 0.009, 0.991, 0.001],
                [0.001, 0.001, 0.026, 0.972],
            ]),
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasispin::{build_blocks, ModelParams};
    use approx::assert_abs_diff_eq;

    fn check_decomposition(m: &DMatrix<f64>, d: &EigenDecomposition) {
        let v = &d.eigenvectors;
        assert!((v.transpose() * v - DMatrix::identity(d.dim(), d.dim())).amax() < 1e-10);
        for (i, &l) in d.eigenvalues.iter().enumerate() {
            let col = v.column(i);
            assert!((m * col - col * l).norm() < 1e-10);
        }
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn n3_closed_form() {
        let (a, _) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        let d = eigensolve(&a.matrix).unwrap();
        let r7 = 7f64.sqrt();
        assert_abs_diff_eq!(d.eigenvalues[0], (-1.0 - r7) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.eigenvalues[1], (-1.0 + r7) / 2.0, epsilon = 1e-12);
        check_decomposition(&a.matrix, &d);
    }

    #[test]
    fn n7_exact_values() {
        let (a, _) = build_blocks(&ModelParams::standard(7).unwrap()).unwrap();
        let d = eigensolve(&a.matrix).unwrap();
        for (got, want) in d.eigenvalues.iter().zip([-6.208, -2.944, 1.208, 5.944]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
        check_decomposition(&a.matrix, &d);
        for i in 0..4 {
            let first = d.eigenvectors.column(i).iter().copied().find(|x| x.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let d = eigensolve(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0; 3]);
        check_decomposition(&DMatrix::identity(3, 3), &d);
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(eigensolve(&m).unwrap().eigenvalues, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(eigensolve(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn fidelity_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(fidelity_real(&[s, s], &[s, s]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity_real(&[s, -s], &[s, s]).unwrap(), 0.0, epsilon = 1e-15);
        let psi = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)];
        assert_abs_diff_eq!(fidelity(&psi, &[1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert!(fidelity_real(&[1.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(fidelity_real(&[1.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn ordinals() {
        let labels: Vec<_> = (0..5).map(ordinal_label).collect();
        assert_eq!(labels, ["Ground", "1st", "2nd", "3rd", "4th"]);
        assert_eq!(ordinal_label(11), "11th");
        assert_eq!(ordinal_label(21), "21st");
    }

    #[test]
    fn hardware_tables_present() {
        assert_eq!(hardware_reference(3).unwrap().rows.len(), 4);
        assert!(hardware_reference(7).unwrap().overlaps.is_some());
        assert!(hardware_reference(5).is_none());
    }
}
