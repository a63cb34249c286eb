//! `<H>`, `<H^2>` and the variance `<H^2> - <H>^2` from per-term
//! measurements.
//!
//! `<H^2>` is measured through the Pauli decomposition of the squared
//! Hamiltonian, one circuit per non-identity term of `H` and of `H^2`.
//! Identity terms contribute their coefficient exactly. Term estimates are
//! independent shot batches, so errors combine in quadrature.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::circuits::{fold_cnots, run, Circuit, Statevector};
use crate::mitigation::{calibrate, cnot_extrapolate, mitigate_counts, ConfusionMatrix, FoldEstimate};
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::{expectation_from_counts, measure_term, NoiseModel};
use crate::{seed, Error, Result};

/// Shots per measured term, or exact (infinite-shot, noiseless) evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    #[default]
    Exact,
    Finite(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Text(String),
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = Error;

    fn try_from(r: ShotsRepr) -> Result<Self> {
        match r {
            ShotsRepr::Count(n) => Shots::Finite(n).validated(),
            ShotsRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Exact => ShotsRepr::Text("exact".into()),
            Shots::Finite(n) => ShotsRepr::Count(n),
        }
    }
}

impl Shots {
    fn validated(self) -> Result<Self> {
        match self {
            Shots::Finite(0) => Err(Error::ZeroShots),
            s => Ok(s),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Shots::Exact)
    }

    pub fn count(&self) -> Option<u64> {
        match *self {
            Shots::Exact => None,
            Shots::Finite(n) => Some(n),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        let n: u64 = s.parse().map_err(|_| Error::Parse { what: "shots", detail: s.to_string() })?;
        Shots::Finite(n).validated()
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Mitigation {
    #[serde(default)]
    pub readout: bool,
    #[serde(default)]
    pub cnot: bool,
}

impl Mitigation {
    pub const NONE: Mitigation = Mitigation { readout: false, cnot: false };

    pub fn any(&self) -> bool {
        self.readout || self.cnot
    }
}

impl FromStr for Mitigation {
    type Err = Error;

    /// Comma-separated subset of `readout`, `cnot`; `none` or empty for
    /// neither.
    fn from_str(s: &str) -> Result<Self> {
        let mut m = Mitigation::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "readout" => m.readout = true,
                "cnot" => m.cnot = true,
                "none" => {}
                other => return Err(Error::Parse { what: "mitigation", detail: other.to_string() }),
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Mitigation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.readout, self.cnot) {
            (false, false) => f.write_str("none"),
            (true, false) => f.write_str("readout"),
            (false, true) => f.write_str("cnot"),
            (true, true) => f.write_str("readout,cnot"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub shots: Shots,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub mitigation: Mitigation,
    /// CNOT fold counts used when CNOT mitigation is on.
    #[serde(default = "default_folds")]
    pub folds: Vec<u32>,
    /// Shots per calibration circuit; defaults to the measurement shots.
    #[serde(default)]
    pub calibration_shots: Option<u64>,
}

pub fn default_folds() -> Vec<u32> {
    vec![1, 3]
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self {
            shots: Shots::Exact,
            noise: NoiseModel::noiseless(),
            mitigation: Mitigation::NONE,
            folds: default_folds(),
            calibration_shots: None,
        }
    }

    pub fn sampled(shots: u64, noise: NoiseModel, mitigation: Mitigation) -> Self {
        Self { shots: Shots::Finite(shots), noise, mitigation, ..Self::exact() }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.shots.is_exact() {
            if !self.noise.is_noiseless() {
                return Err(Error::Config("exact mode is noiseless; set a finite shot count to add noise".into()));
            }
            if self.mitigation.any() {
                return Err(Error::Config("mitigation requires a finite shot count".into()));
            }
        }
        if self.calibration_shots == Some(0) {
            return Err(Error::ZeroShots);
        }
        if self.mitigation.cnot {
            if let Some(&f) = self.folds.iter().find(|&&f| f % 2 == 0) {
                return Err(Error::InvalidFold(f as i64));
            }
            let mut f = self.folds.clone();
            f.sort_unstable();
            f.dedup();
            if f.len() < 2 || f.len() != self.folds.len() {
                return Err(Error::Config(format!(
                    "CNOT mitigation needs at least two distinct folds, got {:?}",
                    self.folds
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    H,
    HSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermEstimate {
    pub observable: Observable,
    #[serde(serialize_with = "serialize_display")]
    pub term: PauliString,
    pub coefficient: f64,
    pub mean: f64,
    pub stderr: f64,
}

fn serialize_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    pub energy: f64,
    pub energy_stderr: f64,
    pub h_squared: f64,
    pub h_squared_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub per_term: Vec<TermEstimate>,
    /// `None` in exact mode.
    pub shots: Option<u64>,
    pub mitigation: Mitigation,
}

/// `sum_i beta_i <psi|P_i|psi>`.
pub fn expectation_exact(state: &Statevector, observable: &PauliSum) -> Result<f64> {
    if state.num_qubits() != observable.num_qubits() {
        return Err(Error::QubitMismatch { expected: state.num_qubits(), got: observable.num_qubits() });
    }
    observable.terms().iter().map(|(c, s)| Ok(c * state.expectation(s)?)).sum()
}

/// Checks that `h2` is the symbolic square of `h` to `tolerance`.
pub fn check_square(h: &PauliSum, h2: &PauliSum, tolerance: f64) -> Result<()> {
    let sq = h.square()?;
    let diff = PauliSum::from_terms(
        h.num_qubits(),
        sq.terms().iter().cloned().chain(h2.terms().iter().map(|(c, s)| (-c, s.clone()))),
    )?;
    match diff.terms().iter().find(|(c, _)| c.abs() > tolerance) {
        Some((c, s)) => Err(Error::Config(format!("H^2 differs from H*H by {c:e} on {s}"))),
        None => Ok(()),
    }
}

fn assemble(per_term: Vec<TermEstimate>, h: &PauliSum, h2: &PauliSum, config: &EstimatorConfig) -> EstimationResult {
    let combine = |obs: Observable, constant: f64| {
        let (mean, var) = per_term
            .iter()
            .filter(|t| t.observable == obs)
            .fold((constant, 0.0), |(m, v), t| (m + t.coefficient * t.mean, v + (t.coefficient * t.stderr).powi(2)));
        (mean, var.sqrt())
    };
    let (energy, energy_stderr) = combine(Observable::H, h.identity_coefficient());
    let (h_squared, h_squared_stderr) = combine(Observable::HSquared, h2.identity_coefficient());
    EstimationResult {
        energy,
        energy_stderr,
        h_squared,
        h_squared_stderr,
        variance: h_squared - energy * energy,
        variance_stderr: (h_squared_stderr.powi(2) + 4.0 * energy * energy * energy_stderr.powi(2)).sqrt(),
        per_term,
        shots: config.shots.count(),
        mitigation: config.mitigation,
    }
}

const CALIBRATION_STREAM: u64 = u64::MAX;

/// Estimates energy, `<H^2>` and variance of the ansatz state at
/// `parameters`.
///
/// In exact mode everything is computed from the statevector. Otherwise each
/// non-identity term of `h` and `h2` gets its own measurement batch (and one
/// batch per fold under CNOT mitigation); readout mitigation recalibrates
/// once per call. Deterministic for a fixed `seed`.
pub fn estimate(
    circuit: &Circuit,
    parameters: &[f64],
    h: &PauliSum,
    h2: &PauliSum,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<EstimationResult> {
    config.validate()?;
    let n = circuit.num_qubits();
    for sum in [h, h2] {
        if sum.num_qubits() != n {
            return Err(Error::QubitMismatch { expected: n, got: sum.num_qubits() });
        }
    }
    circuit.check_parameters(parameters)?;

    let jobs: Vec<(Observable, &f64, &PauliString)> = [(Observable::H, h), (Observable::HSquared, h2)]
        .into_iter()
        .flat_map(|(obs, sum)| sum.measured_terms().map(move |(c, s)| (obs, c, s)))
        .collect();

    let shots = match config.shots {
        Shots::Exact => {
            let state = run(circuit, parameters)?;
            let per_term = jobs
                .into_iter()
                .map(|(observable, &coefficient, term)| {
                    Ok(TermEstimate {
                        observable,
                        term: term.clone(),
                        coefficient,
                        mean: state.expectation(term)?,
                        stderr: 0.0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(assemble(per_term, h, h2, config));
        }
        Shots::Finite(s) => s,
    };

    let calibration: Option<ConfusionMatrix> = if config.mitigation.readout {
        let cal_shots = config.calibration_shots.unwrap_or(shots);
        Some(calibrate(n, &config.noise, cal_shots, seed::derive(seed, CALIBRATION_STREAM))?)
    } else {
        None
    };
    let folds: Vec<u32> = if config.mitigation.cnot { config.folds.clone() } else { vec![1] };
    let circuits = folds.iter().map(|&f| fold_cnots(circuit, f)).collect::<Result<Vec<_>>>()?;

    let per_term = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(observable, &coefficient, term))| {
            let points = folds
                .iter()
                .zip(&circuits)
                .map(|(&fold, c)| {
                    let s = seed::derive_path(seed, &[k as u64, fold as u64]);
                    let counts = measure_term(c, parameters, term, shots, &config.noise, s)?;
                    let (mean, stderr) = match &calibration {
                        Some(cal) => mitigate_counts(&counts, cal)?.expectation(term),
                        None => expectation_from_counts(&counts, term),
                    };
                    Ok(FoldEstimate::new(fold, mean, stderr))
                })
                .collect::<Result<Vec<_>>>()?;
            let (mean, stderr) = if config.mitigation.cnot {
                cnot_extrapolate(&points)?
            } else {
                (points[0].estimate, points[0].stderr)
            };
            Ok(TermEstimate { observable, term: term.clone(), coefficient, mean, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(per_term, h, h2, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ansatz_1q;
    use crate::pauli::decompose_real;
    use crate::quasispin::{build_blocks, square_block, ModelParams};
    use approx::assert_abs_diff_eq;

    fn n3a() -> (PauliSum, PauliSum, nalgebra::DMatrix<f64>) {
        let (a, _) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        (decompose_real(&a.matrix).unwrap(), decompose_real(&square_block(&a)).unwrap(), a.matrix)
    }

    #[test]
    fn exact_energies_on_basis_states() {
        let (h, _, _) = n3a();
        let zero = run(&ansatz_1q(), &[0.0]).unwrap();
        let one = run(&ansatz_1q(), &[std::f64::consts::PI]).unwrap();
        assert_abs_diff_eq!(expectation_exact(&zero, &h).unwrap(), -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(expectation_exact(&one, &h).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn h_squared_at_zero_state() {
        // Brute force: <0|H^2|0> = (H H)_00 = (-1.5)^2 + (-sqrt(3)/2)^2 = 3.0,
        // so the variance at |0> is 3.0 - 2.25 = 0.75.
        let (h, h2, m) = n3a();
        let dense = (&m * &m)[(0, 0)];
        assert_abs_diff_eq!(dense, 3.0, epsilon = 1e-12);
        let r = estimate(&ansatz_1q(), &[0.0], &h, &h2, &EstimatorConfig::exact(), 0).unwrap();
        assert_abs_diff_eq!(r.energy, -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.h_squared, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.variance, 0.75, epsilon = 1e-12);
        assert_eq!(r.energy_stderr, 0.0);
        assert_eq!(r.shots, None);
    }

    #[test]
    fn sampled_estimate_at_zero_state() {
        let (h, h2, _) = n3a();
        let cfg = EstimatorConfig::sampled(20_000, NoiseModel::noiseless(), Mitigation::NONE);
        let r = estimate(&ansatz_1q(), &[0.0], &h, &h2, &cfg, 42).unwrap();
        // Z0 is deterministic at |0>; only X0 (coefficient -0.866) fluctuates
        let se = 0.75f64.sqrt() / 20_000f64.sqrt();
        assert_abs_diff_eq!(r.energy_stderr, se, epsilon = 2e-4);
        assert!((r.energy + 1.5).abs() < 4.0 * r.energy_stderr);
        assert!((r.variance - 0.75).abs() < 4.0 * r.variance_stderr);
        assert_eq!(r.variance, r.h_squared - r.energy * r.energy);
        assert_eq!(r.per_term.len(), 4);
    }

    #[test]
    fn identity_only_hamiltonian() {
        let h = PauliSum::from_labels(1, &[(2.5, "I")]).unwrap();
        let h2 = h.square().unwrap();
        let cfg = EstimatorConfig::sampled(100, NoiseModel::noiseless(), Mitigation::NONE);
        let r = estimate(&ansatz_1q(), &[1.0], &h, &h2, &cfg, 0).unwrap();
        assert_eq!(r.energy, 2.5);
        assert_eq!(r.variance, 0.0);
        assert!(r.per_term.is_empty());
    }

    #[test]
    fn estimate_is_seed_deterministic() {
        let (h, h2, _) = n3a();
        let cfg =
            EstimatorConfig::sampled(5000, NoiseModel::synthetic_default(), Mitigation { readout: true, cnot: false });
        let a = estimate(&ansatz_1q(), &[0.3], &h, &h2, &cfg, 9).unwrap();
        let b = estimate(&ansatz_1q(), &[0.3], &h, &h2, &cfg, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EstimatorConfig::exact();
        cfg.noise = NoiseModel::readout(0.02);
        assert!(cfg.validate().is_err());
        let mut cfg = EstimatorConfig::sampled(10, NoiseModel::noiseless(), Mitigation { readout: false, cnot: true });
        cfg.folds = vec![1];
        assert!(cfg.validate().is_err());
        cfg.folds = vec![1, 2];
        assert!(cfg.validate().is_err());
        cfg.folds = vec![1, 3, 5];
        assert!(cfg.validate().is_ok());
        let (h, h2, _) = n3a();
        let h_bad = PauliSum::from_labels(2, &[(1.0, "Z0")]).unwrap();
        assert!(estimate(&ansatz_1q(), &[0.0], &h_bad, &h2, &EstimatorConfig::exact(), 0).is_err());
        assert!(estimate(&ansatz_1q(), &[0.0, 1.0], &h, &h2, &EstimatorConfig::exact(), 0).is_err());
    }

    #[test]
    fn parse_flags() {
        assert_eq!("exact".parse::<Shots>().unwrap(), Shots::Exact);
        assert_eq!("20000".parse::<Shots>().unwrap(), Shots::Finite(20_000));
        assert!("0".parse::<Shots>().is_err());
        assert!("many".parse::<Shots>().is_err());
        let m: Mitigation = "readout,cnot".parse().unwrap();
        assert!(m.readout && m.cnot);
        assert_eq!(m.to_string(), "readout,cnot");
        assert_eq!("none".parse::<Mitigation>().unwrap(), Mitigation::NONE);
        assert!("zne".parse::<Mitigation>().is_err());
        assert_eq!(serde_json::to_string(&Shots::Exact).unwrap(), "\"exact\"");
        assert_eq!(serde_json::from_str::<Shots>("20000").unwrap(), Shots::Finite(20_000));
        assert_eq!(serde_json::from_str::<Shots>("\"exact\"").unwrap(), Shots::Exact);
    }

    #[test]
    fn square_check() {
        let (h, h2, _) = n3a();
        check_square(&h, &h2, 1e-10).unwrap();
        let wrong = PauliSum::from_labels(1, &[(2.0, "I")]).unwrap();
        assert!(check_square(&h, &wrong, 1e-10).is_err());
    }
}
