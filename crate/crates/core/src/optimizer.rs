//! Variance minimization, parameter sweeps and multistart spectrum
//! discovery.
//!
//! The local optimizer is a derivative-free Nelder-Mead simplex search. When
//! the simplex collapses without reaching the convergence threshold it is
//! rebuilt around the best point with a halved step, up to
//! [`RunConfig::max_restarts`] times. The objective is `|sigma^2|`: identical
//! to the variance in exact mode, and in sampled mode it keeps the search
//! from chasing noise-driven negative estimates.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::eigensolve;
use crate::circuits::{run, Circuit};
use crate::estimator::{estimate, EstimationResult, EstimatorConfig};
use crate::pauli::PauliSum;
use crate::{seed, Error, Result};

/// Exact-mode convergence threshold on `|sigma^2|`.
pub const EXACT_THRESHOLD: f64 = 1e-8;
/// Floor of the sampled-mode threshold `max(2 * variance_stderr, 0.01)`.
pub const SAMPLED_THRESHOLD_FLOOR: f64 = 0.01;
/// Smallest cluster radius, used when estimates carry no shot noise.
pub const MIN_CLUSTER_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub estimator: EstimatorConfig,
    /// Maximum objective evaluations per run.
    pub budget: usize,
    /// Initial simplex edge in radians.
    pub initial_step: f64,
    /// Simplex diameter below which a restart is triggered.
    pub x_tolerance: f64,
    pub max_restarts: usize,
    /// Fixed threshold on `|sigma^2|`; `None` uses the mode default.
    pub threshold: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::new(EstimatorConfig::exact())
    }
}

impl RunConfig {
    pub fn new(estimator: EstimatorConfig) -> Self {
        Self { estimator, budget: 2000, initial_step: 0.6, x_tolerance: 1e-10, max_restarts: 8, threshold: None }
    }

    /// Threshold on `|sigma^2|` for an estimate.
    pub fn threshold_for(&self, result: &EstimationResult) -> f64 {
        self.threshold.unwrap_or(if self.estimator.shots.is_exact() {
            EXACT_THRESHOLD
        } else {
            (2.0 * result.variance_stderr).max(SAMPLED_THRESHOLD_FLOOR)
        })
    }

    pub fn is_converged(&self, result: &EstimationResult) -> bool {
        result.variance.abs() < self.threshold_for(result)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub parameters: Vec<f64>,
    pub energy: f64,
    pub energy_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    /// Lowest `|sigma^2|` seen up to and including this evaluation.
    pub best_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Collapsed,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub iterations: Vec<TraceEntry>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Parameters of the best evaluation.
    pub final_parameters: Vec<f64>,
    pub final_result: EstimationResult,
    pub initial_parameters: Vec<f64>,
    pub seed: u64,
}

/// Objective bookkeeping shared by the simplex search.
struct Recorder<'a> {
    circuit: &'a Circuit,
    h: &'a PauliSum,
    h2: &'a PauliSum,
    config: &'a RunConfig,
    seed: u64,
    trace: Vec<TraceEntry>,
    best: Option<(Vec<f64>, EstimationResult)>,
    converged: bool,
}

impl Recorder<'_> {
    fn budget_left(&self) -> bool {
        self.trace.len() < self.config.budget
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let k = self.trace.len();
        let r = estimate(self.circuit, x, self.h, self.h2, &self.config.estimator, seed::derive(self.seed, k as u64))?;
        let objective = r.variance.abs();
        let improved = self.best.as_ref().is_none_or(|(_, b)| objective < b.variance.abs());
        if improved {
            self.converged = self.config.is_converged(&r);
        }
        let best_variance =
            if improved { objective } else { self.best.as_ref().map_or(objective, |(_, b)| b.variance.abs()) };
        self.trace.push(TraceEntry {
            evaluation: k,
            parameters: x.to_vec(),
            energy: r.energy,
            energy_stderr: r.energy_stderr,
            variance: r.variance,
            variance_stderr: r.variance_stderr,
            best_variance,
        });
        if improved {
            self.best = Some((x.to_vec(), r));
        }
        Ok(objective)
    }

    fn should_stop(&self) -> bool {
        self.converged || !self.budget_left()
    }
}

/// Returns `true` if the simplex collapsed, `false` if stopped by the
/// recorder (converged or out of budget).
fn nelder_mead(rec: &mut Recorder<'_>, start: &[f64], step: f64) -> Result<bool> {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = rec.evaluate(start)?;
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        if rec.should_stop() {
            return Ok(false);
        }
        let mut x = start.to_vec();
        x[i] += step;
        let f = rec.evaluate(&x)?;
        simplex.push((x, f));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    loop {
        if rec.should_stop() {
            return Ok(false);
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < rec.config.x_tolerance {
            return Ok(true);
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let towards = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = towards(-alpha);
        let fr = rec.evaluate(&xr)?;
        if fr < simplex[0].1 {
            if rec.should_stop() {
                return Ok(false);
            }
            let xe = towards(-gamma);
            let fe = rec.evaluate(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if rec.should_stop() {
                return Ok(false);
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = towards(-rho);
                let fc = rec.evaluate(&xc)?;
                (xc, fc)
            } else {
                let xc = towards(rho);
                let fc = rec.evaluate(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if rec.should_stop() {
                        return Ok(false);
                    }
                    let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + sigma * (v - b)).collect();
                    let f = rec.evaluate(&x)?;
                    *vertex = (x, f);
                }
            }
        }
    }
}

/// Minimizes `|<H^2> - <H>^2|` over the circuit parameters from `initial`.
///
/// Every evaluation is recorded. Running out of budget is not an error: the
/// trace comes back with `converged = false`.
pub fn minimize_variance(
    h: &PauliSum,
    h2: &PauliSum,
    circuit: &Circuit,
    initial: &[f64],
    config: &RunConfig,
    seed: u64,
) -> Result<RunTrace> {
    circuit.check_parameters(initial)?;
    config.estimator.validate()?;
    if config.budget == 0 {
        return Err(Error::Config("evaluation budget must be at least 1".into()));
    }
    let mut rec = Recorder { circuit, h, h2, config, seed, trace: Vec::new(), best: None, converged: false };
    let mut start = initial.to_vec();
    let mut step = config.initial_step;
    let mut restarts = 0;
    let stop_reason = loop {
        let collapsed = if start.is_empty() {
            rec.evaluate(&start)?;
            true
        } else {
            nelder_mead(&mut rec, &start, step)?
        };
        if rec.converged {
            break StopReason::Converged;
        }
        if !collapsed {
            break StopReason::BudgetExhausted;
        }
        if restarts >= config.max_restarts || start.is_empty() {
            break StopReason::Collapsed;
        }
        restarts += 1;
        start = rec.best.as_ref().map(|(x, _)| x.clone()).unwrap_or(start);
        if restarts > 1 {
            step *= 0.5;
        }
    };
    let (final_parameters, final_result) = rec.best.expect("at least one evaluation");
    Ok(RunTrace {
        iterations: rec.trace,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        final_parameters,
        final_result,
        initial_parameters: initial.to_vec(),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub angle: f64,
    pub energy: f64,
    pub variance: f64,
    pub energy_stderr: f64,
    pub variance_stderr: f64,
}

/// `steps` uniform angles over `[-pi, pi]`, endpoints included.
pub fn default_grid(steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|i| -PI + 2.0 * PI * i as f64 / (steps - 1) as f64).collect(),
    }
}

/// Energy and variance along one parameter, the others held at `fixed`.
///
/// For a one-parameter circuit `fixed` may be empty. Output is ordered by
/// angle. Grid point `i` is estimated with seed `derive(seed, i)` in the
/// caller's grid order.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    h: &PauliSum,
    h2: &PauliSum,
    circuit: &Circuit,
    parameter_index: usize,
    grid: &[f64],
    fixed: &[f64],
    config: &EstimatorConfig,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let k = circuit.num_parameters();
    if parameter_index >= k {
        return Err(Error::ParameterCount { expected: k, got: parameter_index + 1 });
    }
    let template = if fixed.is_empty() && k == 1 { vec![0.0] } else { fixed.to_vec() };
    circuit.check_parameters(&template)?;
    let mut points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &angle)| {
            let mut p = template.clone();
            p[parameter_index] = angle;
            let r = estimate(circuit, &p, h, h2, config, seed::derive(seed, i as u64))?;
            Ok(SweepPoint {
                angle,
                energy: r.energy,
                variance: r.variance,
                energy_stderr: r.energy_stderr,
                variance_stderr: r.variance_stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCheck {
    pub passed: bool,
    pub residual: f64,
    pub energy: f64,
}

/// Checks that the noiseless ansatz state at `parameters` is an eigenvector
/// of the dense matrix of `h`: `||M psi - <psi|M|psi> psi|| < tolerance`.
pub fn accidental_zero_check(circuit: &Circuit, parameters: &[f64], h: &PauliSum, tolerance: f64) -> Result<ZeroCheck> {
    let state = run(circuit, parameters)?;
    if state.num_qubits() != h.num_qubits() {
        return Err(Error::QubitMismatch { expected: state.num_qubits(), got: h.num_qubits() });
    }
    let m = h.reconstruct();
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let m_psi = &m * &psi;
    let energy = psi.dotc(&m_psi).re;
    let residual = (m_psi - psi * num_complex::Complex64::new(energy, 0.0)).norm();
    Ok(ZeroCheck { passed: residual < tolerance, residual, energy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// Mean final energy of the member runs.
    pub energy: f64,
    /// Standard error of that mean from the members' reported stderrs.
    pub stderr: f64,
    /// Mean final variance of the members.
    pub variance: f64,
    pub members: Vec<usize>,
    pub representative_run: usize,
    pub representative_parameters: Vec<f64>,
    pub zero_check: ZeroCheck,
    /// Closest oracle eigenvalue within the cluster radius.
    pub matched_eigenvalue: Option<f64>,
}

impl Cluster {
    pub fn radius(&self) -> f64 {
        (5.0 * self.stderr).max(MIN_CLUSTER_RADIUS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalue clusters that passed the accidental-zero check, ascending.
    pub clusters: Vec<Cluster>,
    /// Clusters whose representative state failed the check.
    pub rejected: Vec<Cluster>,
    pub n_starts: usize,
    /// Fraction of oracle eigenvalues matched by an accepted cluster.
    pub coverage: f64,
    pub oracle_eigenvalues: Vec<f64>,
    pub runs: Vec<RunTrace>,
    pub master_seed: u64,
}

impl SpectrumReport {
    pub fn cluster_for(&self, eigenvalue: f64) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.matched_eigenvalue == Some(eigenvalue))
    }

    pub fn energies(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.energy).collect()
    }
}

struct Group {
    members: Vec<usize>,
}

fn group_energies(runs: &[RunTrace], indices: &[usize]) -> Vec<Group> {
    let center =
        |g: &Group| g.members.iter().map(|&i| runs[i].final_result.energy).sum::<f64>() / g.members.len() as f64;
    let stderr = |g: &Group| {
        let s: f64 = g.members.iter().map(|&i| runs[i].final_result.energy_stderr.powi(2)).sum();
        s.sqrt() / g.members.len() as f64
    };
    let radius = |g: &Group| (5.0 * stderr(g)).max(MIN_CLUSTER_RADIUS);
    let mut groups: Vec<Group> = Vec::new();
    for &i in indices {
        let e = runs[i].final_result.energy;
        let r_i = (5.0 * runs[i].final_result.energy_stderr).max(MIN_CLUSTER_RADIUS);
        match groups.iter_mut().find(|g| (center(g) - e).abs() <= radius(g).max(r_i)) {
            Some(g) => g.members.push(i),
            None => groups.push(Group { members: vec![i] }),
        }
    }
    // merge until centers are pairwise separated by more than the radius
    loop {
        let mut merged = false;
        'outer: for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                if (center(&groups[a]) - center(&groups[b])).abs() <= radius(&groups[a]).max(radius(&groups[b])) {
                    let g = groups.remove(b);
                    groups[a].members.extend(g.members);
                    groups[a].members.sort_unstable();
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    groups
}

/// Tolerance of the accidental-zero check for a converged run.
///
/// In exact mode the residual equals `sqrt(sigma^2)`, so the tolerance is
/// tied to the convergence threshold: `10 * sqrt(threshold)`. In sampled
/// mode it is `10 * sqrt(energy_stderr^2 + variance_stderr^2)`.
pub fn zero_check_tolerance(config: &RunConfig, result: &EstimationResult) -> f64 {
    if config.estimator.shots.is_exact() {
        10.0 * config.threshold_for(result).sqrt()
    } else {
        10.0 * result.energy_stderr.hypot(result.variance_stderr)
    }
}

/// Uniform random start in `[-pi, pi]^k` for run `index`.
pub fn random_start(master_seed: u64, index: usize, k: usize) -> Vec<f64> {
    let mut rng = seed::rng(seed::derive_path(master_seed, &[0, index as u64]));
    (0..k).map(|_| rng.random_range(-PI..=PI)).collect()
}

/// Runs `n_starts` minimizations from seeded random starts and clusters the
/// converged energies into eigenvalue estimates.
///
/// Each cluster's representative (its lowest-variance member) must pass
/// [`accidental_zero_check`] to be reported; failures land in `rejected`.
pub fn discover_spectrum(
    h: &PauliSum,
    h2: &PauliSum,
    circuit: &Circuit,
    n_starts: usize,
    config: &RunConfig,
    master_seed: u64,
) -> Result<SpectrumReport> {
    let k = circuit.num_parameters();
    let runs = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let start = random_start(master_seed, i, k);
            minimize_variance(h, h2, circuit, &start, config, seed::derive_path(master_seed, &[1, i as u64]))
        })
        .collect::<Result<Vec<_>>>()?;

    let oracle = eigensolve(&h.reconstruct_real())?.eigenvalues;
    let converged: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].converged).collect();
    let mut clusters = Vec::new();
    let mut rejected = Vec::new();
    for g in group_energies(&runs, &converged) {
        let n = g.members.len() as f64;
        let energy = g.members.iter().map(|&i| runs[i].final_result.energy).sum::<f64>() / n;
        let stderr = g.members.iter().map(|&i| runs[i].final_result.energy_stderr.powi(2)).sum::<f64>().sqrt() / n;
        let variance = g.members.iter().map(|&i| runs[i].final_result.variance).sum::<f64>() / n;
        let rep = *g
            .members
            .iter()
            .min_by(|&&a, &&b| runs[a].final_result.variance.abs().total_cmp(&runs[b].final_result.variance.abs()))
            .expect("nonempty group");
        let tol = zero_check_tolerance(config, &runs[rep].final_result);
        let zero_check = accidental_zero_check(circuit, &runs[rep].final_parameters, h, tol)?;
        let radius = (5.0 * stderr).max(MIN_CLUSTER_RADIUS);
        let matched_eigenvalue = oracle
            .iter()
            .copied()
            .filter(|l| (l - energy).abs() <= radius)
            .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()));
        let cluster = Cluster {
            energy,
            stderr,
            variance,
            members: g.members,
            representative_run: rep,
            representative_parameters: runs[rep].final_parameters.clone(),
            zero_check,
            matched_eigenvalue,
        };
        if cluster.zero_check.passed {
            clusters.push(cluster);
        } else {
            rejected.push(cluster);
        }
    }
    clusters.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let matched = oracle.iter().filter(|&&l| clusters.iter().any(|c| c.matched_eigenvalue == Some(l))).count();
    let coverage = if oracle.is_empty() { 1.0 } else { matched as f64 / oracle.len() as f64 };
    Ok(SpectrumReport { clusters, rejected, n_starts, coverage, oracle_eigenvalues: oracle, runs, master_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{ansatz_1q, ansatz_2q};
    use crate::pauli::decompose_real;
    use crate::quasispin::{build_blocks, square_block, ModelParams};
    use approx::assert_abs_diff_eq;

    fn block(n: u32) -> (PauliSum, PauliSum) {
        let (a, _) = build_blocks(&ModelParams::standard(n).unwrap()).unwrap();
        (decompose_real(&a.matrix).unwrap(), decompose_real(&square_block(&a)).unwrap())
    }

    /// Angle whose RY state is the eigenvector `(c0, c1)` up to sign.
    fn angle_of(v: &[f64]) -> f64 {
        2.0 * v[1].atan2(v[0])
    }

    #[test]
    fn n3_converges_from_any_start() {
        let (h, h2) = block(3);
        let r7 = 7f64.sqrt();
        let eig = [(-1.0 - r7) / 2.0, (-1.0 + r7) / 2.0];
        for start in [-3.0, -1.0, 0.0, 0.5, 2.9] {
            let t = minimize_variance(&h, &h2, &ansatz_1q(), &[start], &RunConfig::default(), 0).unwrap();
            assert!(t.converged, "start {start}");
            assert!(t.final_result.variance < 1e-8);
            let e = t.final_result.energy;
            assert!(eig.iter().any(|l| (l - e).abs() < 1e-6), "energy {e}");
        }
    }

    #[test]
    fn start_at_eigenstate_stops_immediately() {
        let (h, h2) = block(3);
        let (a, _) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        let d = eigensolve(&a.matrix).unwrap();
        let theta = angle_of(&d.eigenvector(0));
        let t = minimize_variance(&h, &h2, &ansatz_1q(), &[theta], &RunConfig::default(), 0).unwrap();
        assert_eq!(t.iterations.len(), 1);
        assert!(t.final_result.variance < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let (h, h2) = block(7);
        let cfg = RunConfig { budget: 3, ..RunConfig::default() };
        let t = minimize_variance(&h, &h2, &ansatz_2q(), &[0.1, 0.2, 0.3], &cfg, 0).unwrap();
        assert!(!t.converged);
        assert_eq!(t.stop_reason, StopReason::BudgetExhausted);
        assert_eq!(t.iterations.len(), 3);
        let cfg = RunConfig { budget: 0, ..RunConfig::default() };
        assert!(minimize_variance(&h, &h2, &ansatz_2q(), &[0.1, 0.2, 0.3], &cfg, 0).is_err());
    }

    #[test]
    fn best_variance_is_nonincreasing() {
        let (h, h2) = block(7);
        let t = minimize_variance(&h, &h2, &ansatz_2q(), &[1.0, -2.0, 0.5], &RunConfig::default(), 0).unwrap();
        assert!(t.iterations.windows(2).all(|w| w[1].best_variance <= w[0].best_variance));
        assert_eq!(t.iterations.last().unwrap().best_variance, t.final_result.variance.abs());
    }

    #[test]
    fn sweep_grid_and_order() {
        let (h, h2) = block(3);
        let g = default_grid(50);
        assert_eq!(g.len(), 50);
        assert_abs_diff_eq!(g[0], -PI);
        assert_abs_diff_eq!(g[49], PI, epsilon = 1e-15);
        let mut shuffled = g.clone();
        shuffled.reverse();
        let pts = sweep(&h, &h2, &ansatz_1q(), 0, &shuffled, &[], &EstimatorConfig::exact(), 0).unwrap();
        assert!(pts.windows(2).all(|w| w[0].angle < w[1].angle));
        assert!(pts.iter().all(|p| p.energy_stderr == 0.0 && p.variance >= -1e-12));
        assert!(matches!(
            sweep(&h, &h2, &ansatz_1q(), 0, &[], &[], &EstimatorConfig::exact(), 0),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn sweep_two_qubit_needs_fixed_parameters() {
        let (h, h2) = block(7);
        let g = default_grid(5);
        assert!(sweep(&h, &h2, &ansatz_2q(), 1, &g, &[], &EstimatorConfig::exact(), 0).is_err());
        let pts = sweep(&h, &h2, &ansatz_2q(), 1, &g, &[0.3, 0.0, -0.2], &EstimatorConfig::exact(), 0).unwrap();
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn constant_hamiltonian_sweep() {
        let h = PauliSum::from_labels(1, &[(1.7, "I")]).unwrap();
        let h2 = h.square().unwrap();
        let pts = sweep(&h, &h2, &ansatz_1q(), 0, &default_grid(50), &[], &EstimatorConfig::exact(), 0).unwrap();
        for p in pts {
            assert_abs_diff_eq!(p.energy, 1.7, epsilon = 1e-14);
            assert_abs_diff_eq!(p.variance, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_check_cases() {
        let (h, _) = block(3);
        let (a, _) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        let d = eigensolve(&a.matrix).unwrap();
        let ok = accidental_zero_check(&ansatz_1q(), &[angle_of(&d.eigenvector(0))], &h, 1e-6).unwrap();
        assert!(ok.passed && ok.residual < 1e-8);
        let bad = accidental_zero_check(&ansatz_1q(), &[PI / 4.0], &h, 1e-6).unwrap();
        assert!(!bad.passed);
        // dense residual oracle: ||M psi - E psi|| for psi = (cos pi/8, sin pi/8)
        let psi = nalgebra::DVector::from_vec(vec![(PI / 8.0).cos(), (PI / 8.0).sin()]);
        let mp = &a.matrix * &psi;
        let e = psi.dot(&mp);
        assert_abs_diff_eq!(bad.residual, (mp - psi * e).norm(), epsilon = 1e-12);
        assert_abs_diff_eq!(bad.residual, 0.0947343455, epsilon = 1e-9);
        let z = PauliSum::from_labels(1, &[(1.0, "Z0")]).unwrap();
        for theta in [0.0, PI] {
            assert!(accidental_zero_check(&ansatz_1q(), &[theta], &z, 1e-6).unwrap().passed);
        }
    }

    #[test]
    fn n3_spectrum_two_clusters() {
        let (h, h2) = block(3);
        let rep = discover_spectrum(&h, &h2, &ansatz_1q(), 20, &RunConfig::default(), 1).unwrap();
        assert_eq!(rep.clusters.len(), 2);
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.rejected.is_empty());
        let r7 = 7f64.sqrt();
        assert_abs_diff_eq!(rep.clusters[0].energy, (-1.0 - r7) / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rep.clusters[1].energy, (-1.0 + r7) / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn single_start() {
        let (h, h2) = block(3);
        let rep = discover_spectrum(&h, &h2, &ansatz_1q(), 1, &RunConfig::default(), 5).unwrap();
        assert!(rep.clusters.len() <= 1);
        assert_eq!(rep.runs.len(), 1);
    }

    #[test]
    fn spectrum_is_deterministic() {
        let (h, h2) = block(7);
        let a = discover_spectrum(&h, &h2, &ansatz_2q(), 6, &RunConfig::default(), 3).unwrap();
        let b = discover_spectrum(&h, &h2, &ansatz_2q(), 6, &RunConfig::default(), 3).unwrap();
        assert_eq!(a, b);
    }
}
