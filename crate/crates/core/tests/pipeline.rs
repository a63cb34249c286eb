use lmg_vqe::analysis::eigensolve;
use lmg_vqe::circuits::{ansatz_1q, ansatz_2q};
use lmg_vqe::estimator::{estimate, EstimatorConfig, Mitigation};
use lmg_vqe::optimizer::{discover_spectrum, RunConfig};
use lmg_vqe::pauli::{decompose_real, PauliSum};
use lmg_vqe::quasispin::{build_block_for, square_block, ModelParams, Parity};
use lmg_vqe::seed;
use lmg_vqe::simulator::NoiseModel;

fn encoded(n: u32, parity: Parity) -> (nalgebra::DMatrix<f64>, PauliSum, PauliSum) {
    let block = build_block_for(&ModelParams::standard(n).unwrap(), parity).unwrap();
    let h = decompose_real(&block.matrix).unwrap();
    let h2 = decompose_real(&square_block(&block)).unwrap();
    (block.matrix, h, h2)
}

#[test]
fn sampled_estimates_bracket_exact() {
    let (_, h, h2) = encoded(7, Parity::A);
    let config = EstimatorConfig::sampled(20_000, NoiseModel::noiseless(), Mitigation::NONE);
    let mut inside = 0;
    for i in 0..40u64 {
        let p = [0.3 * i as f64 - 6.0, 1.0 - 0.05 * i as f64, 0.1 * i as f64];
        let exact = estimate(&ansatz_2q(), &p, &h, &h2, &EstimatorConfig::exact(), 0).unwrap();
        let s = estimate(&ansatz_2q(), &p, &h, &h2, &config, seed::derive(1, i)).unwrap();
        assert!(s.energy_stderr > 0.0 && s.variance_stderr > 0.0);
        if (s.energy - exact.energy).abs() < 4.0 * s.energy_stderr {
            inside += 1;
        }
    }
    assert!(inside >= 38, "{inside}/40");
}

#[test]
fn noisy_n3_spectrum_with_readout_mitigation() {
    let noise = NoiseModel::readout(0.02);
    let config = RunConfig::new(EstimatorConfig::sampled(20_000, noise, Mitigation { readout: true, cnot: false }));
    for parity in [Parity::A, Parity::B] {
        let (m, h, h2) = encoded(3, parity);
        let exact = eigensolve(&m).unwrap().eigenvalues;
        let report = discover_spectrum(&h, &h2, &ansatz_1q(), 20, &config, 5).unwrap();
        assert_eq!(report.clusters.len(), 2, "{parity}");
        for (c, e) in report.clusters.iter().zip(&exact) {
            assert!((c.energy - e).abs() < 0.03, "{parity}: {} vs {e}", c.energy);
        }
    }
}

#[test]
fn extrapolation_reduces_cnot_bias_on_average() {
    let (_, h, h2) = encoded(7, Parity::A);
    let noise = NoiseModel::cnot(0.02);
    let raw = EstimatorConfig::sampled(200_000, noise, Mitigation::NONE);
    let zne = EstimatorConfig {
        folds: vec![1, 3, 5],
        ..EstimatorConfig::sampled(200_000, noise, Mitigation { readout: false, cnot: true })
    };
    let (mut raw_err, mut zne_err) = (0.0, 0.0);
    for i in 0..10u64 {
        let p = [0.6 * i as f64 - 3.0, 0.4 * i as f64 - 2.0, 1.5 - 0.3 * i as f64];
        let exact = estimate(&ansatz_2q(), &p, &h, &h2, &EstimatorConfig::exact(), 0).unwrap().energy;
        raw_err += (estimate(&ansatz_2q(), &p, &h, &h2, &raw, i).unwrap().energy - exact).abs();
        zne_err += (estimate(&ansatz_2q(), &p, &h, &h2, &zne, i).unwrap().energy - exact).abs();
    }
    assert!(zne_err < raw_err, "extrapolated {zne_err} vs raw {raw_err}");
}
