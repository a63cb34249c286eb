//! CNOT folding and linear extrapolation to zero CNOT noise on the N=7
//! block A energy.
//!
//! ```text
//! cargo run --release --example cnot_extrapolation
//! ```

use lmg_vqe::circuits::{ansatz_2q, fold_cnots};
use lmg_vqe::estimator::{estimate, EstimatorConfig, Mitigation};
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, square_block, ModelParams};
use lmg_vqe::simulator::NoiseModel;

fn main() -> lmg_vqe::Result<()> {
    let (a, _) = build_blocks(&ModelParams::standard(7)?)?;
    let h = decompose_real(&a.matrix)?;
    let h2 = decompose_real(&square_block(&a))?;
    let circuit = ansatz_2q();
    let params = [1.1, -0.4, 2.3];
    let noise = NoiseModel::cnot(0.01);

    let exact = estimate(&circuit, &params, &h, &h2, &EstimatorConfig::exact(), 0)?.energy;
    println!("exact energy {exact:.5}");
    for fold in [1, 3, 5] {
        let folded = fold_cnots(&circuit, fold)?;
        let config = EstimatorConfig::sampled(20_000, noise, Mitigation::NONE);
        let r = estimate(&folded, &params, &h, &h2, &config, 9)?;
        println!("fold {fold} ({} CNOTs): {:.5} +- {:.5}", folded.cnot_count(), r.energy, r.energy_stderr);
    }
    for folds in [vec![1, 3], vec![1, 3, 5]] {
        let config = EstimatorConfig {
            folds: folds.clone(),
            ..EstimatorConfig::sampled(20_000, noise, Mitigation { readout: false, cnot: true })
        };
        let r = estimate(&circuit, &params, &h, &h2, &config, 9)?;
        println!("extrapolated from {folds:?}: {:.5} +- {:.5}", r.energy, r.energy_stderr);
    }
    Ok(())
}
