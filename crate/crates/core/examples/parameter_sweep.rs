//! Energy and variance over the one-qubit ansatz angle for both N=3
//! blocks, exactly and at 20,000 shots per term.
//!
//! ```text
//! cargo run --example parameter_sweep
//! ```

use lmg_vqe::circuits::ansatz_1q;
use lmg_vqe::estimator::{EstimatorConfig, Mitigation};
use lmg_vqe::optimizer::{default_grid, sweep};
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, square_block, ModelParams};
use lmg_vqe::simulator::NoiseModel;

fn main() -> lmg_vqe::Result<()> {
    let (a, b) = build_blocks(&ModelParams::standard(3)?)?;
    let grid = default_grid(50);
    let sampled = EstimatorConfig::sampled(20_000, NoiseModel::noiseless(), Mitigation::NONE);
    for block in [a, b] {
        let h = decompose_real(&block.matrix)?;
        let h2 = decompose_real(&square_block(&block))?;
        let exact = sweep(&h, &h2, &ansatz_1q(), 0, &grid, &[], &EstimatorConfig::exact(), 0)?;
        let shots = sweep(&h, &h2, &ansatz_1q(), 0, &grid, &[], &sampled, 7)?;
        println!("block {}", block.parity);
        println!("{:>8} {:>9} {:>9} {:>9} {:>9}", "theta", "E", "var", "E~", "var~");
        for (e, s) in exact.iter().zip(&shots).step_by(5) {
            println!("{:>8.3} {:>9.4} {:>9.4} {:>9.4} {:>9.4}", e.angle, e.energy, e.variance, s.energy, s.variance);
        }
        // variance dips to zero twice per period, once at each eigenstate
        let dips = exact
            .windows(3)
            .filter(|w| w[1].variance < w[0].variance && w[1].variance < w[2].variance)
            .map(|w| format!("{:.3} (E={:.3})", w[1].angle, w[1].energy))
            .collect::<Vec<_>>();
        println!("variance minima on the grid: {}\n", dips.join(", "));
    }
    Ok(())
}
