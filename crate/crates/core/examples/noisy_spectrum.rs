//! N=3 spectrum under synthetic readout noise, with and without readout
//! mitigation, next to the published hardware values.
//!
//! ```text
//! cargo run --release --example noisy_spectrum
//! ```

use lmg_vqe::analysis::{eigensolve, hardware_reference, spectrum_rows};
use lmg_vqe::circuits::ansatz_1q;
use lmg_vqe::estimator::{EstimatorConfig, Mitigation};
use lmg_vqe::optimizer::{discover_spectrum, RunConfig};
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, square_block, ModelParams};
use lmg_vqe::simulator::NoiseModel;

fn main() -> lmg_vqe::Result<()> {
    let (a, b) = build_blocks(&ModelParams::standard(3)?)?;
    let mut full: Vec<f64> =
        [&a, &b].iter().flat_map(|blk| eigensolve(&blk.matrix).map(|d| d.eigenvalues).unwrap_or_default()).collect();
    full.sort_by(f64::total_cmp);

    // unmitigated readout flips leave a variance floor above the stop
    // threshold, so no run converges there
    let noise = NoiseModel::readout(0.02);
    for mitigation in [Mitigation::NONE, Mitigation { readout: true, cnot: false }] {
        println!("readout p=0.02, mitigation: {mitigation}");
        let config = RunConfig::new(EstimatorConfig::sampled(20_000, noise, mitigation));
        for block in [&a, &b] {
            let h = decompose_real(&block.matrix)?;
            let h2 = decompose_real(&square_block(block))?;
            let report = discover_spectrum(&h, &h2, &ansatz_1q(), 20, &config, 5)?;
            for row in spectrum_rows(&report, &block.parity.to_string(), &full) {
                match (row.measured, row.stderr) {
                    (Some(m), Some(s)) => println!(
                        "  {} {:<7} exact {:>7.3}  found {m:>7.3} +- {s:.3}",
                        row.block, row.eigenstate, row.exact
                    ),
                    _ => println!("  {} {:<7} exact {:>7.3}  not found", row.block, row.eigenstate, row.exact),
                }
            }
            if !report.rejected.is_empty() {
                println!("  ({} cluster(s) rejected as accidental zeros)", report.rejected.len());
            }
        }
    }

    if let Some(hw) = hardware_reference(3) {
        println!("\n{} at {} shots (annotation):", hw.device, hw.shots);
        for (state, exact, variance, measured, err) in hw.rows {
            println!("  {state:<7} exact {exact:>7.3}  measured {measured:>7.3} +- {err:.3}  variance {variance}");
        }
    }
    Ok(())
}
