//! A single variance minimization on the N=3 block A, exact and with shot
//! noise, printing the optimizer trace.
//!
//! ```text
//! cargo run --example variance_minimization
//! ```

use lmg_vqe::circuits::ansatz_1q;
use lmg_vqe::estimator::{EstimatorConfig, Mitigation};
use lmg_vqe::optimizer::{minimize_variance, RunConfig};
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, square_block, ModelParams};
use lmg_vqe::simulator::NoiseModel;

fn main() -> lmg_vqe::Result<()> {
    let (a, _) = build_blocks(&ModelParams::standard(3)?)?;
    let h = decompose_real(&a.matrix)?;
    let h2 = decompose_real(&square_block(&a))?;

    let configs = [
        ("exact", RunConfig::default()),
        ("20000 shots", RunConfig::new(EstimatorConfig::sampled(20_000, NoiseModel::noiseless(), Mitigation::NONE))),
    ];
    for (name, config) in configs {
        for start in [-2.5, 1.0] {
            // with shots the stop threshold follows the variance stderr, so a
            // start already near an eigenstate can stop on the first evaluation
            let trace = minimize_variance(&h, &h2, &ansatz_1q(), &[start], &config, 3)?;
            println!("{name}, start {start}: {:?} after {} evaluations", trace.stop_reason, trace.iterations.len());
            for e in trace.iterations.iter().step_by(4).take(8) {
                println!(
                    "  #{:<3} theta={:>8.4}  E={:>8.4}  var={:>10.2e}  best={:>10.2e}",
                    e.evaluation, e.parameters[0], e.energy, e.variance, e.best_variance
                );
            }
            let r = &trace.final_result;
            println!(
                "  final theta={:.6}  E={:.6} +- {:.4}  var={:.2e}\n",
                trace.final_parameters[0], r.energy, r.energy_stderr, r.variance
            );
        }
    }
    Ok(())
}
