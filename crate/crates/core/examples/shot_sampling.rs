//! Measuring Pauli strings on the two-qubit ansatz from shots.
//!
//! Each term is measured in its own circuit after a basis change
//! (RY(-pi/2) for X, RX(pi/2) for Y).
//!
//! ```text
//! cargo run --example shot_sampling
//! ```

use lmg_vqe::circuits::{ansatz_2q, run};
use lmg_vqe::pauli::PauliString;
use lmg_vqe::simulator::{expectation_from_counts, measure_term, NoiseModel};

fn main() -> lmg_vqe::Result<()> {
    let circuit = ansatz_2q();
    let params = [0.7, -1.2, 2.1];
    let state = run(&circuit, &params)?;
    println!("amplitudes (qubit 0 is the leftmost bit):");
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("  |{i:02b}>  {:+.6} {:+.6}i", a.re, a.im);
    }

    println!("\n{:<6} {:>10} {:>10} {:>10}  counts", "term", "exact", "sampled", "stderr");
    for label in ["Z0", "X1", "Z0X1", "X0X1", "Y0Y1"] {
        let term = PauliString::parse(label, 2)?;
        let exact = state.expectation(&term)?;
        let result = measure_term(&circuit, &params, &term, 20_000, &NoiseModel::noiseless(), 1)?;
        let (mean, stderr) = expectation_from_counts(&result, &term);
        println!("{label:<6} {exact:>10.5} {mean:>10.5} {stderr:>10.5}  {:?}", result.counts_map());
    }

    // readout flips pull every expectation toward zero
    let term = PauliString::parse("Z0", 2)?;
    for p in [0.0, 0.02, 0.1] {
        let r = measure_term(&circuit, &params, &term, 20_000, &NoiseModel::readout(p), 2)?;
        println!("readout p={p:<4}  <Z0> = {:.4}", expectation_from_counts(&r, &term).0);
    }
    Ok(())
}
