//! Confusion-matrix calibration and readout correction on basis states.
//!
//! ```text
//! cargo run --example readout_mitigation
//! ```

use lmg_vqe::circuits::{Circuit, Gate};
use lmg_vqe::mitigation::{calibrate, mitigate_counts};
use lmg_vqe::pauli::PauliString;
use lmg_vqe::simulator::{expectation_from_counts, measure_term, NoiseModel};

fn main() -> lmg_vqe::Result<()> {
    let noise = NoiseModel { readout_p01: 0.02, readout_p10: 0.05, cnot_depolarizing: 0.0 };
    let cal = calibrate(2, &noise, 20_000, 11)?;
    println!("calibrated confusion matrix (column = prepared state):");
    for row in cal.matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.4}")).collect();
        println!("  {}", cells.join("  "));
    }

    let zz = PauliString::parse("Z0Z1", 2)?;
    let z1 = PauliString::parse("Z1", 2)?;
    println!("\n{:<6} {:<5} {:>8} {:>8} {:>10}", "state", "term", "ideal", "raw", "mitigated");
    for bits in 0..4usize {
        let gates = (0..2).filter(|q| bits >> (1 - q) & 1 == 1).map(|q| Gate::X { target: q }).collect();
        let circuit = Circuit::new(2, gates)?;
        for (name, term) in [("Z1", &z1), ("Z0Z1", &zz)] {
            let counts = measure_term(&circuit, &[], term, 20_000, &noise, 100 + bits as u64)?;
            let ideal = if (bits & term.support_mask()).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let (raw, _) = expectation_from_counts(&counts, term);
            let quasi = mitigate_counts(&counts, &cal)?;
            let (fixed, err) = quasi.expectation(term);
            println!("|{bits:02b}>  {name:<5} {ideal:>8.3} {raw:>8.4} {fixed:>10.4} +- {err:.4}");
        }
    }
    Ok(())
}
