//! Full N=7 block A spectrum from 40 random starts, with the overlap
//! matrix against the exact eigenvectors.
//!
//! ```text
//! cargo run --release --example full_spectrum_n7
//! ```

use lmg_vqe::analysis::{eigensolve, overlap_table};
use lmg_vqe::circuits::ansatz_2q;
use lmg_vqe::optimizer::{discover_spectrum, RunConfig};
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, square_block, ModelParams};

fn main() -> lmg_vqe::Result<()> {
    let (a, _) = build_blocks(&ModelParams::standard(7)?)?;
    let h = decompose_real(&a.matrix)?;
    let h2 = decompose_real(&square_block(&a))?;
    let circuit = ansatz_2q();

    let report = discover_spectrum(&h, &h2, &circuit, 40, &RunConfig::default(), 2024)?;
    let converged = report.runs.iter().filter(|r| r.converged).count();
    println!("{converged}/{} runs converged, coverage {:.0}%", report.runs.len(), 100.0 * report.coverage);
    println!("{:>12} {:>12} {:>8} {:>10}", "exact", "found", "runs", "residual");
    for c in &report.clusters {
        println!(
            "{:>12.6} {:>12.6} {:>8} {:>10.2e}",
            c.matched_eigenvalue.unwrap_or(f64::NAN),
            c.energy,
            c.members.len(),
            c.zero_check.residual
        );
    }

    let table = overlap_table(&report, &circuit, &eigensolve(&a.matrix)?)?;
    print!("\n{:<8}", "");
    for l in &table.eigenvalues {
        print!("{l:>10.3}");
    }
    println!();
    for row in &table.rows {
        print!("{:<8}", row.label);
        for f in &row.fidelities {
            print!("{f:>10.4}");
        }
        println!();
    }
    Ok(())
}
