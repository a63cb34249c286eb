//! Parity blocks of the LMG Hamiltonian and their Pauli encodings.
//!
//! ```text
//! cargo run --example encode_hamiltonians
//! ```

use lmg_vqe::format::sig;
use lmg_vqe::pauli::decompose_real;
use lmg_vqe::quasispin::{build_blocks, ladder_squared_element, square_block, HalfInteger, ModelParams};

fn main() -> lmg_vqe::Result<()> {
    // two-step ladder element <j, m+2| J+^2 |j, m> for j = 7/2
    let j = HalfInteger::from_twice(7);
    for twice_m in [-7, -3, 1] {
        let m = HalfInteger::from_twice(twice_m);
        println!("ladder(j={j}, m={m}) = {}", sig(ladder_squared_element(j, m)?));
    }

    for n in [3, 7] {
        let params = ModelParams::standard(n)?;
        let (a, b) = build_blocks(&params)?;
        for block in [&a, &b] {
            let m: Vec<String> = block.m_values.iter().map(|m| m.to_string()).collect();
            println!("\nN={n} block {} (m = {})", block.parity, m.join(", "));
            for row in block.matrix.row_iter() {
                let cells: Vec<String> = row.iter().map(|&x| format!("{:>12}", sig(x))).collect();
                println!("  {}", cells.join(""));
            }
            let h = decompose_real(&block.matrix)?;
            let h2 = decompose_real(&square_block(block))?;
            print!("H:\n{h}");
            print!("H^2:\n{h2}");

            // multiplying the Pauli sums symbolically gives the same H^2
            let symbolic = h.square()?;
            let diff = (symbolic.reconstruct_real() - h2.reconstruct_real()).amax();
            println!("symbolic vs dense square: {diff:.1e}");
        }
    }
    Ok(())
}
