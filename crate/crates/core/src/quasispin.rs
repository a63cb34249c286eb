//! LMG Hamiltonian in the maximum-quasispin sector, split by parity.
//!
//! With `J = N/2` the Hamiltonian
//! `eps*Jz + V/2 (J+^2 + J-^2) + W/2 (J+J- + J-J+)` only couples `m` to
//! `m +- 2`, so the `N + 1` states `|J, m>` fall into two invariant blocks.
//! Block A holds `m = -J, -J + 2, ...` (it contains the unperturbed ground
//! state), block B holds the rest. Basis order inside a block is ascending
//! in `m`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger(i64);

impl HalfInteger {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_particles: u32,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub v: f64,
    #[serde(default)]
    pub w: f64,
}

fn default_eps() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(n_particles: u32, eps: f64, v: f64, w: f64) -> Result<Self> {
        let params = Self { n_particles, eps, v, w };
        params.validate()?;
        Ok(params)
    }

    /// `N` particles with `eps = 1`, `V = 0.5`, `W = 0`.
    pub fn standard(n_particles: u32) -> Result<Self> {
        Self::new(n_particles, 1.0, 0.5, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 1 {
            return Err(Error::InvalidModel("n_particles must be at least 1".into()));
        }
        if self.eps <= 0.0 || !self.eps.is_finite() {
            return Err(Error::InvalidModel(format!("eps must be positive, got {}", self.eps)));
        }
        if !self.v.is_finite() || !self.w.is_finite() {
            return Err(Error::InvalidModel("V and W must be finite".into()));
        }
        Ok(())
    }

    /// Total quasispin of the maximum sector, `N/2`.
    pub fn j(&self) -> HalfInteger {
        HalfInteger::from_twice(self.n_particles as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    A,
    B,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::A => f.write_str("A"),
            Parity::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasispinBlock {
    pub j: HalfInteger,
    pub m_values: Vec<HalfInteger>,
    pub matrix: DMatrix<f64>,
    pub parity: Parity,
}

impl QuasispinBlock {
    pub fn dim(&self) -> usize {
        self.m_values.len()
    }

    /// Number of qubits needed to hold the block, if its dimension is a
    /// power of two.
    pub fn num_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }
}

/// `<j, m+2| J+^2 |j, m>`.
pub fn ladder_squared_element(j: HalfInteger, m: HalfInteger) -> Result<f64> {
    let (j2, m2) = (j.twice(), m.twice());
    let parity_ok = (j2 - m2) % 2 == 0;
    if !parity_ok || m2.abs() > j2 || m2 + 4 > j2 {
        return Err(Error::LadderDomain { j: j.value(), m: m.value() });
    }
    let (j, m) = (j.value(), m.value());
    Ok(((j - m) * (j + m + 1.0)).sqrt() * ((j - m - 1.0) * (j + m + 2.0)).sqrt())
}

fn diagonal(params: &ModelParams, j: HalfInteger, m: HalfInteger) -> f64 {
    let (j, m) = (j.value(), m.value());
    params.eps * m + params.w * (j * (j + 1.0) - m * m)
}

fn build_block(params: &ModelParams, parity: Parity) -> Result<QuasispinBlock> {
    let j = params.j();
    let start = match parity {
        Parity::A => -j.twice(),
        Parity::B => -j.twice() + 2,
    };
    let m_values: Vec<HalfInteger> =
        (0..).map(|k| HalfInteger::from_twice(start + 4 * k)).take_while(|m| m.twice() <= j.twice()).collect();
    let d = m_values.len();
    let mut matrix = DMatrix::zeros(d, d);
    for (i, &m) in m_values.iter().enumerate() {
        matrix[(i, i)] = diagonal(params, j, m);
        if i + 1 < d {
            let off = -0.5 * params.v * ladder_squared_element(j, m)?;
            matrix[(i, i + 1)] = off;
            matrix[(i + 1, i)] = off;
        }
    }
    Ok(QuasispinBlock { j, m_values, matrix, parity })
}

/// Both parity blocks, `(A, B)`. For `N = 0 mod 2` block B is one smaller
/// than block A; for odd `N` both have dimension `(N + 1) / 2`.
pub fn build_blocks(params: &ModelParams) -> Result<(QuasispinBlock, QuasispinBlock)> {
    params.validate()?;
    Ok((build_block(params, Parity::A)?, build_block(params, Parity::B)?))
}

pub fn build_block_for(params: &ModelParams, parity: Parity) -> Result<QuasispinBlock> {
    params.validate()?;
    build_block(params, parity)
}

pub fn square_block(block: &QuasispinBlock) -> DMatrix<f64> {
    &block.matrix * &block.matrix
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(twice: i64) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn ladder_values() {
        let a = ladder_squared_element(h(7), h(-7)).unwrap();
        assert_abs_diff_eq!(a, 7f64.sqrt() * 12f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(0.25 * a, 2.291, epsilon = 5e-4);
        let b = ladder_squared_element(h(7), h(-3)).unwrap();
        assert_abs_diff_eq!(b, 15f64.sqrt() * 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(0.25 * b, 3.873, epsilon = 5e-4);
    }

    #[test]
    fn ladder_outside_multiplet() {
        assert!(matches!(ladder_squared_element(h(1), h(-1)), Err(Error::LadderDomain { .. })));
        // m and j of different integrality
        assert!(ladder_squared_element(h(3), h(-2)).is_err());
    }

    #[test]
    fn n3_blocks() {
        let (a, b) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        let s = 0.75f64.sqrt();
        assert_eq!(a.parity, Parity::A);
        assert_eq!(a.m_values, vec![h(-3), h(1)]);
        assert_eq!(b.m_values, vec![h(-1), h(3)]);
        let expect_a = DMatrix::from_row_slice(2, 2, &[-1.5, -s, -s, 0.5]);
        let expect_b = DMatrix::from_row_slice(2, 2, &[-0.5, -s, -s, 1.5]);
        assert_abs_diff_eq!(a.matrix, expect_a, epsilon = 1e-12);
        assert_abs_diff_eq!(b.matrix, expect_b, epsilon = 1e-12);
        assert_abs_diff_eq!(a.matrix[(0, 1)], -0.866, epsilon = 5e-4);
    }

    #[test]
    fn n7_block_a() {
        let (a, _) = build_blocks(&ModelParams::standard(7).unwrap()).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.num_qubits(), Some(2));
        let diag: Vec<f64> = (0..4).map(|i| a.matrix[(i, i)]).collect();
        assert_eq!(diag, vec![-3.5, -1.5, 0.5, 2.5]);
        let off = [-2.291, -3.873, -3.354];
        for (i, o) in off.iter().enumerate() {
            assert_abs_diff_eq!(a.matrix[(i, i + 1)], o, epsilon = 5e-4);
        }
        assert_eq!(a.matrix[(0, 2)], 0.0);
        assert_eq!(a.matrix[(0, 3)], 0.0);
        assert_eq!(a.matrix[(1, 3)], 0.0);
    }

    #[test]
    fn n1_blocks_are_scalars() {
        let (a, b) = build_blocks(&ModelParams::standard(1).unwrap()).unwrap();
        assert_eq!(a.matrix, DMatrix::from_element(1, 1, -0.5));
        assert_eq!(b.matrix, DMatrix::from_element(1, 1, 0.5));
        assert_eq!(a.num_qubits(), Some(0));
    }

    #[test]
    fn even_n_dimensions() {
        for n in [2u32, 4, 6, 8] {
            let (a, b) = build_blocks(&ModelParams::standard(n).unwrap()).unwrap();
            assert_eq!(a.dim() + b.dim(), n as usize + 1);
            assert_eq!(a.dim(), b.dim() + 1);
        }
    }

    #[test]
    fn diagonal_with_scattering_term() {
        let p = ModelParams::new(5, 1.3, 0.4, 0.2).unwrap();
        let (a, b) = build_blocks(&p).unwrap();
        let j = 2.5;
        for blk in [&a, &b] {
            for (i, m) in blk.m_values.iter().enumerate() {
                let m = m.value();
                assert_abs_diff_eq!(blk.matrix[(i, i)], 1.3 * m + 0.2 * (j * (j + 1.0) - m * m), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn trace_sum_over_blocks() {
        // sum over m of W (j(j+1) - m^2) = W N (N+1) (N+2) / 6
        for n in 1u32..=9 {
            for w in [0.0, 0.3, -0.7] {
                let p = ModelParams::new(n, 1.0, 0.5, w).unwrap();
                let (a, b) = build_blocks(&p).unwrap();
                let nf = n as f64;
                let expected = w * nf * (nf + 1.0) * (nf + 2.0) / 6.0;
                assert_abs_diff_eq!(a.matrix.trace() + b.matrix.trace(), expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn square_of_n3_block() {
        let (a, _) = build_blocks(&ModelParams::standard(3).unwrap()).unwrap();
        let sq = square_block(&a);
        // (H^2)_00 = 1.5^2 + 0.75, (H^2)_11 = 0.75 + 0.25
        assert_abs_diff_eq!(sq[(0, 0)], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq[(1, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq[(0, 1)], 0.866, epsilon = 1e-3);
        assert_abs_diff_eq!(sq[(1, 0)], sq[(0, 1)], epsilon = 1e-15);
    }

    #[test]
    fn square_of_n7_block_matches_printed() {
        let (a, _) = build_blocks(&ModelParams::standard(7).unwrap()).unwrap();
        let sq = square_block(&a);
        #[rustfmt::skip]
        let printed = DMatrix::from_row_slice(4, 4, &[
            17.498681, 11.455, 8.873043, 0.0,
            11.455, 22.49881, 3.873, 12.990042,
            8.873043, 3.873, 26.499445, -10.062,
            0.0, 12.990042, -10.062, 17.499316,
        ]);
        assert_abs_diff_eq!(sq, printed, epsilon = 2e-3);
    }

    #[test]
    fn one_by_one_square() {
        let blk = QuasispinBlock {
            j: h(1),
            m_values: vec![h(1)],
            matrix: DMatrix::from_element(1, 1, -3.0),
            parity: Parity::B,
        };
        assert_eq!(square_block(&blk)[(0, 0)], 9.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0, 1.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(3, 0.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(3, -1.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(3, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn blocks_are_symmetric_with_m_step_two() {
        for n in 1u32..=12 {
            let (a, b) = build_blocks(&ModelParams::new(n, 1.0, 0.8, 0.1).unwrap()).unwrap();
            for blk in [a, b] {
                assert!(blk.m_values.windows(2).all(|w| w[1].twice() - w[0].twice() == 4));
                assert!((&blk.matrix - blk.matrix.transpose()).amax() < 1e-12);
            }
        }
    }
}
