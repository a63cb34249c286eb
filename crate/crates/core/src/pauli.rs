//! Pauli strings and the Hermitian matrix <-> weighted Pauli sum encoding.
//!
//! Qubit 0 is the most significant bit of a basis-state index, i.e. the
//! matrix of `P0 P1 ... P(n-1)` is `kron(P0, P1, ..., P(n-1))`. Under this
//! ordering the N = 7 block encodes with `Z0 = -2`, `Z1 = -1` and a
//! `Z0X1` cross term.
//!
//! Text form lists the non-identity factors in ascending qubit order with
//! their qubit index as suffix (`Z0X1`); the all-identity string is `I`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::format::sig;
use crate::{Error, Result};

/// Coefficients below this magnitude are dropped from sums.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance on `M - M^dagger` accepted by [`decompose`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Bit of a basis index that carries `qubit` in an `num_qubits` register.
pub fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    debug_assert!(qubit < num_qubits);
    1 << (num_qubits - 1 - qubit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// `self * other = phase * result`.
    pub fn product(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    /// Action on a single computational basis bit: `P|bit> = phase |bit'>`.
    fn act(self, bit: bool) -> (Complex64, bool) {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Pauli::I => (one, bit),
            Pauli::X => (one, !bit),
            Pauli::Y => {
                if bit {
                    (-Complex64::i(), false)
                } else {
                    (Complex64::i(), true)
                }
            }
            Pauli::Z => (if bit { -one } else { one }, bit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    /// `labels[q]` acts on qubit `q`.
    pub fn new(labels: Vec<Pauli>) -> Self {
        Self { labels }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self { labels: vec![Pauli::I; num_qubits] }
    }

    /// Builds a string from `(qubit, pauli)` factors; unspecified qubits get
    /// the identity.
    pub fn from_factors(num_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut labels = vec![Pauli::I; num_qubits];
        for &(q, p) in factors {
            if q >= num_qubits {
                return Err(Error::QubitMismatch { expected: num_qubits, got: q + 1 });
            }
            labels[q] = p;
        }
        Ok(Self { labels })
    }

    /// The string whose base-4 digits (qubit 0 most significant) are `index`.
    pub fn from_index(num_qubits: usize, mut index: usize) -> Self {
        let mut labels = vec![Pauli::I; num_qubits];
        for q in (0..num_qubits).rev() {
            labels[q] = Pauli::ALL[index % 4];
            index /= 4;
        }
        Self { labels }
    }

    /// Parses the `Z0X1` text form. `num_qubits` must cover every index.
    pub fn parse(text: &str, num_qubits: usize) -> Result<Self> {
        let err = |detail: String| Error::Parse { what: "Pauli string", detail };
        let text = text.trim();
        if text == "I" {
            return Ok(Self::identity(num_qubits));
        }
        let mut labels = vec![Pauli::I; num_qubits];
        let mut chars = text.chars().peekable();
        if chars.peek().is_none() {
            return Err(err("empty".into()));
        }
        while let Some(c) = chars.next() {
            let pauli = Pauli::from_symbol(c).ok_or_else(|| err(format!("unexpected '{c}' in {text}")))?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let q: usize = digits.parse().map_err(|_| err(format!("missing qubit index after '{c}' in {text}")))?;
            if q >= num_qubits {
                return Err(Error::QubitMismatch { expected: num_qubits, got: q + 1 });
            }
            if labels[q] != Pauli::I {
                return Err(err(format!("qubit {q} repeated in {text}")));
            }
            labels[q] = pauli;
        }
        Ok(Self { labels })
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.labels[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    /// Basis-index bits on which the string acts non-trivially.
    pub fn support_mask(&self) -> usize {
        let n = self.num_qubits();
        self.labels.iter().enumerate().filter(|(_, &p)| p != Pauli::I).fold(0, |m, (q, _)| m | qubit_mask(n, q))
    }

    /// `P|col> = phase |row>`.
    pub fn apply_to_basis(&self, col: usize) -> (Complex64, usize) {
        let n = self.num_qubits();
        let mut phase = Complex64::new(1.0, 0.0);
        let mut row = col;
        for (q, &p) in self.labels.iter().enumerate() {
            let mask = qubit_mask(n, q);
            let (ph, bit) = p.act(col & mask != 0);
            phase *= ph;
            if bit {
                row |= mask;
            } else {
                row &= !mask;
            }
        }
        (phase, row)
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (phase, row) = self.apply_to_basis(col);
            m[(row, col)] = phase;
        }
        m
    }

    /// `self * other = phase * string`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::QubitMismatch { expected: self.num_qubits(), got: other.num_qubits() });
        }
        let mut phase = Complex64::new(1.0, 0.0);
        let labels = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| {
                let (ph, p) = a.product(b);
                phase *= ph;
                p
            })
            .collect();
        Ok((phase, PauliString { labels }))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        for (q, p) in self.labels.iter().enumerate() {
            if *p != Pauli::I {
                write!(f, "{}{}", p.symbol(), q)?;
            }
        }
        Ok(())
    }
}

/// A Hermitian operator as a real-weighted sum of Pauli strings.
///
/// Terms are kept sorted (qubit 0 varies slowest, `I < X < Y < Z`), free of
/// duplicates, and pruned below [`PRUNE_THRESHOLD`].
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn zero(num_qubits: usize) -> Self {
        Self { num_qubits, terms: Vec::new() }
    }

    /// Merges duplicate strings and prunes near-zero coefficients.
    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut acc: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, s) in terms {
            if s.num_qubits() != num_qubits {
                return Err(Error::QubitMismatch { expected: num_qubits, got: s.num_qubits() });
            }
            *acc.entry(s).or_insert(0.0) += c;
        }
        let terms = acc.into_iter().filter(|(_, c)| c.abs() >= PRUNE_THRESHOLD).map(|(s, c)| (c, s)).collect();
        Ok(Self { num_qubits, terms })
    }

    /// Convenience constructor from text labels, e.g. `[(-0.5, "I"), (-1.0, "Z0")]`.
    pub fn from_labels(num_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed =
            terms.iter().map(|&(c, s)| Ok((c, PauliString::parse(s, num_qubits)?))).collect::<Result<Vec<_>>>()?;
        Self::from_terms(num_qubits, parsed)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().find(|(_, s)| s.is_identity()).map_or(0.0, |(c, _)| *c)
    }

    /// Coefficient of the string with text form `label`, zero if absent.
    pub fn coefficient(&self, label: &str) -> Result<f64> {
        let s = PauliString::parse(label, self.num_qubits)?;
        Ok(self.terms.iter().find(|(_, t)| *t == s).map_or(0.0, |(c, _)| *c))
    }

    /// Non-identity terms, in order.
    pub fn measured_terms(&self) -> impl Iterator<Item = &(f64, PauliString)> {
        self.terms.iter().filter(|(_, s)| !s.is_identity())
    }

    /// Dense matrix `sum_i beta_i P_i`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            for col in 0..dim {
                let (phase, row) = s.apply_to_basis(col);
                m[(row, col)] += phase * *c;
            }
        }
        m
    }

    /// Real part of [`reconstruct`](Self::reconstruct); exact whenever the
    /// sum contains an even number of `Y` factors in every term.
    pub fn reconstruct_real(&self) -> DMatrix<f64> {
        self.reconstruct().map(|z| z.re)
    }

    /// Symbolic product using single-qubit Pauli algebra.
    pub fn multiply(&self, other: &PauliSum) -> Result<ComplexPauliSum> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        let mut products = Vec::with_capacity(self.len() * other.len());
        for (a, sa) in &self.terms {
            for (b, sb) in &other.terms {
                let (phase, s) = sa.multiply(sb)?;
                products.push((phase * (a * b), s));
            }
        }
        ComplexPauliSum::from_terms(self.num_qubits, products)
    }

    /// `self * self`, which is Hermitian and therefore real-weighted.
    pub fn square(&self) -> Result<PauliSum> {
        self.multiply(self)?.into_real(1e-10)
    }

    /// One `<coeff> <string>` line per term, coefficients at 9 significant
    /// digits.
    pub fn to_text(&self) -> String {
        self.terms.iter().map(|(c, s)| format!("{} {}\n", sig(*c), s)).collect()
    }

    /// Parses the [`to_text`](Self::to_text) format. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse_text(text: &str, num_qubits: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff, label) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse { what: "Pauli sum line", detail: line.to_string() })?;
            let coeff: f64 =
                coeff.parse().map_err(|_| Error::Parse { what: "Pauli coefficient", detail: coeff.to_string() })?;
            terms.push((coeff, PauliString::parse(label, num_qubits)?));
        }
        Self::from_terms(num_qubits, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Result of multiplying Pauli sums before Hermiticity is established.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPauliSum {
    num_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl ComplexPauliSum {
    fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (c, s) in terms {
            if s.num_qubits() != num_qubits {
                return Err(Error::QubitMismatch { expected: num_qubits, got: s.num_qubits() });
            }
            *acc.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms = acc.into_iter().filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD).map(|(s, c)| (c, s)).collect();
        Ok(Self { num_qubits, terms })
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    /// Coefficient of `label`, zero if absent.
    pub fn coefficient(&self, label: &str) -> Result<Complex64> {
        let s = PauliString::parse(label, self.num_qubits)?;
        Ok(self.terms.iter().find(|(_, t)| *t == s).map_or(Complex64::new(0.0, 0.0), |(c, _)| *c))
    }

    /// Drops imaginary parts, failing if any exceeds `tolerance`.
    pub fn into_real(self, tolerance: f64) -> Result<PauliSum> {
        if let Some((c, s)) = self.terms.iter().find(|(c, _)| c.im.abs() > tolerance) {
            return Err(Error::ComplexCoefficient { label: s.to_string(), im: c.im });
        }
        PauliSum::from_terms(self.num_qubits, self.terms.into_iter().map(|(c, s)| (c.re, s)))
    }
}

/// `beta_i = tr(P_i M) / 2^m` for all `4^m` strings.
pub fn decompose(matrix: &DMatrix<Complex64>) -> Result<PauliSum> {
    let dim = matrix.nrows();
    if matrix.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: matrix.ncols() });
    }
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let deviation = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(deviation));
    }
    let num_qubits = dim.trailing_zeros() as usize;
    let terms = (0..1usize << (2 * num_qubits)).map(|index| {
        let s = PauliString::from_index(num_qubits, index);
        // tr(P M) = sum_c <row|P|c> M[c, row] where P|c> = phase |row>
        let trace: Complex64 = (0..dim)
            .map(|col| {
                let (phase, row) = s.apply_to_basis(col);
                phase * matrix[(col, row)]
            })
            .sum();
        (trace.re / dim as f64, s)
    });
    PauliSum::from_terms(num_qubits, terms)
}

/// [`decompose`] for real symmetric input.
pub fn decompose_real(matrix: &DMatrix<f64>) -> Result<PauliSum> {
    decompose(&matrix.map(|x| Complex64::new(x, 0.0)))
}
