//! Pauli strings in symplectic form.
//!
//! A string on `n` qubits is stored as two bit masks (bit `q` is qubit `q`)
//! plus a phase `i^p`. The single-qubit factor for bits `(x, z)` is the
//! Hermitian Pauli `i^{xz} X^x Z^z`, so `(1, 1)` is `Y` and products only ever
//! move the integer phase exponent.
//!
//! Qubit 0 is the leftmost tensor factor: in dense matrices and state vectors
//! it corresponds to the most significant bit of the basis index.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Matrix, Result, C64};

/// Largest register a Pauli string may act on.
pub const MAX_QUBITS: usize = 64;

/// Largest string that [`PauliString::to_matrix`] will densify.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Position in the `I, X, Y, Z` ordering used by basis indices.
    pub fn digit(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_digit(digit: usize) -> Self {
        match digit & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Exponent `p` such that `σ(x1,z1) σ(x2,z2) = i^p σ(x1^x2, z1^z2)`.
fn product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

/// `i^p` for `p` in `0..4`.
pub fn phase_value(p: u8) -> C64 {
    match p & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Signed Pauli string `i^phase ⊗_q σ(x_q, z_q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Unsupported(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let mask = low_mask(n);
        if (x | z) & !mask != 0 {
            return Err(Error::InvalidArgument(format!(
                "bits set outside {n} qubits"
            )));
        }
        Ok(Self {
            n,
            x,
            z,
            phase: phase & 3,
        })
    }

    /// The string acting as `p` on qubit `q` and identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        let (x, z) = p.bits();
        Self::new(n, (x as u64) << q, (z as u64) << q, 0)
    }

    /// Phase-free string number `index` in the `I, X, Y, Z` base-4 ordering,
    /// qubit 0 being the most significant digit. Index 0 is the identity.
    pub fn from_index(n: usize, index: usize) -> Self {
        let mut s = Self::identity(n);
        for q in 0..n {
            let digit = (index >> (2 * (n - 1 - q))) & 3;
            let (x, z) = Pauli::from_digit(digit).bits();
            s.x |= (x as u64) << q;
            s.z |= (z as u64) << q;
        }
        s
    }

    /// Inverse of [`PauliString::from_index`]; the phase is ignored.
    pub fn index(&self) -> usize {
        (0..self.n).fold(0, |acc, q| (acc << 2) | self.letter(q).digit())
    }

    /// All `4^n` phase-free strings in index order.
    pub fn all(n: usize) -> Vec<Self> {
        (0..1usize << (2 * n)).map(|i| Self::from_index(n, i)).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Exponent `p` of the `i^p` prefactor.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> C64 {
        phase_value(self.phase)
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self {
            phase: phase & 3,
            ..self.clone()
        }
    }

    /// Same string with phase `+1`.
    pub fn unsigned(&self) -> Self {
        self.with_phase(0)
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn is_identity_string(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| (self.x | self.z) >> q & 1 == 1).collect()
    }

    /// Exact product `self · other`, phase included.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "composing {}-qubit and {}-qubit strings",
                self.n, other.n
            )));
        }
        let mut p = self.phase as i32 + other.phase as i32;
        for q in 0..self.n {
            let bit = |m: u64| (m >> q) & 1 == 1;
            p += product_phase(bit(self.x), bit(self.z), bit(other.x), bit(other.z));
        }
        Ok(Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: p.rem_euclid(4) as u8,
        })
    }

    /// Symplectic test: strings commute iff `x_P·z_Q + z_P·x_Q` is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "comparing {}-qubit and {}-qubit strings",
                self.n, other.n
            )));
        }
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Bit mask over dense basis indices (qubit 0 is the top bit).
    pub(crate) fn basis_mask(mask: u64, n: usize) -> usize {
        (0..n).fold(0usize, |acc, q| acc | ((((mask >> q) & 1) as usize) << (n - 1 - q)))
    }

    /// Column-wise sparse form: column `c` has its single nonzero at row
    /// `c ^ flip`, with value `values[c]`.
    pub fn monomial(&self) -> PauliMonomial {
        let dim = 1usize << self.n;
        let flip = Self::basis_mask(self.x, self.n);
        let zmask = Self::basis_mask(self.z, self.n);
        let base = self.phase as u32 + self.y_count();
        let values = (0..dim)
            .map(|c| {
                let sign = ((zmask & c).count_ones() % 2) * 2;
                phase_value(((base + sign) % 4) as u8)
            })
            .collect();
        PauliMonomial { flip, values }
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> Matrix {
        assert!(
            self.n <= MAX_DENSE_QUBITS,
            "dense Pauli matrices limited to {MAX_DENSE_QUBITS} qubits"
        );
        let mono = self.monomial();
        let dim = 1usize << self.n;
        let mut m = Matrix::zeros(dim, dim);
        for c in 0..dim {
            m[(c ^ mono.flip, c)] = mono.values[c];
        }
        m
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A Pauli matrix stored as a signed permutation (one nonzero per column).
#[derive(Clone, Debug)]
pub struct PauliMonomial {
    pub flip: usize,
    pub values: Vec<C64>,
}

impl PauliMonomial {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Entry `[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        if row == col ^ self.flip {
            self.values[col]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `P · A`.
    pub fn left_mul(&self, a: &Matrix) -> Matrix {
        let d = self.dim();
        let mut out = Matrix::zeros(d, a.ncols());
        for r in 0..d {
            // row r of P has its nonzero in column r ^ flip
            let c = r ^ self.flip;
            let v = self.values[c];
            for j in 0..a.ncols() {
                out[(r, j)] = v * a[(c, j)];
            }
        }
        out
    }

    /// `A · P`.
    pub fn right_mul(&self, a: &Matrix) -> Matrix {
        let d = self.dim();
        let mut out = Matrix::zeros(a.nrows(), d);
        for c in 0..d {
            let r = c ^ self.flip;
            let v = self.values[c];
            for i in 0..a.nrows() {
                out[(i, c)] = a[(i, r)] * v;
            }
        }
        out
    }

    /// `tr(P · A)`.
    pub fn trace_with(&self, a: &Matrix) -> C64 {
        (0..self.dim())
            .map(|c| self.values[c] * a[(c, c ^ self.flip)])
            .sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"±iXYZI..."`; sign and `i` are optional, the first letter is
    /// qubit 0.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut phase = 0u8;
        let mut rest = s;
        if let Some(r) = rest.strip_prefix('-') {
            phase = 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase += 1;
            rest = r;
        }
        let n = rest.chars().count();
        if n == 0 {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        if n > MAX_QUBITS {
            return Err(Error::Parse(format!("Pauli string longer than {MAX_QUBITS}")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in rest.chars().enumerate() {
            let p = match ch.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli letter {other:?} in {s:?}"))),
            };
            let (xb, zb) = p.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Self::new(n, x, z, phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("-iXZ").to_string(), "-iXZ");
        assert_eq!(p("XYZI").to_string(), "+XYZI");
        assert_eq!(p("+iY").phase_exponent(), 1);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn x_squared_is_identity() {
        let r = p("X").compose(&p("X")).unwrap();
        assert!(r.is_identity_string());
        assert_eq!(r.phase_exponent(), 0);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let r = p("X").compose(&p("Z")).unwrap();
        assert_eq!(r, p("-iY"));
    }

    #[test]
    fn two_qubit_product() {
        let r = p("XZ").compose(&p("ZZ")).unwrap();
        assert_eq!(r, p("-iYI"));
        let dense = p("XZ").to_matrix() * p("ZZ").to_matrix();
        assert!(max_diff(&dense, &r.to_matrix()) < 1e-15);
    }

    #[test]
    fn compose_rejects_mismatched_sizes() {
        assert!(matches!(p("X").compose(&p("XX")), Err(Error::Dimension(_))));
        assert!(p("X").commutes(&p("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(p("X").commutes(&p("X")).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XZ").commutes(&p("ZX")).unwrap());
        let a = p("XZ").to_matrix();
        let b = p("ZX").to_matrix();
        assert!(max_diff(&(&a * &b), &(&b * &a)) < 1e-15);
    }

    #[test]
    fn small_matrices() {
        assert!(max_diff(&p("I").to_matrix(), &Matrix::identity(2, 2)) < 1e-15);
        let z = p("Z").to_matrix();
        assert_eq!(z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], C64::new(-1.0, 0.0));
        let y = p("Y").to_matrix();
        assert_eq!(y[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], C64::new(0.0, 1.0));
        // X⊗Z: off-diagonal 2×2 blocks diag(1,-1)
        let xz = p("XZ").to_matrix();
        assert_eq!(xz[(0, 2)], C64::new(1.0, 0.0));
        assert_eq!(xz[(1, 3)], C64::new(-1.0, 0.0));
        assert_eq!(xz[(2, 0)], C64::new(1.0, 0.0));
        assert_eq!(xz[(3, 1)], C64::new(-1.0, 0.0));
        assert_eq!(xz[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn index_round_trip_and_order() {
        assert_eq!(PauliString::from_index(2, 0), PauliString::identity(2));
        assert_eq!(PauliString::from_index(2, 1), p("IX"));
        assert_eq!(PauliString::from_index(2, 4), p("XI"));
        assert_eq!(PauliString::from_index(2, 15), p("ZZ"));
        for i in 0..64 {
            assert_eq!(PauliString::from_index(3, i).index(), i);
        }
    }

    #[test]
    fn trace_orthogonality() {
        let all = PauliString::all(2);
        for a in &all {
            for b in &all {
                let t = (a.to_matrix().adjoint() * b.to_matrix()).trace();
                let expect = if a == b { 4.0 } else { 0.0 };
                assert!((t - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hermitian_strings_square_to_identity() {
        for s in PauliString::all(2) {
            let sq = s.compose(&s).unwrap();
            assert!(sq.is_identity_string());
            assert_eq!(sq.phase_exponent(), 0);
            let m = s.to_matrix();
            assert!(max_diff(&m, &m.adjoint()) < 1e-15);
        }
    }

    #[test]
    fn monomial_products_match_dense() {
        let s = p("-YX");
        let a = Matrix::from_fn(4, 4, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let mono = s.monomial();
        let m = s.to_matrix();
        assert!(max_diff(&mono.left_mul(&a), &(&m * &a)) < 1e-14);
        assert!(max_diff(&mono.right_mul(&a), &(&a * &m)) < 1e-14);
        assert!((mono.trace_with(&a) - (&m * &a).trace()).norm() < 1e-12);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        let mask = (1u64 << n) - 1;
        (any::<u64>(), any::<u64>(), 0u8..4)
            .prop_map(move |(x, z, ph)| PauliString::new(n, x & mask, z & mask, ph).unwrap())
    }

    proptest! {
        #[test]
        fn commutes_matches_dense(a in arb_pauli(3), b in arb_pauli(3)) {
            let (ma, mb) = (a.to_matrix(), b.to_matrix());
            let comm = max_diff(&(&ma * &mb), &(&mb * &ma)) < 1e-12;
            prop_assert_eq!(a.commutes(&b).unwrap(), comm);
        }

        #[test]
        fn compose_is_exact(a in arb_pauli(3), b in arb_pauli(3)) {
            let prod = a.compose(&b).unwrap();
            prop_assert!(max_diff(&(a.to_matrix() * b.to_matrix()), &prod.to_matrix()) < 1e-14);
        }
    }
}
