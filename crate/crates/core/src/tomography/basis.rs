//! Orthonormal column bases of the environment space and design rows.
//!
//! Environment matrices `K` live in the real vector space of Hermitian
//! `d² × d²` matrices with the pairing `⟨A, B⟩ = tr(A B)`. The Pauli basis is
//! `B_ij = (σ_i ⊗ σ_jᵀ) / d` with flat index `i·4^k + j`; the coordinates of
//! `K` in it are exactly the horizontal coefficients `e_ij`.
//!
//! The design row of a gate `U` holds the coordinates of the projector
//! `vec(U) vec(U)†`, i.e. `M[U, ij] = contract(B_ij, U, U†) = tr(σ_i U σ_j U†) / d`.
//! Rows of distinct gates satisfy `m_U · m_V = |tr(U† V)|²`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::environment::is_measurable_pair;
use crate::pauli::{PauliMonomial, PauliString};
use crate::{Error, Matrix, Result};

/// Tolerance of the orthonormality check on rotated bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    /// Normalized horizontal Pauli pairs, constant element first.
    Pauli,
    /// `B'_a = Σ_b R[b, a] B_b` for a real orthogonal `R` of size `16^k`.
    Rotated(DMatrix<f64>),
}

impl Basis {
    /// Rotated basis after checking `RᵀR = I` entrywise within
    /// [`ORTHONORMAL_TOL`].
    pub fn rotated(r: DMatrix<f64>) -> Result<Self> {
        if r.nrows() != r.ncols() {
            return Err(Error::Dimension(format!("{}×{} rotation", r.nrows(), r.ncols())));
        }
        let n = r.nrows();
        let defect = (r.transpose() * &r - DMatrix::<f64>::identity(n, n)).amax();
        if defect > ORTHONORMAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal (max defect {defect:.3e})"
            )));
        }
        Ok(Basis::Rotated(r))
    }

    /// Random rotation of the whole `16^k`-dimensional space (QR of a
    /// Gaussian matrix).
    pub fn random_rotation<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        let n = 1usize << (4 * k);
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        Basis::rotated(g.qr().q())
    }

    /// Number of columns for a `k`-qubit gate.
    pub fn len(k: usize) -> usize {
        1 << (4 * k)
    }

    pub(crate) fn check(&self, k: usize) -> Result<()> {
        if let Basis::Rotated(r) = self {
            if r.nrows() != Basis::len(k) {
                return Err(Error::Dimension(format!(
                    "rotation of size {} for k = {k}",
                    r.nrows()
                )));
            }
        }
        Ok(())
    }

    /// Columns that can be nonzero on unitaries: every column for a rotated
    /// basis, the measurable pairs for the Pauli basis.
    pub(crate) fn active_columns(&self, k: usize) -> Vec<usize> {
        match self {
            Basis::Pauli => measurable_columns(k),
            Basis::Rotated(_) => (0..Basis::len(k)).collect(),
        }
    }

    /// Pauli-basis coordinates of a vector given in this basis.
    pub(crate) fn to_pauli(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Basis::Pauli => v.to_vec(),
            Basis::Rotated(r) => (r * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec(),
        }
    }

    /// Converts a Pauli-basis row into this basis.
    pub(crate) fn pauli_to_basis(&self, row: Vec<f64>) -> Vec<f64> {
        match self {
            Basis::Pauli => row,
            Basis::Rotated(r) => (r.transpose() * nalgebra::DVector::from_vec(row)).as_slice().to_vec(),
        }
    }
}

/// Flat indices `i·4^k + j` of the measurable pairs, the constant pair first.
pub fn measurable_columns(k: usize) -> Vec<usize> {
    let nb = 1usize << (2 * k);
    (0..nb * nb).filter(|&c| is_measurable_pair(c / nb, c % nb)).collect()
}

/// Computes Pauli-basis design rows of `k`-qubit gates.
#[derive(Clone, Debug)]
pub(crate) struct RowKernel {
    k: usize,
    monos: Vec<PauliMonomial>,
}

impl RowKernel {
    pub fn new(k: usize) -> Self {
        let monos = PauliString::all(k).iter().map(|p| p.monomial()).collect();
        Self { k, monos }
    }

    /// Full row of length `16^k`; non-measurable entries are exactly zero.
    pub fn row(&self, u: &Matrix) -> Vec<f64> {
        let d = 1usize << self.k;
        let nb = d * d;
        let ud = u.adjoint();
        let mut row = vec![0.0; nb * nb];
        row[0] = 1.0;
        for j in 1..nb {
            let w = self.monos[j].right_mul(u) * &ud;
            for i in 1..nb {
                row[i * nb + j] = self.monos[i].trace_with(&w).re / d as f64;
            }
        }
        row
    }

    /// Row restricted to `columns`.
    pub fn masked_row(&self, u: &Matrix, columns: &[usize]) -> Vec<f64> {
        let full = self.row(u);
        columns.iter().map(|&c| full[c]).collect()
    }
}
