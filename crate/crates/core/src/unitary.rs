//! Dense unitary matrices: standard gates, Haar sampling, Kronecker products
//! and the polar factor.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Matrix, Result, C64};

/// Default tolerance for unitarity checks (Frobenius norm of `U†U − I`).
pub const UNITARY_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn phase_s() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

pub fn phase_sdg() -> Matrix {
    phase_s().adjoint()
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// CNOT with the control on the first (most significant) qubit.
pub fn cnot() -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

/// CNOT with the control on the second qubit.
pub fn cnot_reversed() -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(3, 1)] = c(1.0, 0.0);
    m[(2, 2)] = c(1.0, 0.0);
    m[(1, 3)] = c(1.0, 0.0);
    m
}

/// `exp(−iθX/2)`.
pub fn rx(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// `exp(−iθY/2)`.
pub fn ry(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

/// `exp(−iθZ/2)`.
pub fn rz(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix::from_row_slice(2, 2, &[c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)])
}

/// `a ⊗ b`, with `a` on the more significant qubits.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Lifts a gate acting on `support` (ordered, first entry most significant)
/// to an `n`-qubit matrix.
pub fn embed(gate: &Matrix, support: &[usize], n: usize) -> Result<Matrix> {
    let k = support.len();
    if gate.nrows() != 1 << k || gate.ncols() != 1 << k {
        return Err(Error::Dimension(format!(
            "gate of size {} on {k} qubits",
            gate.nrows()
        )));
    }
    for &q in support {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
    }
    let dim = 1usize << n;
    let sub = |idx: usize| -> usize {
        support
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    let mask: usize = support.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    Ok(Matrix::from_fn(dim, dim, |r, col| {
        if r & !mask != col & !mask {
            C64::new(0.0, 0.0)
        } else {
            gate[(sub(r), sub(col))]
        }
    }))
}

/// Haar-random `d × d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let z = Matrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Frobenius norm of `U†U − I`.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn is_unitary(u: &Matrix) -> bool {
    unitarity_defect(u) < UNITARY_TOL
}

/// Unitary factor `W V†` of the polar decomposition of `A = W Σ V†`.
pub fn polar_unitary(a: &Matrix) -> Matrix {
    let svd = a.clone().svd(true, true);
    let w = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    w * vt
}

/// Gate fidelity `|tr(V†U)|² / d²`.
pub fn gate_fidelity(u: &Matrix, v: &Matrix) -> f64 {
    let d = u.nrows() as f64;
    (v.adjoint() * u).trace().norm_sqr() / (d * d)
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Distance between `a` and `b` after removing the best global phase.
pub fn phase_distance(a: &Matrix, b: &Matrix) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let ph = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    max_abs_diff(a, &(b * ph))
}
