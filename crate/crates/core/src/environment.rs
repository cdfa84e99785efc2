//! Environment tensors of single gates and their horizontal Pauli expansion.
//!
//! The rank-4 tensor `E[i1, o1, i2, o2]` is stored as the `d² × d²` matrix
//!
//! ```text
//! K[(o2, i2), (o1, i1)] = E[i1, o1, i2, o2],   flat index (o, i) = o·d + i
//! ```
//!
//! so that with `u = vec(U)`, `u[(o, i)] = U[o, i]`,
//!
//! ```text
//! contract(E, A, B) = Σ E[i1,o1,i2,o2] A[o1,i1] B[i2,o2] = vec(Bᵀ)ᵀ K vec(A)
//! f(U) = contract(E, U, U†) = u† K u.
//! ```
//!
//! Hermiticity of `K` is the reflection symmetry
//! `E[i1,o1,i2,o2] = conj(E[i2,o2,i1,o1])`.
//!
//! In the horizontal Pauli basis `K = (1/d) Σ e_ij σ_i ⊗ σ_jᵀ`, which gives
//! `f(U) = (1/d) Σ e_ij tr(σ_i U σ_j U†)`. Pairs with exactly one identity
//! never affect `f` on unitaries and are called non-measurable.

use std::io::{Read, Write};

use nalgebra::{DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{group_outcome_values, rotate_to_basis, Circuit, ShotSampler, StateVector};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{PauliMonomial, PauliString};
use crate::{par, Error, Matrix, Result, C64};

const BINARY_MAGIC: &[u8; 8] = b"QLTENV01";

/// Largest gate size accepted by the dense environment routines.
pub const MAX_ENV_QUBITS: usize = 3;

/// Index convention written into serialized tensors.
pub const CONVENTION: &str =
    "K[(o2*d+i2),(o1*d+i1)] = E[i1,o1,i2,o2]; f(U) = vec(U)^H K vec(U), vec(U)[o*d+i] = U[o,i]";

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Row-major vectorization `u[o·d + i] = U[o, i]`.
pub fn vectorize(u: &Matrix) -> DVector<C64> {
    let d = u.nrows();
    DVector::from_fn(d * u.ncols(), |r, _| u[(r / d, r % d)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<C64>, d: usize) -> Matrix {
    Matrix::from_fn(d, d, |o, i| v[o * d + i])
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentTensor {
    k: usize,
    mat: Matrix,
}

impl EnvironmentTensor {
    /// Wraps a `d² × d²` matrix in the documented convention.
    pub fn from_matrix(k: usize, mat: Matrix) -> Result<Self> {
        if k == 0 || k > MAX_ENV_QUBITS {
            return Err(Error::Unsupported(format!("environment of a {k}-qubit gate")));
        }
        let d2 = 1usize << (2 * k);
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::Dimension(format!("need {d2}×{d2} matrix")));
        }
        Ok(Self { k, mat })
    }

    pub fn zero(k: usize) -> Result<Self> {
        let d2 = 1usize << (2 * k);
        Self::from_matrix(k, Matrix::zeros(d2, d2))
    }

    /// `E[i1,o1,i2,o2] = δ_{i1 i2} δ_{o1 o2}`, for which `f(U) = d` on
    /// unitaries.
    pub fn constant(k: usize) -> Result<Self> {
        let d2 = 1usize << (2 * k);
        Self::from_matrix(k, Matrix::identity(d2, d2))
    }

    /// Random Hermitian tensor with Gaussian entries.
    pub fn random_hermitian<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        let d2 = 1usize << (2 * k);
        let a = Matrix::from_fn(d2, d2, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        Self::from_matrix(k, (&a + a.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        1 << self.k
    }

    /// The vectorized `d² × d²` form.
    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// `E[i1, o1, i2, o2]`.
    pub fn entry(&self, i1: usize, o1: usize, i2: usize, o2: usize) -> C64 {
        let d = self.d();
        self.mat[(o2 * d + i2, o1 * d + i1)]
    }

    /// Largest `|K − K†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        crate::unitary::max_abs_diff(&self.mat, &self.mat.adjoint())
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            Err(Error::NonHermitian(defect))
        } else {
            Ok(())
        }
    }

    /// Frobenius norm of the vectorized form.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_k(other)?;
        Ok(Self { k: self.k, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_k(other)?;
        Ok(Self { k: self.k, mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { k: self.k, mat: &self.mat * C64::new(s, 0.0) }
    }

    fn same_k(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::Dimension(format!("k = {} vs k = {}", self.k, other.k)));
        }
        Ok(())
    }

    fn check_gate(&self, u: &Matrix) -> Result<()> {
        let d = self.d();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!("{}×{} gate for d = {d}", u.nrows(), u.ncols())));
        }
        Ok(())
    }

    /// `Σ E[i1,o1,i2,o2] A[o1,i1] B[i2,o2]`.
    pub fn contract(&self, a: &Matrix, b: &Matrix) -> Result<C64> {
        self.check_gate(a)?;
        self.check_gate(b)?;
        let va = vectorize(a);
        let vbt = vectorize(&b.transpose());
        Ok((vbt.transpose() * &self.mat * va)[(0, 0)])
    }

    /// `f(U) = contract(E, U, U†)`, real for Hermitian tensors.
    pub fn cost(&self, u: &Matrix) -> Result<f64> {
        self.check_gate(u)?;
        Ok(self.cost_unchecked(u))
    }

    pub(crate) fn cost_unchecked(&self, u: &Matrix) -> f64 {
        let v = vectorize(u);
        v.dotc(&(&self.mat * &v)).re
    }

    /// `G[o2, i2] = ∂f/∂conj(U[o2, i2]) = Σ E[i1,o1,i2,o2] U[o1,i1]`, so that
    /// `f(U + δ) − f(U) = 2 Re tr(G† δ) + O(δ²)`.
    pub fn gradient(&self, u: &Matrix) -> Result<Matrix> {
        self.check_gate(u)?;
        Ok(unvectorize(&(&self.mat * vectorize(u)), self.d()))
    }

    /// Horizontal coefficients `e_ij = tr((σ_i ⊗ σ_jᵀ) K) / d`.
    pub fn horizontal_decompose(&self) -> HorizontalCoefficients {
        let d = self.d();
        let nb = d * d;
        let monos: Vec<PauliMonomial> = PauliString::all(self.k).iter().map(|p| p.monomial()).collect();
        let e = par::map_range(nb * nb, |ij| {
            let (si, sj) = (&monos[ij / nb], &monos[ij % nb]);
            // A[(a,e),(b,c)] = σ_i[a,b] σ_j[c,e], nonzero for b = a^fi, c = e^fj
            let mut t = zero();
            for a in 0..d {
                let b = a ^ si.flip;
                for e_ in 0..d {
                    let c = e_ ^ sj.flip;
                    t += si.values[b] * sj.values[e_] * self.mat[(b * d + c, a * d + e_)];
                }
            }
            t / d as f64
        });
        HorizontalCoefficients { k: self.k, e }
    }

    /// Zeroes every pair with exactly one identity string.
    pub fn measurable_projection(&self) -> Self {
        let mut h = self.horizontal_decompose();
        h.zero_non_measurable();
        h.reconstruct()
    }

    /// Linear environment with the bra side fixed to `v`:
    /// `L[o,i] = conj(Σ E[i,o,i2,o2] conj(V[o2,i2]))`, so that
    /// `Re contract(E, U, V†) = Re tr(L† U)`.
    pub fn linear_environment(&self, v: &Matrix) -> Result<Matrix> {
        self.check_gate(v)?;
        let vv = vectorize(v);
        Ok(unvectorize(&(self.mat.adjoint() * vv), self.d()))
    }

    pub fn to_json(&self) -> Result<String> {
        let d2 = self.mat.nrows();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..d2).map(|r| (0..d2).map(|c| f(&self.mat[(r, c)])).collect()).collect()
        };
        let doc = TensorJson {
            k: self.k,
            d: self.d(),
            convention: CONVENTION.to_string(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TensorJson = serde_json::from_str(s)?;
        let d2 = 1usize << (2 * doc.k);
        if doc.d != 1 << doc.k || doc.re.len() != d2 || doc.im.len() != d2 {
            return Err(Error::Parse("tensor JSON has inconsistent sizes".into()));
        }
        let mut mat = Matrix::zeros(d2, d2);
        for r in 0..d2 {
            if doc.re[r].len() != d2 || doc.im[r].len() != d2 {
                return Err(Error::Parse(format!("tensor JSON row {r} has wrong length")));
            }
            for c in 0..d2 {
                mat[(r, c)] = C64::new(doc.re[r][c], doc.im[r][c]);
            }
        }
        Self::from_matrix(doc.k, mat)
    }

    /// Binary form: magic `QLTENV01`, `k` as u32 LE, then the `d⁴` entries of
    /// `K` row-major as `(re, im)` f64 LE pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.k as u32).to_le_bytes())?;
        let d2 = self.mat.nrows();
        for r in 0..d2 {
            for c in 0..d2 {
                let z = self.mat[(r, c)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("not an environment tensor file".into()));
        }
        let mut kb = [0u8; 4];
        r.read_exact(&mut kb)?;
        let k = u32::from_le_bytes(kb) as usize;
        if k == 0 || k > MAX_ENV_QUBITS {
            return Err(Error::Parse(format!("bad gate size {k}")));
        }
        let d2 = 1usize << (2 * k);
        let mut mat = Matrix::zeros(d2, d2);
        let mut buf = [0u8; 8];
        for row in 0..d2 {
            for col in 0..d2 {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf);
                r.read_exact(&mut buf)?;
                let im = f64::from_le_bytes(buf);
                mat[(row, col)] = C64::new(re, im);
            }
        }
        Self::from_matrix(k, mat)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    k: usize,
    d: usize,
    convention: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Coefficients `e_ij` of `K = (1/d) Σ e_ij σ_i ⊗ σ_jᵀ`, stored row-major over
/// `(i, j) ∈ [0, 4^k)²`. Index 0 is the identity string.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalCoefficients {
    k: usize,
    e: Vec<C64>,
}

impl HorizontalCoefficients {
    pub fn zero(k: usize) -> Self {
        let nb = 1usize << (2 * k);
        Self { k, e: vec![zero(); nb * nb] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of Pauli strings, `4^k`.
    pub fn basis_len(&self) -> usize {
        1 << (2 * self.k)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.e[i * self.basis_len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let nb = self.basis_len();
        self.e[i * nb + j] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.e
    }

    /// Largest imaginary part; zero up to rounding for Hermitian tensors.
    pub fn max_imag(&self) -> f64 {
        self.e.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Real parts, after checking the imaginary parts are below `tol`.
    pub fn real(&self, tol: f64) -> Result<Vec<f64>> {
        let im = self.max_imag();
        if im > tol {
            return Err(Error::NonHermitian(im));
        }
        Ok(self.e.iter().map(|z| z.re).collect())
    }

    pub fn zero_non_measurable(&mut self) {
        let nb = self.basis_len();
        for j in 1..nb {
            self.e[j] = zero();
            self.e[j * nb] = zero();
        }
    }

    /// `K = (1/d) Σ e_ij σ_i ⊗ σ_jᵀ`.
    pub fn reconstruct(&self) -> EnvironmentTensor {
        let d = 1usize << self.k;
        let nb = d * d;
        let monos: Vec<PauliMonomial> = PauliString::all(self.k).iter().map(|p| p.monomial()).collect();
        let mut mat = Matrix::zeros(nb, nb);
        for i in 0..nb {
            for j in 0..nb {
                let eij = self.e[i * nb + j];
                if eij == zero() {
                    continue;
                }
                let (si, sj) = (&monos[i], &monos[j]);
                let w = eij / d as f64;
                for a in 0..d {
                    let b = a ^ si.flip;
                    for e_ in 0..d {
                        let c = e_ ^ sj.flip;
                        mat[(a * d + e_, b * d + c)] += w * si.values[b] * sj.values[e_];
                    }
                }
            }
        }
        EnvironmentTensor { k: self.k, mat }
    }
}

/// Whether the pair `(i, j)` can influence `f` on unitaries.
pub fn is_measurable_pair(i: usize, j: usize) -> bool {
    (i == 0) == (j == 0)
}

/// Probe states `φ_{oi} = A_after · E_{oi} · ψ_before` of one gate slot, with
/// `E_{oi}` the matrix unit `|o⟩⟨i|`. The final state with gate `U` in the
/// slot is `Σ U[o, i] φ_{oi}`.
fn slot_probes(c: &Circuit, gate_index: usize) -> Result<(usize, Vec<StateVector>)> {
    let gate = c.gate(gate_index)?;
    let support = gate.support.clone();
    let k = support.len();
    if k == 0 || k > MAX_ENV_QUBITS {
        return Err(Error::Unsupported(format!("environment of a {k}-qubit gate")));
    }
    let d = 1usize << k;
    let before = c.run_range(StateVector::zero(c.n())?, 0..gate_index)?;
    let probes = par::map_range(d * d, |oi| {
        let (o, i) = (oi / d, oi % d);
        let mut unit = Matrix::zeros(d, d);
        unit[(o, i)] = C64::new(1.0, 0.0);
        let mut s = before.clone();
        s.apply(&unit, &support);
        c.run_range(s, gate_index + 1..c.len()).expect("sizes checked")
    });
    Ok((k, probes))
}

/// Exact environment of gate `gate_index`, from `d²` probe states:
/// `K[(o2,i2),(o1,i1)] = ⟨φ_{o2 i2}| H |φ_{o1 i1}⟩`.
pub fn exact_environment(c: &Circuit, h: &Hamiltonian, gate_index: usize) -> Result<EnvironmentTensor> {
    if c.n() != h.n() {
        return Err(Error::Dimension("circuit and Hamiltonian sizes differ".into()));
    }
    let (k, probes) = slot_probes(c, gate_index)?;
    let d2 = probes.len();
    let hphi = par::map_slice(&probes, |p| h.apply(p.amplitudes()));
    let entries = par::map_range(d2 * d2, |rc| {
        let (r, col) = (rc / d2, rc % d2);
        probes[r]
            .amplitudes()
            .iter()
            .zip(&hphi[col])
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
    });
    EnvironmentTensor::from_matrix(k, Matrix::from_row_slice(d2, d2, &entries))
}

/// Unitary `U = V_i V_j†` with `U σ_j U† = σ_i`, hence
/// `tr(σ_i U σ_j U†) = 2^k`. `V_p` diagonalizes `σ_p` to `Z ⊗ I…`.
pub fn maximizing_gate(pi: &PauliString, pj: &PauliString) -> Result<Matrix> {
    if pi.n() != pj.n() {
        return Err(Error::Dimension("strings of different size".into()));
    }
    if pi.is_identity_string() || pj.is_identity_string() {
        return Err(Error::InvalidArgument(
            "identity string has constant trace; no maximizer".into(),
        ));
    }
    let vi = z_diagonalizer(&pi.unsigned())?;
    let vj = z_diagonalizer(&pj.unsigned())?;
    Ok(vi * vj.adjoint())
}

/// Columns: `+1` eigenvectors of `σ` first, then `−1` eigenvectors.
fn z_diagonalizer(p: &PauliString) -> Result<Matrix> {
    let m = p.to_matrix();
    let d = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).expect("finite"));
    let mut v = Matrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        v.set_column(col, &eig.eigenvectors.column(src));
    }
    Ok(v)
}

/// Single-shot sampler for one gate slot: the measurement-rotated probe
/// states of every basis group are cached, so the rotated output state for
/// any gate `U` is a `d²`-term linear combination.
#[derive(Clone, Debug)]
pub struct SlotSampler {
    k: usize,
    n: usize,
    probs: Vec<f64>,
    /// `rotated[g][oi]` = group-`g` rotation of `φ_{oi}`.
    rotated: Vec<Vec<Vec<C64>>>,
    values: Vec<Vec<f64>>,
}

impl SlotSampler {
    pub fn new(c: &Circuit, h: &Hamiltonian, gate_index: usize) -> Result<Self> {
        if c.n() != h.n() {
            return Err(Error::Dimension("circuit and Hamiltonian sizes differ".into()));
        }
        let (k, probes) = slot_probes(c, gate_index)?;
        let n = c.n();
        let rotated = h
            .groups()
            .iter()
            .map(|g| {
                par::map_slice(&probes, |p| {
                    let mut a = p.amplitudes().to_vec();
                    rotate_to_basis(&mut a, n, &g.basis);
                    a
                })
            })
            .collect();
        Ok(Self {
            k,
            n,
            probs: h.probabilities().to_vec(),
            rotated,
            values: group_outcome_values(h),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn rotated_state(&self, g: usize, u: &Matrix) -> Vec<C64> {
        let d = 1usize << self.k;
        let mut out = vec![zero(); 1 << self.n];
        for o in 0..d {
            for i in 0..d {
                let w = u[(o, i)];
                if w == zero() {
                    continue;
                }
                for (x, p) in out.iter_mut().zip(&self.rotated[g][o * d + i]) {
                    *x += w * p;
                }
            }
        }
        out
    }

    fn check(&self, u: &Matrix) -> Result<()> {
        let d = 1usize << self.k;
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!("{}×{} gate for d = {d}", u.nrows(), u.ncols())));
        }
        Ok(())
    }

    /// Sampler for repeated shots with gate `u` in the slot.
    pub fn gate_sampler(&self, u: &Matrix) -> Result<ShotSampler> {
        self.check(u)?;
        let cdfs = (0..self.rotated.len())
            .map(|g| {
                let mut acc = 0.0;
                self.rotated_state(g, u)
                    .iter()
                    .map(|a| {
                        acc += a.norm_sqr();
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(ShotSampler::from_parts(self.probs.clone(), cdfs, self.values.clone()))
    }

    /// One shot with gate `u` in the slot; only the drawn group's state is
    /// formed.
    pub fn single_shot<R: Rng + ?Sized>(&self, u: &Matrix, rng: &mut R) -> Result<f64> {
        self.check(u)?;
        let g = crate::circuit::pick_group(&self.probs, rng);
        let weights: Vec<f64> = self.rotated_state(g, u).iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        let b = crate::circuit::sample_index(&weights, total, rng);
        Ok(self.values[g][b])
    }
}
