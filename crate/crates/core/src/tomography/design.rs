//! Design matrices, second moments and frame diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::counting::count_relevant;
use crate::environment::EnvironmentTensor;
use crate::tomography::basis::{Basis, RowKernel};
use crate::tomography::gateset::GateSet;
use crate::{par, Error, Result};

/// Relative singular-value cutoff of every pseudo-inverse.
pub const PINV_RTOL: f64 = 1e-10;

/// Singular values of `a` (descending) and, if `b` is given, the
/// minimum-norm least-squares solution of `a x ≈ b` with singular values
/// below `PINV_RTOL · s_max` dropped. Tall matrices are reduced by QR first.
pub(crate) fn pinv_solve(a: DMatrix<f64>, b: Option<DVector<f64>>) -> (Vec<f64>, Option<DVector<f64>>) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (Vec::new(), b.map(|_| DVector::zeros(n)));
    }
    let (r, rhs) = if m > n {
        let qr = a.qr();
        let rhs = b.map(|mut b| {
            qr.q_tr_mul(&mut b);
            b.rows(0, n).into_owned()
        });
        (qr.r(), rhs)
    } else {
        (a, b)
    };
    let svd = r.svd(true, true);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let smax = s.first().copied().unwrap_or(0.0);
    let sol = rhs.map(|b| {
        if smax == 0.0 {
            DVector::zeros(n)
        } else {
            svd.solve(&b, PINV_RTOL * smax).expect("singular vectors computed")
        }
    });
    (s, sol)
}

/// Rows are gates, columns the active basis elements (the measurable pairs
/// for the Pauli basis). `M[U, b] = contract(B_b, U, U†)`.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    k: usize,
    basis: Basis,
    columns: Vec<usize>,
    rows: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Basis indices of the stored columns.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    /// Full-length coordinates of `e` in this design's basis.
    pub fn coordinates(&self, e: &EnvironmentTensor) -> Result<Vec<f64>> {
        if e.k() != self.k {
            return Err(Error::Dimension(format!("k = {} tensor for k = {} design", e.k(), self.k)));
        }
        Ok(self.basis.pauli_to_basis(e.horizontal_decompose().real(1e-9)?))
    }

    /// Predicted costs `M v` for full-length coordinates `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let sub = DVector::from_iterator(self.columns.len(), self.columns.iter().map(|&c| v[c]));
        (&self.rows * sub).as_slice().to_vec()
    }

    /// Tensor with full-length coordinates `v` in this basis.
    pub(crate) fn tensor(&self, v: &[f64]) -> EnvironmentTensor {
        coefficients_to_tensor(self.k, &self.basis.to_pauli(v))
    }
}

/// Tensor from real Pauli-basis coordinates; non-measurable pairs are zeroed.
pub(crate) fn coefficients_to_tensor(k: usize, e: &[f64]) -> EnvironmentTensor {
    let nb = 1usize << (2 * k);
    let mut h = crate::environment::HorizontalCoefficients::zero(k);
    for (idx, &v) in e.iter().enumerate() {
        h.set(idx / nb, idx % nb, crate::C64::new(v, 0.0));
    }
    h.zero_non_measurable();
    h.reconstruct()
}

/// One row per gate of `gs`, in parallel.
pub fn build_design_matrix(gs: &GateSet, basis: &Basis) -> Result<DesignMatrix> {
    let k = gs.k();
    basis.check(k)?;
    let kern = RowKernel::new(k);
    let columns = basis.active_columns(k);
    let rows = par::map_slice(gs.gates(), |u| {
        let full = basis.pauli_to_basis(kern.row(u));
        columns.iter().map(|&c| full[c]).collect::<Vec<f64>>()
    });
    let m = DMatrix::from_row_iterator(rows.len(), columns.len(), rows.into_iter().flatten());
    Ok(DesignMatrix { k, basis: basis.clone(), columns, rows: m })
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignDiagnostics {
    pub n_rows: usize,
    /// `MᵀM` over the stored columns.
    #[serde(skip)]
    pub second_moment: DMatrix<f64>,
    /// `Tr[(MᵀM / N)⁺]`.
    pub trace_inv_pseudo: f64,
    /// Smallest and largest nonzero eigenvalues of `MᵀM`.
    pub frame_bounds: (f64, f64),
    pub rank: usize,
    /// Number of measurable components, `(4^k − 1)² + 1`.
    pub measurable_dim: usize,
    pub coverage_complete: bool,
}

impl DesignDiagnostics {
    pub fn normalized_second_moment(&self) -> DMatrix<f64> {
        &self.second_moment / self.n_rows as f64
    }

    /// `traceInvPseudo · σ̄² / N` for `n_shots` shots of variance `shot_variance`.
    pub fn predicted_variance(&self, shot_variance: f64, n_shots: u64) -> f64 {
        self.trace_inv_pseudo * shot_variance / n_shots as f64
    }
}

/// Second moment, pseudo-inverse trace and frame bounds of `m`.
pub fn design_diagnostics(m: &DesignMatrix) -> Result<DesignDiagnostics> {
    let n = m.n_rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty design matrix".into()));
    }
    let (s, _) = pinv_solve(m.rows.clone(), None);
    let smax = s.first().copied().unwrap_or(0.0);
    let kept: Vec<f64> = s.iter().copied().filter(|&v| v > PINV_RTOL * smax && v > 0.0).collect();
    let trace_inv_pseudo = kept.iter().map(|v| n as f64 / (v * v)).sum();
    let frame_bounds = (
        kept.last().map_or(0.0, |v| v * v),
        kept.first().map_or(0.0, |v| v * v),
    );
    let measurable_dim = count_relevant(m.k as u32) as usize;
    Ok(DesignDiagnostics {
        n_rows: n,
        second_moment: m.rows.transpose() * &m.rows,
        trace_inv_pseudo,
        frame_bounds,
        rank: kept.len(),
        measurable_dim,
        coverage_complete: kept.len() == measurable_dim,
    })
}

/// `(1/N²) Σ_{a,b} |tr(U_a† U_b)|⁴`, evaluated as `‖MᵀM‖²_F / N²` with the
/// Pauli-basis design, since `m_U · m_V = |tr(U†V)|²`.
pub fn frame_potential(gs: &GateSet) -> Result<f64> {
    if gs.is_empty() {
        return Err(Error::InvalidArgument("frame potential of an empty gate set".into()));
    }
    let m = build_design_matrix(gs, &Basis::Pauli)?;
    let g = m.rows.transpose() * &m.rows;
    let n = gs.len() as f64;
    Ok(g.iter().map(|x| x * x).sum::<f64>() / (n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::gateset::SamplingMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_frame_potential(gs: &GateSet) -> f64 {
        let n = gs.len() as f64;
        let mut acc = 0.0;
        for a in gs.gates() {
            for b in gs.gates() {
                acc += (a.adjoint() * b).trace().norm_sqr().powi(2);
            }
        }
        acc / (n * n)
    }

    #[test]
    fn frame_potential_small_sets() {
        assert!((frame_potential(&GateSet::identity(1)).unwrap() - 16.0).abs() < 1e-12);
        assert!((frame_potential(&GateSet::paulis(1)).unwrap() - 4.0).abs() < 1e-12);
        assert!((frame_potential(&GateSet::clifford_group(1).unwrap()).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn frame_potential_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gs = GateSet::haar(2, 25, &mut rng);
        let fast = frame_potential(&gs).unwrap();
        assert!((fast - brute_frame_potential(&gs)).abs() < 1e-9 * fast);
        assert!(fast >= 2.0);
    }

    #[test]
    fn identity_design_is_rank_one() {
        let m = build_design_matrix(&GateSet::identity(2), &Basis::Pauli).unwrap();
        assert_eq!(m.rows()[(0, 0)], 1.0);
        let d = design_diagnostics(&m).unwrap();
        assert_eq!(d.rank, 1);
        assert!(!d.coverage_complete);
        assert!((d.frame_bounds.0 - 16.0).abs() < 1e-9 && (d.frame_bounds.1 - 16.0).abs() < 1e-9);
    }

    #[test]
    fn pauli_set_rows_are_sign_patterns() {
        // tr(σ_i P σ_j P) / 2 = ±δ_ij
        let m = build_design_matrix(&GateSet::paulis(1), &Basis::Pauli).unwrap();
        let cols = m.columns().to_vec();
        for r in 0..4 {
            for (c, &idx) in cols.iter().enumerate() {
                let (i, j) = (idx / 4, idx % 4);
                let v = m.rows()[(r, c)];
                if i != j {
                    assert_eq!(v, 0.0);
                } else {
                    let commute = i == 0 || r == 0 || i == r;
                    assert!((v - if commute { 1.0 } else { -1.0 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn design_reproduces_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gs = GateSet::haar(2, 30, &mut rng).with_mode(SamplingMode::Uniform);
        let e = EnvironmentTensor::random_hermitian(2, &mut rng).unwrap();
        for basis in [Basis::Pauli, Basis::random_rotation(2, &mut rng).unwrap()] {
            let m = build_design_matrix(&gs, &basis).unwrap();
            let f = m.apply(&m.coordinates(&e).unwrap());
            for (u, fu) in gs.gates().iter().zip(&f) {
                assert!((e.cost(u).unwrap() - fu).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn one_qubit_clifford_moment_is_diagonal() {
        let m = build_design_matrix(&GateSet::clifford_group(1).unwrap(), &Basis::Pauli).unwrap();
        let d = design_diagnostics(&m).unwrap();
        let s = d.normalized_second_moment();
        for a in 0..10 {
            for b in 0..10 {
                let want = match (a, b) {
                    (0, 0) => 1.0,
                    _ if a == b => 1.0 / 3.0,
                    _ => 0.0,
                };
                assert!((s[(a, b)] - want).abs() < 1e-12);
            }
        }
        assert!((d.trace_inv_pseudo - 28.0).abs() < 1e-9);
        assert!(d.coverage_complete);
    }
}
