//! Least-squares reconstruction from shot batches.
//!
//! Shots on the same gate share a design row, so the per-shot problem
//! `min Σ_s (y_s − m_{g(s)}·v)²` is solved as the weighted problem over
//! unique gates with weights `n_g` and targets `ȳ_g`. Both have the same
//! normal equations and the same minimum-norm solution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::environment::EnvironmentTensor;
use crate::tomography::design::{pinv_solve, DesignMatrix, PINV_RTOL};
use crate::tomography::sampling::{ShotBatch, ShotMoments};
use crate::{Error, Result};

/// Above this many distinct gates the solve switches from QR/SVD of the
/// weighted design to accumulated normal equations.
pub const DENSE_GATE_LIMIT: usize = 20_000;

/// Relative eigenvalue cutoff on the normal-equation path.
pub const NORMAL_EQ_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    DenseSvd,
    NormalEquations,
    ClosedForm,
    Tableaux,
    LinearSquare,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub solver: Solver,
    /// `Tr[(MᵀWM / N)⁺]` of the shot-weighted design.
    pub trace_inv_pseudo: f64,
    /// Pooled single-shot variance `σ̄²` estimated from the data.
    pub shot_variance: f64,
    /// `traceInvPseudo · σ̄² / N`, the expected squared Frobenius error.
    pub predicted_variance: f64,
    pub rank: usize,
    pub measurable_dim: usize,
    pub coverage_complete: bool,
    /// Ratio of the largest to the smallest retained eigenvalue of the
    /// second moment.
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    #[serde(skip)]
    pub estimate: EnvironmentTensor,
    pub shots_used: u64,
    pub gates_used: usize,
    pub diagnostics: Diagnostics,
}

impl Reconstruction {
    /// Diagnostics and counts as JSON; the tensor itself goes through
    /// [`EnvironmentTensor::to_json`].
    pub fn diagnostics_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegressOptions {
    /// One design row per shot instead of per unique gate. Same estimate,
    /// much larger problem; kept for cross-checks.
    pub per_shot: bool,
}

/// Streaming accumulator of `A = Σ w m mᵀ`, `b = Σ w ȳ m` over rows.
#[derive(Clone, Debug)]
pub(crate) struct NormalEquations {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Pooled moments; the residual is `Σ y² − 2 vᵀb + vᵀAv`.
    pub moments: ShotMoments,
    pub gates: usize,
}

impl NormalEquations {
    pub fn new(dim: usize) -> Self {
        Self {
            a: DMatrix::zeros(dim, dim),
            b: DVector::zeros(dim),
            moments: ShotMoments::default(),
            gates: 0,
        }
    }

    /// Adds one gate's row with its shot moments.
    pub fn add(&mut self, row: &[f64], m: &ShotMoments) {
        if m.shots == 0 {
            return;
        }
        let w = m.shots as f64;
        let nz: Vec<(usize, f64)> = row.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        for &(i, vi) in &nz {
            self.b[i] += vi * m.sum;
            for &(j, vj) in &nz {
                self.a[(i, j)] += w * vi * vj;
            }
        }
        self.moments.merge(m);
        self.gates += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        self.a += &other.a;
        self.b += &other.b;
        self.moments.merge(&other.moments);
        self.gates += other.gates;
    }

    /// Pseudo-inverse solution with eigenvalues below
    /// `NORMAL_EQ_RTOL · λ_max` dropped, plus the retained eigenvalues.
    pub fn solve(&self) -> (DVector<f64>, Vec<f64>) {
        let n = self.b.len();
        let eig = SymmetricEigen::new(self.a.clone());
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut v = DVector::zeros(n);
        let mut kept = Vec::new();
        if lmax > 0.0 {
            for (idx, &l) in eig.eigenvalues.iter().enumerate() {
                if l > NORMAL_EQ_RTOL * lmax {
                    let q = eig.eigenvectors.column(idx);
                    v += q * (q.dot(&self.b) / l);
                    kept.push(l);
                }
            }
        }
        kept.sort_by(|a, b| b.total_cmp(a));
        (v, kept)
    }

    /// Residual sum of squares at `v`.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (self.moments.sum_sq - 2.0 * v.dot(&self.b) + v.dot(&(&self.a * v))).max(0.0)
    }
}

/// Assembles diagnostics from retained eigenvalues of `MᵀWM` (descending).
pub(crate) fn diagnostics_from_eigenvalues(
    solver: Solver,
    eig: &[f64],
    total_shots: u64,
    rss: f64,
    measurable_dim: usize,
) -> Diagnostics {
    let n = total_shots.max(1) as f64;
    let trace_inv_pseudo: f64 = eig.iter().map(|l| n / l).sum();
    let dof = (total_shots as f64 - eig.len() as f64).max(1.0);
    let shot_variance = rss / dof;
    Diagnostics {
        solver,
        trace_inv_pseudo,
        shot_variance,
        predicted_variance: trace_inv_pseudo * shot_variance / n,
        rank: eig.len(),
        measurable_dim,
        coverage_complete: eig.len() == measurable_dim,
        condition: match (eig.first(), eig.last()) {
            (Some(a), Some(b)) if *b > 0.0 => a / b,
            _ => f64::INFINITY,
        },
    }
}

/// `v = (MᵀM)⁺Mᵀφ` over the shots of `batch`, reconstructed and restricted
/// to the measurable subspace.
pub fn regress(m: &DesignMatrix, batch: &ShotBatch) -> Result<Reconstruction> {
    regress_with(m, batch, RegressOptions::default())
}

pub fn regress_with(m: &DesignMatrix, batch: &ShotBatch, opts: RegressOptions) -> Result<Reconstruction> {
    let n_gates = m.n_rows();
    if let Some(&(g, _)) = batch.samples.iter().find(|(g, _)| *g >= n_gates) {
        return Err(Error::InvalidArgument(format!("sample refers to gate {g} of {n_gates}")));
    }
    let measurable_dim = crate::counting::count_relevant(m.k() as u32) as usize;
    let full_len = crate::tomography::basis::Basis::len(m.k());
    let total = batch.len() as u64;
    if batch.is_empty() {
        return Ok(Reconstruction {
            estimate: EnvironmentTensor::zero(m.k())?,
            shots_used: 0,
            gates_used: 0,
            diagnostics: diagnostics_from_eigenvalues(Solver::DenseSvd, &[], 0, 0.0, measurable_dim),
        });
    }
    let ncol = m.columns().len();
    let moments = batch.moments(n_gates);
    let used: Vec<usize> = (0..n_gates).filter(|&g| moments[g].shots > 0).collect();

    let (sub, eig, rss, solver) = if opts.per_shot || used.len() <= DENSE_GATE_LIMIT {
        let (a, b) = if opts.per_shot {
            let a = DMatrix::from_fn(batch.len(), ncol, |r, c| m.rows()[(batch.samples[r].0, c)]);
            let b = DVector::from_iterator(batch.len(), batch.samples.iter().map(|s| s.1));
            (a, b)
        } else {
            let sw: Vec<f64> = used.iter().map(|&g| (moments[g].shots as f64).sqrt()).collect();
            let a = DMatrix::from_fn(used.len(), ncol, |r, c| sw[r] * m.rows()[(used[r], c)]);
            let b = DVector::from_iterator(used.len(), used.iter().zip(&sw).map(|(&g, w)| w * moments[g].mean()));
            (a, b)
        };
        let (s, v) = pinv_solve(a, Some(b));
        let v = v.expect("rhs given");
        let smax = s.first().copied().unwrap_or(0.0);
        let eig: Vec<f64> = s.iter().filter(|&&x| x > PINV_RTOL * smax && x > 0.0).map(|x| x * x).collect();
        // RSS = Σ_g [Σ y² − 2 ŷ Σ y + n ŷ²]
        let fitted = m.rows() * &v;
        let rss: f64 = used
            .iter()
            .map(|&g| {
                let (mo, yh) = (&moments[g], fitted[g]);
                mo.sum_sq - 2.0 * yh * mo.sum + mo.shots as f64 * yh * yh
            })
            .sum::<f64>()
            .max(0.0);
        (v, eig, rss, Solver::DenseSvd)
    } else {
        let mut ne = NormalEquations::new(ncol);
        for &g in &used {
            let row: Vec<f64> = m.rows().row(g).iter().copied().collect();
            ne.add(&row, &moments[g]);
        }
        let (v, eig) = ne.solve();
        let rss = ne.residual(&v);
        (v, eig, rss, Solver::NormalEquations)
    };

    let mut full = vec![0.0; full_len];
    for (c, &idx) in m.columns().iter().enumerate() {
        full[idx] = sub[c];
    }
    Ok(Reconstruction {
        estimate: m.tensor(&full),
        shots_used: total,
        gates_used: used.len(),
        diagnostics: diagnostics_from_eigenvalues(solver, &eig, total, rss, measurable_dim),
    })
}
