//! Minimization of `f(U) = u† K u` over the unitary group.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::environment::{unvectorize, vectorize, EnvironmentTensor};
use crate::unitary::{haar_random, identity, polar_unitary};
use crate::{par, Error, Matrix, Result, C64};

/// Hermiticity tolerance for environments handed to [`optimal_gate`].
pub const HERMITIAN_TOL: f64 = 1e-8;

/// `Re tr(L† U)`.
pub fn linear_cost(l: &Matrix, u: &Matrix) -> f64 {
    l.iter().zip(u.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Minimizer of `Re tr(L† U)` over unitaries: `U = −W V†` for `L = W Σ V†`,
/// reaching `−Σ σ_m`. Returns the identity and `true` when `L = 0`.
pub fn polar_minimizer(l: &Matrix) -> (Matrix, bool) {
    if l.iter().all(|v| v.norm() == 0.0) {
        return (identity(l.nrows()), true);
    }
    (polar_unitary(l) * C64::new(-1.0, 0.0), false)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOptMethod {
    #[default]
    AlternatingPolar,
    RiemannianGd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateOptConfig {
    pub method: GateOptMethod,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when one iteration lowers the cost by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for GateOptConfig {
    fn default() -> Self {
        Self {
            method: GateOptMethod::AlternatingPolar,
            restarts: 8,
            max_iters: 2000,
            tol: 1e-13,
            seed: 0,
        }
    }
}

impl GateOptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument("tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GateOptResult {
    pub u: Matrix,
    pub cost: f64,
    /// Iterations of the winning run.
    pub iterations: usize,
    /// Index of the winning start; the warm start, if any, is index 0.
    pub start: usize,
}

/// Riemannian gradient `G − U G† U` of `f` at `U`, with `G = K u` reshaped.
pub fn riemannian_gradient(e: &EnvironmentTensor, u: &Matrix) -> Result<Matrix> {
    let g = e.gradient(u)?;
    Ok(&g - u * g.adjoint() * u)
}

struct Problem<'a> {
    e: &'a EnvironmentTensor,
    /// `K − λ_max I`, negative semidefinite.
    shifted: Matrix,
    /// Spectral width of `K`, the scale of every step.
    width: f64,
}

impl<'a> Problem<'a> {
    fn new(e: &'a EnvironmentTensor) -> Self {
        let k = e.matrix();
        let eig = SymmetricEigen::new(k.clone()).eigenvalues;
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let n = k.nrows();
        let shifted = k - Matrix::identity(n, n) * C64::new(hi, 0.0);
        Self { e, shifted, width: (hi - lo).max(f64::MIN_POSITIVE) }
    }

    fn cost(&self, u: &Matrix) -> f64 {
        self.e.cost_unchecked(u)
    }

    /// One majorize-minimize step: `u† K' u` is concave, so minimizing its
    /// tangent plane over unitaries never increases `f`.
    fn polar_step(&self, u: &Matrix) -> Matrix {
        let l = unvectorize(&(&self.shifted * vectorize(u)), u.nrows());
        polar_minimizer(&l).0
    }

    /// Backtracking step along the Riemannian gradient, retracted by polar
    /// decomposition.
    fn gd_step(&self, u: &Matrix, f: f64, eta: &mut f64) -> Matrix {
        let grad = riemannian_gradient(self.e, u).expect("dimension checked");
        let gn = grad.norm_squared();
        if gn == 0.0 {
            return u.clone();
        }
        for _ in 0..60 {
            let cand = polar_unitary(&(u - &grad * C64::new(*eta, 0.0)));
            if self.cost(&cand) <= f - 0.25 * *eta * gn {
                *eta *= 2.0;
                return cand;
            }
            *eta *= 0.5;
        }
        u.clone()
    }

    fn run(&self, start: Matrix, cfg: &GateOptConfig) -> (Matrix, f64, usize) {
        let mut u = start;
        let mut f = self.cost(&u);
        let mut eta = 0.5 / self.width;
        for it in 1..=cfg.max_iters {
            let next = match cfg.method {
                GateOptMethod::AlternatingPolar => self.polar_step(&u),
                GateOptMethod::RiemannianGd => self.gd_step(&u, f, &mut eta),
            };
            let fn_ = self.cost(&next);
            if fn_ > f {
                return (u, f, it);
            }
            let gain = f - fn_;
            u = next;
            f = fn_;
            if gain < cfg.tol {
                return (u, f, it);
            }
        }
        (u, f, cfg.max_iters)
    }
}

/// Minimizes `f(U) = contract(E, U, U†)` from `cfg.restarts` Haar-random
/// starts and returns the best result.
pub fn optimal_gate(e: &EnvironmentTensor, cfg: &GateOptConfig) -> Result<GateOptResult> {
    optimal_gate_from(e, cfg, None)
}

/// As [`optimal_gate`], with `warm` as an extra start. The returned cost is
/// then never above `f(warm)`.
pub fn optimal_gate_from(e: &EnvironmentTensor, cfg: &GateOptConfig, warm: Option<&Matrix>) -> Result<GateOptResult> {
    cfg.validate()?;
    e.check_hermitian(HERMITIAN_TOL)?;
    let d = e.d();
    if let Some(w) = warm {
        if w.nrows() != d || w.ncols() != d {
            return Err(Error::Dimension(format!("{}×{} warm start for d = {d}", w.nrows(), w.ncols())));
        }
    }
    let p = Problem::new(e);
    let offset = usize::from(warm.is_some());
    let runs = par::map_range(cfg.restarts + offset, |r| {
        let start = match (r, warm) {
            (0, Some(w)) => w.clone(),
            _ => haar_random(d, &mut par::task_rng(cfg.seed, (r - offset) as u64)),
        };
        p.run(start, cfg)
    });
    let (start, (u, cost, iterations)) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .expect("at least one start");
    Ok(GateOptResult { u, cost, iterations, start })
}
