//! Uniform tomography over a unitary 2-design.
//!
//! For gates drawn from a 2-design the normalized second moment in the Pauli
//! basis is `diag(1, 1/(d²−1), …)`, so the least-squares solution reduces to
//! the closed-form shadow estimator: average `f_ss(U) · m_U` over shots, keep
//! the constant coordinate and multiply every other by `d² − 1`.

use std::sync::OnceLock;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::counting::count_relevant;
use crate::tomography::basis::{measurable_columns, Basis, RowKernel};
use crate::tomography::design::{build_design_matrix, coefficients_to_tensor, DesignMatrix};
use crate::tomography::gateset::GateSet;
use crate::tomography::regress::{diagnostics_from_eigenvalues, regress, NormalEquations, Reconstruction, Solver};
use crate::tomography::sampling::{collect_oracle_samples, CostOracle, ShotBatch, ShotMoments};
use crate::unitary::haar_random;
use crate::{par, Error, Result};

/// Shots per independent stream when Haar gates are generated on the fly.
pub const HAAR_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformSource {
    /// A fresh Haar-random gate for every shot.
    Haar,
    /// The full Clifford group (`k ≤ 2`), cycled.
    CliffordGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformEstimator {
    Regression,
    ClosedFormShadow,
}

/// Pauli-basis design of the full Clifford group, built once per `k`.
pub fn clifford_group_design(k: usize) -> Result<&'static DesignMatrix> {
    static CACHE: [OnceLock<DesignMatrix>; 2] = [OnceLock::new(), OnceLock::new()];
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("Clifford group design for k = {k}")));
    }
    if let Some(m) = CACHE[k - 1].get() {
        return Ok(m);
    }
    let m = build_design_matrix(&GateSet::clifford_group(k)?, &Basis::Pauli)?;
    Ok(CACHE[k - 1].get_or_init(|| m))
}

/// `1 + (d² − 1)³`, the pseudo-inverse trace of the 2-design second moment.
pub fn two_design_trace(k: usize) -> f64 {
    let d2 = (1u64 << (2 * k)) as f64;
    1.0 + (d2 - 1.0).powi(3)
}

/// Applies the inverse 2-design moment to averaged shadow coordinates.
fn shadow_scale(k: usize, mean_row: &mut [f64]) {
    let d2 = (1usize << (2 * k)) as f64;
    for v in mean_row.iter_mut().skip(1) {
        *v *= d2 - 1.0;
    }
}

fn to_full(k: usize, cols: &[usize], sub: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; Basis::len(k)];
    for (&c, &v) in cols.iter().zip(sub) {
        full[c] = v;
    }
    full
}

/// Closed-form shadow estimate from a batch over the Clifford group design.
pub fn shadow_estimate(m: &DesignMatrix, batch: &ShotBatch) -> Result<Reconstruction> {
    if m.basis() != &Basis::Pauli {
        return Err(Error::InvalidArgument("shadow estimator needs the Pauli basis".into()));
    }
    let k = m.k();
    let ncol = m.columns().len();
    let moments = batch.moments(m.n_rows());
    let total: u64 = moments.iter().map(|x| x.shots).sum();
    let mut mean_row = vec![0.0; ncol];
    for (g, mo) in moments.iter().enumerate() {
        if mo.shots == 0 {
            continue;
        }
        for (c, v) in mean_row.iter_mut().enumerate() {
            *v += mo.sum * m.rows()[(g, c)];
        }
    }
    if total > 0 {
        mean_row.iter_mut().for_each(|v| *v /= total as f64);
    }
    shadow_scale(k, &mut mean_row);
    let v = DVector::from_column_slice(&mean_row);
    let fitted = m.rows() * &v;
    let rss: f64 = moments
        .iter()
        .enumerate()
        .map(|(g, mo)| mo.sum_sq - 2.0 * fitted[g] * mo.sum + mo.shots as f64 * fitted[g] * fitted[g])
        .sum::<f64>()
        .max(0.0);
    Ok(Reconstruction {
        estimate: coefficients_to_tensor(k, &to_full(k, m.columns(), &mean_row)),
        shots_used: total,
        gates_used: moments.iter().filter(|x| x.shots > 0).count(),
        diagnostics: moment_diagnostics(k, Solver::ClosedForm, total, rss),
    })
}

fn moment_diagnostics(k: usize, solver: Solver, total: u64, rss: f64) -> crate::tomography::regress::Diagnostics {
    let dim = count_relevant(k as u32) as usize;
    let d2 = (1usize << (2 * k)) as f64;
    // eigenvalues of N · diag(1, 1/(d²−1))
    let n = total as f64;
    let mut eig = vec![n];
    eig.extend(std::iter::repeat_n(n / (d2 - 1.0), dim - 1));
    if total == 0 {
        eig.clear();
    }
    diagnostics_from_eigenvalues(solver, &eig, total, rss, dim)
}

/// Uniform tomography of the slot behind `oracle` with `n_shots` shots.
pub fn uniform_tomography<R: Rng + ?Sized>(
    oracle: &CostOracle<'_>,
    n_shots: u64,
    source: UniformSource,
    estimator: UniformEstimator,
    rng: &mut R,
) -> Result<Reconstruction> {
    let k = oracle.k();
    match source {
        UniformSource::CliffordGroup => {
            let gs = GateSet::clifford_group(k)?;
            let m = clifford_group_design(k)?;
            let batch = collect_oracle_samples(oracle, &gs, n_shots, rng)?;
            match estimator {
                UniformEstimator::Regression => regress(m, &batch),
                UniformEstimator::ClosedFormShadow => shadow_estimate(m, &batch),
            }
        }
        UniformSource::Haar => haar_stream(oracle, n_shots, estimator, rng),
    }
}

enum Acc {
    Shadow(Vec<f64>, ShotMoments),
    Normal(NormalEquations),
}

/// Haar source: gates are generated per shot in fixed-size chunks with
/// per-chunk streams, and the chunk accumulators are reduced in order.
fn haar_stream<R: Rng + ?Sized>(
    oracle: &CostOracle<'_>,
    n_shots: u64,
    estimator: UniformEstimator,
    rng: &mut R,
) -> Result<Reconstruction> {
    let k = oracle.k();
    let d = 1usize << k;
    let cols = measurable_columns(k);
    let kern = RowKernel::new(k);
    let seed: u64 = rng.random();
    let chunks = n_shots.div_ceil(HAAR_CHUNK);
    let parts = par::map_range(chunks as usize, |c| -> Result<Acc> {
        let mut r = par::task_rng(seed, c as u64);
        let len = HAAR_CHUNK.min(n_shots - c as u64 * HAAR_CHUNK);
        let mut acc = match estimator {
            UniformEstimator::ClosedFormShadow => Acc::Shadow(vec![0.0; cols.len()], ShotMoments::default()),
            UniformEstimator::Regression => Acc::Normal(NormalEquations::new(cols.len())),
        };
        for _ in 0..len {
            let u = haar_random(d, &mut r);
            let y = oracle.samples(&u, 1, &mut r)?[0];
            let row = kern.masked_row(&u, &cols);
            match &mut acc {
                Acc::Shadow(s, mo) => {
                    s.iter_mut().zip(&row).for_each(|(a, b)| *a += y * b);
                    mo.push(y);
                }
                Acc::Normal(ne) => {
                    let mut mo = ShotMoments::default();
                    mo.push(y);
                    ne.add(&row, &mo);
                }
            }
        }
        Ok(acc)
    });
    match estimator {
        UniformEstimator::ClosedFormShadow => {
            let mut sum = vec![0.0; cols.len()];
            let mut mo = ShotMoments::default();
            for p in parts {
                if let Acc::Shadow(s, m) = p? {
                    sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
                    mo.merge(&m);
                }
            }
            if n_shots > 0 {
                sum.iter_mut().for_each(|v| *v /= n_shots as f64);
            }
            shadow_scale(k, &mut sum);
            // without stored rows the residual is not available; the spread
            // of the raw samples stands in for σ̄²
            let rss = mo.variance() * n_shots.saturating_sub(1) as f64;
            Ok(Reconstruction {
                estimate: coefficients_to_tensor(k, &to_full(k, &cols, &sum)),
                shots_used: n_shots,
                gates_used: n_shots as usize,
                diagnostics: moment_diagnostics(k, Solver::ClosedForm, n_shots, rss),
            })
        }
        UniformEstimator::Regression => {
            let mut ne = NormalEquations::new(cols.len());
            for p in parts {
                if let Acc::Normal(x) = p? {
                    ne.merge(&x);
                }
            }
            let (v, eig) = ne.solve();
            let rss = ne.residual(&v);
            Ok(Reconstruction {
                estimate: coefficients_to_tensor(k, &to_full(k, &cols, v.as_slice())),
                shots_used: n_shots,
                gates_used: ne.gates,
                diagnostics: diagnostics_from_eigenvalues(
                    Solver::NormalEquations,
                    &eig,
                    n_shots,
                    rss,
                    count_relevant(k as u32) as usize,
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentTensor;
    use crate::tomography::design::design_diagnostics;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_qubit_estimators_are_exact_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = EnvironmentTensor::random_hermitian(1, &mut rng).unwrap();
        let truth = e.measurable_projection();
        for est in [UniformEstimator::Regression, UniformEstimator::ClosedFormShadow] {
            let r = uniform_tomography(&CostOracle::Exact(&e), 24, UniformSource::CliffordGroup, est, &mut rng)
                .unwrap();
            assert!(r.estimate.sub(&truth).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn haar_regression_is_exact_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = EnvironmentTensor::random_hermitian(1, &mut rng).unwrap();
        let r = uniform_tomography(
            &CostOracle::Exact(&e),
            50,
            UniformSource::Haar,
            UniformEstimator::Regression,
            &mut rng,
        )
        .unwrap();
        assert!(r.estimate.sub(&e.measurable_projection()).unwrap().norm() < 1e-9);
    }

    #[test]
    fn haar_shadow_is_unbiased_on_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = EnvironmentTensor::random_hermitian(1, &mut rng).unwrap();
        let truth = e.measurable_projection();
        let r = uniform_tomography(
            &CostOracle::Exact(&e),
            200_000,
            UniformSource::Haar,
            UniformEstimator::ClosedFormShadow,
            &mut rng,
        )
        .unwrap();
        let rel = r.estimate.sub(&truth).unwrap().norm() / truth.norm();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn two_design_trace_values() {
        assert_eq!(two_design_trace(1), 28.0);
        assert_eq!(two_design_trace(2), 3376.0);
        let d = design_diagnostics(clifford_group_design(1).unwrap()).unwrap();
        assert!((d.trace_inv_pseudo - two_design_trace(1)).abs() < 1e-9);
    }
}
