//! Reconstruction and optimized-gate error metrics.

use rand::Rng;

use crate::environment::EnvironmentTensor;
use crate::unitary::haar_random;
use crate::{Error, Matrix, Result};

/// Default size of the Haar check set.
pub const DEFAULT_CHECK_GATES: usize = 200;

pub fn check_gates<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Vec<Matrix> {
    (0..n).map(|_| haar_random(1 << k, rng)).collect()
}

/// `‖f̂ − f‖₂ / ‖f‖₂` over the check gates, the cost-space error normalized
/// by the magnitude of the cost.
pub fn error_env(estimate: &EnvironmentTensor, truth: &EnvironmentTensor, checks: &[Matrix]) -> Result<f64> {
    if estimate.k() != truth.k() {
        return Err(Error::Dimension("estimate and truth differ in k".into()));
    }
    if checks.is_empty() {
        return Err(Error::InvalidArgument("no check gates".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for u in checks {
        let f = truth.cost(u)?;
        num += (estimate.cost(u)? - f).powi(2);
        den += f * f;
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument("cost vanishes on every check gate".into()));
    }
    Ok((num / den).sqrt())
}

/// `|f(U_opt) − f_min| / |f_min|`, the relative energy error of an optimized
/// gate against the true minimum.
pub fn error_ener(f_opt: f64, f_min: f64) -> Result<f64> {
    if f_min == 0.0 {
        return Err(Error::InvalidArgument("true minimum is zero".into()));
    }
    Ok((f_opt - f_min).abs() / f_min.abs())
}
