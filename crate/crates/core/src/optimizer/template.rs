//! Fifteen-angle two-qubit template and coordinate-wise fitting.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::unitary::{cnot, cnot_reversed, identity, kron, ry, rz};
use crate::{Error, Matrix, Result};

/// Angles per two-qubit gate.
pub const TEMPLATE_PARAMS: usize = 15;

fn euler(a: f64, b: f64, c: f64) -> Matrix {
    rz(c) * ry(b) * rz(a)
}

/// Three-CNOT universal template. In time order: `Rz Ry Rz` on each qubit
/// (angles 0–5), `CX(1→0)`, `Rz ⊗ Ry` (6, 7), `CX(0→1)`, `I ⊗ Ry` (8),
/// `CX(1→0)`, and `Rz Ry Rz` on each qubit (9–14). At `θ = 0` the CNOTs
/// compose to a SWAP, which a fixed leading SWAP cancels so that `θ = 0` is
/// the identity. Every angle enters as `exp(−iθP/2)`, so the two-point shift
/// rule with `±π/2` is exact.
pub fn two_qubit_template(theta: &[f64]) -> Result<Matrix> {
    if theta.len() != TEMPLATE_PARAMS {
        return Err(Error::Dimension(format!("template needs {TEMPLATE_PARAMS} angles, got {}", theta.len())));
    }
    let t = theta;
    let first = kron(&euler(t[0], t[1], t[2]), &euler(t[3], t[4], t[5]));
    let mid1 = kron(&rz(t[6]), &ry(t[7]));
    let mid2 = kron(&identity(2), &ry(t[8]));
    let last = kron(&euler(t[9], t[10], t[11]), &euler(t[12], t[13], t[14]));
    let swap = cnot_reversed() * cnot() * cnot_reversed();
    Ok(last * cnot_reversed() * mid2 * cnot() * mid1 * cnot_reversed() * first * swap)
}

/// Minimizes a function that is sinusoidal with period `2π` in each angle by
/// exact coordinate updates: from `f(θ)`, `f(θ ± π/2)` the minimizer along
/// the coordinate is closed-form. Returns the final value.
pub fn coordinate_minimize<F>(theta: &mut [f64], sweeps: usize, mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut cur = f(theta);
    for _ in 0..sweeps {
        for m in 0..theta.len() {
            let t0 = theta[m];
            theta[m] = t0 + FRAC_PI_2;
            let fp = f(theta);
            theta[m] = t0 - FRAC_PI_2;
            let fm = f(theta);
            // f = A cos(θ − B) + C
            let a_sin = (fp - fm) / 2.0;
            let a_cos = cur - (fp + fm) / 2.0;
            let b = t0 + a_sin.atan2(a_cos);
            let next = (b + PI).rem_euclid(2.0 * PI);
            theta[m] = next;
            cur = f(theta);
        }
    }
    cur
}

/// Template angles whose gate best matches `target` up to global phase, by
/// coordinate minimization of `−|tr(V† U(θ))|²` from `starts` seeds.
pub fn fit_template(target: &Matrix, starts: &[Vec<f64>], sweeps: usize) -> Result<(Vec<f64>, f64)> {
    if target.nrows() != 4 || target.ncols() != 4 {
        return Err(Error::Dimension("template fit needs a 4×4 target".into()));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let mut th = s.clone();
        let v = coordinate_minimize(&mut th, sweeps, |x| {
            -(target.adjoint() * two_qubit_template(x).expect("15 angles")).trace().norm_sqr()
        });
        let fid = -v / 16.0;
        if best.as_ref().is_none_or(|(_, b)| fid > *b) {
            best = Some((th, fid));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no starting angles".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentTensor;
    use crate::unitary::{gate_fidelity, haar_random, is_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_angles(rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..TEMPLATE_PARAMS).map(|_| rng.random_range(-PI..PI)).collect()
    }

    #[test]
    fn zero_angles_give_identity() {
        let u = two_qubit_template(&[0.0; TEMPLATE_PARAMS]).unwrap();
        assert!((u - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = EnvironmentTensor::random_hermitian(2, &mut rng).unwrap();
        let th = random_angles(&mut rng);
        let f = |x: &[f64]| e.cost(&two_qubit_template(x).unwrap()).unwrap();
        for m in 0..TEMPLATE_PARAMS {
            let mut p = th.clone();
            p[m] += FRAC_PI_2;
            let mut q = th.clone();
            q[m] -= FRAC_PI_2;
            let shift = (f(&p) - f(&q)) / 2.0;
            p[m] = th[m] + 1e-6;
            q[m] = th[m] - 1e-6;
            let fd = (f(&p) - f(&q)) / 2e-6;
            assert!((shift - fd).abs() < 1e-4, "angle {m}: {shift} vs {fd}");
        }
        assert!(is_unitary(&two_qubit_template(&th).unwrap()));
    }

    #[test]
    fn template_reaches_haar_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let v = haar_random(4, &mut rng);
            let starts: Vec<Vec<f64>> = (0..4).map(|_| random_angles(&mut rng)).collect();
            let (th, fid) = fit_template(&v, &starts, 200).unwrap();
            assert!(fid > 0.999, "{fid}");
            assert!((gate_fidelity(&two_qubit_template(&th).unwrap(), &v) - fid).abs() < 1e-12);
        }
    }
}
