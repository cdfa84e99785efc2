//! Tomography of perfect-square costs `f(U) = |tr(E_L† U)|²`.
//!
//! With `A_m = tr(E_L† σ_m)` the Pauli substitutions give `f(σ_m) = |A_m|²`
//! and the unitary combinations `T = (σ_i + ζ σ_j)/√2` (`ζ = 1` for
//! anticommuting, `ζ = i` for commuting strings) give
//!
//! ```text
//! 2 f(T) − |A_i|² − |A_j|² = 2 Re(conj(A_i) ζ A_j).
//! ```
//!
//! The largest component is the anchor and is fixed real positive. A star of
//! combinations with the anchor yields one quadrature of every other
//! component, the magnitude yields the other up to sign, and a chain of
//! combinations between consecutive components (in decreasing amplitude)
//! fixes the signs by a two-state Viterbi pass.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::Serialize;

use crate::environment::{vectorize, EnvironmentTensor};
use crate::pauli::PauliString;
use crate::tomography::sampling::CostOracle;
use crate::unitary::haar_random;
use crate::{Error, Matrix, Result, C64};

/// Anchor amplitudes at or below this are treated as a vanishing cost.
pub const ANCHOR_TOL: f64 = 1e-12;
/// Components below this fraction of the anchor amplitude are set to zero.
pub const COMPONENT_RTOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct LinearSquareResult {
    /// Linear environment, global phase fixed by the anchor.
    #[serde(skip)]
    pub e_l: Matrix,
    /// `|A_m|` per Pauli index.
    pub amplitudes: Vec<f64>,
    /// Max over check gates of `|f − |tr(E_L† U)|²|`.
    pub residual: f64,
    /// Distinct circuits measured, check gates excluded.
    pub circuits: usize,
    pub shots_used: u64,
    /// Pauli index of the anchor component.
    pub anchor: usize,
}

impl LinearSquareResult {
    /// The rank-one environment `vec(E_L) vec(E_L)†`.
    pub fn environment(&self) -> EnvironmentTensor {
        let l = vectorize(&self.e_l);
        let d = self.e_l.nrows();
        EnvironmentTensor::from_matrix(d.trailing_zeros() as usize, &l * l.adjoint())
            .expect("gate dimension already validated")
    }

    /// `|tr(E_L† U)|²`.
    pub fn cost(&self, u: &Matrix) -> f64 {
        (self.e_l.adjoint() * u).trace().norm_sqr()
    }
}

/// `(σ_i + ζ σ_j)/√2` and `ζ`.
pub fn pauli_combination(pi: &PauliString, pj: &PauliString) -> Result<(Matrix, C64)> {
    if pi.unsigned() == pj.unsigned() {
        return Err(Error::InvalidArgument("combination of a string with itself".into()));
    }
    let zeta = if pi.commutes_unchecked(pj) { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
    let t = (pi.to_matrix() + pj.to_matrix() * zeta) * C64::new(FRAC_1_SQRT_2, 0.0);
    Ok((t, zeta))
}

/// Perfect-square tomography of the slot behind `oracle`. Each circuit is
/// measured `shots_per_circuit` times; `n_check` Haar gates give the residual.
pub fn linear_square_tomography<R: Rng + ?Sized>(
    oracle: &CostOracle<'_>,
    shots_per_circuit: u64,
    n_check: usize,
    rng: &mut R,
) -> Result<LinearSquareResult> {
    if shots_per_circuit == 0 {
        return Err(Error::InvalidArgument("shots_per_circuit must be positive".into()));
    }
    let k = oracle.k();
    let d = 1usize << k;
    let nb = d * d;
    let strings = PauliString::all(k);
    let mut circuits = 0usize;
    let mut measure = |u: &Matrix, rng: &mut R| -> Result<f64> {
        circuits += 1;
        oracle.mean(u, shots_per_circuit, rng)
    };

    let a: Vec<f64> = strings
        .iter()
        .map(|p| measure(&p.to_matrix(), rng).map(|f| f.max(0.0)))
        .collect::<Result<_>>()?;
    let r: Vec<f64> = a.iter().map(|v| v.sqrt()).collect();
    let anchor = (0..nb).max_by(|&x, &y| r[x].total_cmp(&r[y])).expect("nb > 0");
    let ra = r[anchor];
    if ra <= ANCHOR_TOL {
        return Err(Error::PhaseChain(format!(
            "anchor component {} has amplitude {ra:e}; the cost vanishes on every Pauli string",
            strings[anchor]
        )));
    }
    let mut order: Vec<usize> = (0..nb).filter(|&m| m != anchor && r[m] > COMPONENT_RTOL * ra).collect();
    order.sort_by(|&x, &y| r[y].total_cmp(&r[x]).then(x.cmp(&y)));

    // q = Re(conj(A_i) ζ A_j) from one combination
    let mut probe = |i: usize, j: usize, rng: &mut R| -> Result<(f64, C64)> {
        let (t, zeta) = pauli_combination(&strings[i], &strings[j])?;
        let f = measure(&t, rng)?;
        Ok(((2.0 * f - a[i] - a[j]) / 2.0, zeta))
    };

    // star: with A_anchor = r_a, q = r_a Re(ζ A_m)
    let mut cands: Vec<[C64; 2]> = Vec::with_capacity(order.len());
    for &m in &order {
        let (q, zeta) = probe(anchor, m, rng)?;
        let known = (q / ra).clamp(-r[m], r[m]);
        let other = (a[m] - known * known).max(0.0).sqrt();
        cands.push(if zeta.im == 0.0 {
            [C64::new(known, other), C64::new(known, -other)]
        } else {
            // Re(i A) = −Im A
            [C64::new(other, -known), C64::new(-other, -known)]
        });
    }

    // chain: Viterbi over the sign of the free quadrature
    let mut signs = vec![0usize; order.len()];
    if !order.is_empty() {
        let mut cost = [0.0f64; 2];
        let mut back: Vec<[usize; 2]> = Vec::with_capacity(order.len());
        back.push([0, 0]);
        for n in 1..order.len() {
            let (q, zeta) = probe(order[n - 1], order[n], rng)?;
            let mut next = [f64::INFINITY; 2];
            let mut from = [0usize; 2];
            for s in 0..2 {
                for p in 0..2 {
                    let pred = (cands[n - 1][p].conj() * zeta * cands[n][s]).re;
                    let c = cost[p] + (pred - q).powi(2);
                    if c < next[s] {
                        next[s] = c;
                        from[s] = p;
                    }
                }
            }
            cost = next;
            back.push(from);
        }
        let mut s = if cost[1] < cost[0] { 1 } else { 0 };
        for n in (0..order.len()).rev() {
            signs[n] = s;
            s = back[n][s];
        }
    }

    let mut amp = vec![C64::new(0.0, 0.0); nb];
    amp[anchor] = C64::new(ra, 0.0);
    for (n, &m) in order.iter().enumerate() {
        amp[m] = cands[n][signs[n]];
    }
    // tr(σ_m σ_n) = d δ_mn, so E_L = Σ conj(A_m) σ_m / d
    let mut e_l = Matrix::zeros(d, d);
    for (m, p) in strings.iter().enumerate() {
        if amp[m] != C64::new(0.0, 0.0) {
            e_l += p.to_matrix() * (amp[m].conj() / d as f64);
        }
    }
    let shots_used = circuits as u64 * shots_per_circuit;
    let circuits_done = circuits;

    let mut result = LinearSquareResult {
        e_l,
        amplitudes: r,
        residual: 0.0,
        circuits: circuits_done,
        shots_used,
        anchor,
    };
    for _ in 0..n_check {
        let u = haar_random(d, rng);
        let f = oracle.mean(&u, shots_per_circuit, rng)?;
        result.residual = result.residual.max((f - result.cost(&u)).abs());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::{identity, is_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn square_env(e_l: &Matrix) -> EnvironmentTensor {
        let l = vectorize(e_l);
        EnvironmentTensor::from_matrix(e_l.nrows().trailing_zeros() as usize, &l * l.adjoint()).unwrap()
    }

    fn random_el(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    }

    #[test]
    fn combinations_are_unitary() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let (t, zeta) = pauli_combination(&x, &z).unwrap();
        assert_eq!(zeta, C64::new(1.0, 0.0));
        assert!(is_unitary(&t));
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let (t, zeta) = pauli_combination(&xx, &zz).unwrap();
        assert_eq!(zeta, C64::new(0.0, 1.0));
        assert!(is_unitary(&t));
        // with ζ = i an anticommuting pair would not be unitary
        let bad = (x.to_matrix() + "Y".parse::<PauliString>().unwrap().to_matrix() * C64::new(0.0, 1.0))
            * C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(!is_unitary(&bad));
    }

    #[test]
    fn identity_environment_single_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = square_env(&identity(2));
        let res = linear_square_tomography(&CostOracle::Exact(&e), 1, 20, &mut rng).unwrap();
        assert_eq!(res.anchor, 0);
        assert!((res.amplitudes[0] - 2.0).abs() < 1e-12);
        assert!(res.amplitudes[1..].iter().all(|v| v.abs() < 1e-7));
        assert!(res.residual < 1e-8);
    }

    #[test]
    fn random_two_qubit_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let truth = random_el(4, &mut rng);
            let e = square_env(&truth);
            let res = linear_square_tomography(&CostOracle::Exact(&e), 1, 20, &mut rng).unwrap();
            assert!(res.residual < 1e-8, "{}", res.residual);
            let ov = (truth.adjoint() * &res.e_l).trace();
            let aligned = &res.e_l * (ov.conj() / ov.norm());
            assert!((aligned - &truth).norm() < 1e-8);
            let diff = res.environment().measurable_projection().sub(&e.measurable_projection()).unwrap();
            assert!(diff.norm() < 1e-8);
            assert!(res.circuits <= 16 + 15 + 14);
        }
    }

    #[test]
    fn vanishing_cost_breaks_the_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = EnvironmentTensor::zero(1).unwrap();
        assert!(matches!(
            linear_square_tomography(&CostOracle::Exact(&e), 1, 0, &mut rng),
            Err(Error::PhaseChain(_))
        ));
    }
}
