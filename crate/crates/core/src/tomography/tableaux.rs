//! Tableau-group tomography.
//!
//! For a Clifford `U₀` with `U₀ σ_j U₀† = s_j σ_{π(j)}`, the `4^k` gates
//! `U_m = P_m U₀` see only the pairs `(π(j), j)`:
//!
//! ```text
//! f(U_m) = Σ_j S[m][j] e_{π(j), j},   S[m][j] = s_j · χ(P_m, σ_{π(j)})
//! ```
//!
//! with `χ = ±1` for commuting / anticommuting strings. `S` is a signed
//! character table, `SᵀS = 4^k I`, so `e = Sᵀ f / 4^k` exactly.

use rand::Rng;

use crate::clifford::CliffordTableau;
use crate::counting::count_relevant;
use crate::environment::MAX_ENV_QUBITS;
use crate::pauli::PauliString;
use crate::tomography::cover::CliffordCover;
use crate::tomography::design::coefficients_to_tensor;
use crate::tomography::regress::{diagnostics_from_eigenvalues, Reconstruction, Solver};
use crate::tomography::sampling::CostOracle;
use crate::{par, Error, Matrix, Result};

#[derive(Clone, Debug)]
pub struct TableauGroup {
    pub k: usize,
    /// `P_m U₀` for `m ∈ [0, 4^k)`.
    pub gates: Vec<Matrix>,
    /// Column `j` probes the pair `(π(j), j)`.
    pub pairs: Vec<(usize, usize)>,
    /// `signs[m][j] ∈ {+1, −1}`.
    pub signs: Vec<Vec<i8>>,
}

impl TableauGroup {
    /// `SᵀS`, computed in integers.
    pub fn sign_gram(&self) -> Vec<Vec<i64>> {
        let nb = self.signs.len();
        (0..nb)
            .map(|a| {
                (0..nb)
                    .map(|b| self.signs.iter().map(|row| i64::from(row[a]) * i64::from(row[b])).sum())
                    .collect()
            })
            .collect()
    }

    /// Pair coefficients from the `4^k` costs `f(P_m U₀)`.
    pub fn invert(&self, f: &[f64]) -> Vec<f64> {
        let nb = self.signs.len() as f64;
        (0..self.signs.len())
            .map(|j| self.signs.iter().zip(f).map(|(row, fm)| f64::from(row[j]) * fm).sum::<f64>() / nb)
            .collect()
    }
}

/// `π` and the signs `s_j` of `U₀ σ_j U₀† = s_j σ_{π(j)}`.
pub(crate) fn pairing(u0: &CliffordTableau) -> (Vec<usize>, Vec<i8>) {
    let k = u0.k();
    let nb = 1usize << (2 * k);
    (0..nb)
        .map(|j| {
            let img = u0.conjugate(&PauliString::from_index(k, j)).expect("sizes match");
            let s = if img.phase_exponent() == 0 { 1 } else { -1 };
            (img.unsigned().index(), s)
        })
        .unzip()
}

pub fn tableaux_group(u0: &CliffordTableau) -> Result<TableauGroup> {
    let k = u0.k();
    if k > MAX_ENV_QUBITS {
        return Err(Error::Unsupported(format!("tableau group for k = {k}")));
    }
    let nb = 1usize << (2 * k);
    let (pi, s) = pairing(u0);
    let strings = PauliString::all(k);
    let images: Vec<PauliString> = pi.iter().map(|&i| strings[i].clone()).collect();
    let signs = strings
        .iter()
        .map(|pm| {
            (0..nb)
                .map(|j| if pm.commutes_unchecked(&images[j]) { s[j] } else { -s[j] })
                .collect()
        })
        .collect();
    let u = u0.to_unitary()?;
    let gates = strings.iter().map(|p| p.monomial().left_mul(&u)).collect();
    Ok(TableauGroup {
        k,
        gates,
        pairs: pi.iter().enumerate().map(|(j, &i)| (i, j)).collect(),
        signs,
    })
}

/// Tableau-group tomography over `cover`: each of the `G · 4^k` circuits is
/// measured `shots_per_circuit` times, every group is inverted exactly, and
/// pairs seen by several groups are averaged.
pub fn tableaux_tomography<R: Rng + ?Sized>(
    oracle: &CostOracle<'_>,
    cover: &CliffordCover,
    shots_per_circuit: u64,
    rng: &mut R,
) -> Result<Reconstruction> {
    let k = oracle.k();
    if cover.k() != k {
        return Err(Error::Dimension(format!("{}-qubit cover for a {k}-qubit gate", cover.k())));
    }
    if shots_per_circuit == 0 {
        return Err(Error::InvalidArgument("shots_per_circuit must be positive".into()));
    }
    cover.check_complete()?;
    let nb = 1usize << (2 * k);
    let groups: Vec<TableauGroup> = cover
        .groups()
        .iter()
        .map(|g| tableaux_group(&g.tableau))
        .collect::<Result<_>>()?;
    let seed: u64 = rng.random();
    let moments = par::map_range(groups.len() * nb, |t| {
        let mut r = par::task_rng(seed, t as u64);
        oracle.moments(&groups[t / nb].gates[t % nb], shots_per_circuit, &mut r)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut sum = vec![0.0; nb * nb];
    let mut count = vec![0u32; nb * nb];
    for (gi, g) in groups.iter().enumerate() {
        let f: Vec<f64> = moments[gi * nb..(gi + 1) * nb].iter().map(|m| m.mean()).collect();
        for (j, e) in g.invert(&f).into_iter().enumerate() {
            let (i, j) = g.pairs[j];
            sum[i * nb + j] += e;
            count[i * nb + j] += 1;
        }
    }
    let e: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / f64::from(c) } else { 0.0 })
        .collect();

    let mut rss = 0.0;
    for (gi, g) in groups.iter().enumerate() {
        for m in 0..nb {
            let fit: f64 = (0..nb)
                .map(|j| {
                    let (a, b) = g.pairs[j];
                    f64::from(g.signs[m][j]) * e[a * nb + b]
                })
                .sum();
            let mo = &moments[gi * nb + m];
            rss += mo.sum_sq - 2.0 * fit * mo.sum + mo.shots as f64 * fit * fit;
        }
    }
    // MᵀWM is diagonal: pair p carries c_p · 4^k · shots
    let total = groups.len() as u64 * nb as u64 * shots_per_circuit;
    let mut eig: Vec<f64> = count
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| f64::from(c) * nb as f64 * shots_per_circuit as f64)
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(Reconstruction {
        estimate: coefficients_to_tensor(k, &e),
        shots_used: total,
        gates_used: groups.len() * nb,
        diagnostics: diagnostics_from_eigenvalues(
            Solver::Tableaux,
            &eig,
            total,
            rss.max(0.0),
            count_relevant(k as u32) as usize,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{random_clifford, CliffordGate};
    use crate::tomography::basis::RowKernel;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_group_pairs_and_gram() {
        let g = tableaux_group(&CliffordTableau::identity(1)).unwrap();
        assert_eq!(g.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        let gram = g.sign_gram();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(gram[a][b], if a == b { 4 } else { 0 });
            }
        }
    }

    #[test]
    fn cnot_group_fixes_zi() {
        let t = CliffordTableau::from_gates(2, &[CliffordGate::Cx(0, 1)]).unwrap();
        let g = tableaux_group(&t).unwrap();
        let zi = "ZI".parse::<PauliString>().unwrap().index();
        assert!(g.pairs.contains(&(zi, zi)));
        let iz = "IZ".parse::<PauliString>().unwrap().index();
        let zz = "ZZ".parse::<PauliString>().unwrap().index();
        assert!(g.pairs.contains(&(zz, iz)));
    }

    #[test]
    fn signs_match_dense_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kern = RowKernel::new(2);
        for _ in 0..5 {
            let g = tableaux_group(&random_clifford(2, &mut rng)).unwrap();
            for (m, u) in g.gates.iter().enumerate() {
                let row = kern.row(u);
                for (j, &(i, jj)) in g.pairs.iter().enumerate() {
                    assert!((row[i * 16 + jj] - f64::from(g.signs[m][j])).abs() < 1e-10);
                }
                let nonzero = row.iter().filter(|v| v.abs() > 1e-10).count();
                assert_eq!(nonzero, 16);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn sign_matrix_is_orthogonal(seed in any::<u64>(), k in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = tableaux_group(&random_clifford(k, &mut rng)).unwrap();
            let nb = 1i64 << (2 * k);
            for (a, row) in g.sign_gram().iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    prop_assert_eq!(v, if a == b { nb } else { 0 });
                }
            }
        }
    }
}
