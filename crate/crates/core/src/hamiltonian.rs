//! Pauli-sum observables partitioned into product measurement bases.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString};
use crate::{Error, Matrix, Result, C64};

/// Largest register handled by [`Hamiltonian::ground_energy`].
pub const MAX_GROUND_QUBITS: usize = 12;

/// Registers up to this size are diagonalized densely.
const DENSE_GROUND_QUBITS: usize = 8;

/// Pauli term applied to dense state vectors: `(Pψ)[c ^ flip] = i^{phase}
/// (−1)^{|c & zmask|} ψ[c]`.
#[derive(Clone, Debug)]
pub(crate) struct TermOp {
    pub flip: usize,
    pub zmask: usize,
    pub phase: u8,
}

impl TermOp {
    fn new(p: &PauliString) -> Self {
        let n = p.n();
        Self {
            flip: PauliString::basis_mask(p.x_bits(), n),
            zmask: PauliString::basis_mask(p.z_bits(), n),
            phase: ((p.phase_exponent() as u32 + p.y_count()) % 4) as u8,
        }
    }

    #[inline]
    fn value(&self, c: usize) -> C64 {
        let sign = ((self.zmask & c).count_ones() % 2) as u8 * 2;
        crate::pauli::phase_value(self.phase + sign)
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        psi.iter()
            .enumerate()
            .map(|(c, a)| psi[c ^ self.flip].conj() * self.value(c) * a)
            .sum()
    }

    /// `out += coeff · P ψ`.
    pub fn apply_add(&self, coeff: f64, psi: &[C64], out: &mut [C64]) {
        for (c, a) in psi.iter().enumerate() {
            out[c ^ self.flip] += self.value(c) * a * coeff;
        }
    }
}

/// Group of qubit-wise compatible terms measured in one product basis.
#[derive(Clone, Debug)]
pub struct BasisGroup {
    pub terms: Vec<usize>,
    /// Measurement letter per qubit; `I` means the qubit is not read.
    pub basis: Vec<Pauli>,
}

/// `Σ_t c_t P_t` with a measurement-basis partition and group sampling weights.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<(f64, PauliString)>,
    groups: Vec<BasisGroup>,
    probabilities: Vec<f64>,
    ops: Vec<TermOp>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: f64,
    pub pauli: String,
}

/// JSON form: `{"n", "terms": [{"coeff", "pauli"}], "groups": [[..]]}`.
/// `groups` may be omitted (greedy qubit-wise grouping) and `probabilities`
/// defaults to uniform.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian from Hermitian terms and an explicit partition.
    /// Signs carried by the strings are folded into the coefficients.
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(terms.len());
        for (coeff, p) in terms {
            if p.n() != n {
                return Err(Error::Dimension(format!("term {p} on {n} qubits")));
            }
            if !p.is_hermitian() {
                return Err(Error::InvalidArgument(format!("term {p} is not Hermitian")));
            }
            let sign = if p.phase_exponent() == 2 { -1.0 } else { 1.0 };
            clean.push((coeff * sign, p.unsigned()));
        }
        let mut owner = vec![None; clean.len()];
        let mut built = Vec::with_capacity(groups.len());
        for (g, members) in groups.into_iter().enumerate() {
            let mut basis = vec![Pauli::I; n];
            for &t in &members {
                let p = &clean
                    .get(t)
                    .ok_or_else(|| Error::InvalidArgument(format!("group {g} names term {t}")))?
                    .1;
                if owner[t].replace(g).is_some() {
                    return Err(Error::InvalidArgument(format!("term {t} in two groups")));
                }
                for (q, b) in basis.iter_mut().enumerate() {
                    let l = p.letter(q);
                    if l == Pauli::I {
                        continue;
                    }
                    if *b != Pauli::I && *b != l {
                        return Err(Error::InvalidArgument(format!(
                            "group {g} mixes {:?} and {:?} on qubit {q}",
                            b, l
                        )));
                    }
                    *b = l;
                }
            }
            built.push(BasisGroup { terms: members, basis });
        }
        if let Some(t) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidArgument(format!("term {t} belongs to no group")));
        }
        let uniform = if built.is_empty() { vec![] } else { vec![1.0 / built.len() as f64; built.len()] };
        let ops = clean.iter().map(|(_, p)| TermOp::new(p)).collect();
        Ok(Self {
            n,
            terms: clean,
            groups: built,
            probabilities: uniform,
            ops,
        })
    }

    /// Groups terms greedily: each term joins the first compatible group.
    pub fn with_greedy_groups(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut bases: Vec<Vec<Pauli>> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (t, (_, p)) in terms.iter().enumerate() {
            let fits = |b: &Vec<Pauli>| {
                (0..n).all(|q| {
                    let l = p.letter(q);
                    l == Pauli::I || b[q] == Pauli::I || b[q] == l
                })
            };
            let g = match bases.iter().position(fits) {
                Some(g) => g,
                None => {
                    bases.push(vec![Pauli::I; n]);
                    groups.push(Vec::new());
                    bases.len() - 1
                }
            };
            for q in 0..n {
                if p.letter(q) != Pauli::I {
                    bases[g][q] = p.letter(q);
                }
            }
            groups[g].push(t);
        }
        Self::new(n, terms, groups)
    }

    /// Open-chain transverse-field Ising model
    /// `J_z Σ Z_q Z_{q+1} − h_x Σ X_q`, grouped into the all-Z and all-X bases.
    pub fn ising(n: usize, jz: f64, hx: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("Ising chain needs n ≥ 2".into()));
        }
        let mut terms = Vec::new();
        for q in 0..n - 1 {
            let z = 1u64 << q | 1u64 << (q + 1);
            terms.push((jz, PauliString::new(n, 0, z, 0)?));
        }
        for q in 0..n {
            terms.push((-hx, PauliString::single(n, q, Pauli::X)?));
        }
        let zz: Vec<usize> = (0..n - 1).collect();
        let xs: Vec<usize> = (n - 1..2 * n - 1).collect();
        Self::new(n, terms, vec![zz, xs])
    }

    /// `|0…0⟩⟨0…0| = 2^{−n} Σ_S Z_S`, measured in the computational basis.
    pub fn zero_projector(n: usize) -> Result<Self> {
        let scale = 1.0 / (1u64 << n) as f64;
        let terms: Vec<(f64, PauliString)> = (0..1u64 << n)
            .map(|z| PauliString::new(n, 0, z, 0).map(|p| (scale, p)))
            .collect::<Result<_>>()?;
        let all = (0..terms.len()).collect();
        Self::new(n, terms, vec![all])
    }

    pub fn from_spec(spec: &HamiltonianSpec) -> Result<Self> {
        let terms = spec
            .terms
            .iter()
            .map(|t| Ok((t.coeff, t.pauli.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        let h = match &spec.groups {
            Some(g) => Self::new(spec.n, terms, g.clone())?,
            None => Self::with_greedy_groups(spec.n, terms)?,
        };
        match &spec.probabilities {
            Some(p) => h.with_probabilities(p.clone()),
            None => Ok(h),
        }
    }

    pub fn to_spec(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| TermSpec {
                    coeff: *c,
                    pauli: p.to_string().trim_start_matches('+').to_string(),
                })
                .collect(),
            groups: Some(self.groups.iter().map(|g| g.terms.clone()).collect()),
            probabilities: Some(self.probabilities.clone()),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec())?)
    }

    /// Replaces the group sampling weights; they must be positive and sum
    /// to one.
    pub fn with_probabilities(mut self, p: Vec<f64>) -> Result<Self> {
        if p.len() != self.groups.len() || p.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(Error::InvalidArgument("one positive probability per group".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("group probabilities sum to {total}")));
        }
        self.probabilities = p;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn groups(&self) -> &[BasisGroup] {
        &self.groups
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `⟨ψ|H|ψ⟩` (real part; the observable is Hermitian).
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let v: C64 = self
            .terms
            .iter()
            .zip(&self.ops)
            .map(|((c, _), op)| op.expectation(psi) * *c)
            .sum();
        debug_assert!(v.im.abs() < 1e-9 * (1.0 + v.re.abs()));
        v.re
    }

    /// `H ψ`.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for ((c, _), op) in self.terms.iter().zip(&self.ops) {
            op.apply_add(*c, psi, &mut out);
        }
        out
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &[C64], b: &[C64]) -> C64 {
        let hb = self.apply(b);
        a.iter().zip(&hb).map(|(x, y)| x.conj() * y).sum()
    }

    /// Dense matrix (`n ≤ 12`).
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.n > MAX_GROUND_QUBITS {
            return Err(Error::Unsupported(format!("dense Hamiltonian on {} qubits", self.n)));
        }
        let dim = 1usize << self.n;
        let mut m = Matrix::zeros(dim, dim);
        for ((coeff, _), op) in self.terms.iter().zip(&self.ops) {
            for c in 0..dim {
                m[(c ^ op.flip, c)] += op.value(c) * *coeff;
            }
        }
        Ok(m)
    }

    /// Smallest eigenvalue: dense Hermitian diagonalization up to 8 qubits,
    /// Lanczos with full reorthogonalization above.
    pub fn ground_energy(&self) -> Result<f64> {
        if self.n > MAX_GROUND_QUBITS {
            return Err(Error::Unsupported(format!(
                "ground energy limited to {MAX_GROUND_QUBITS} qubits"
            )));
        }
        if self.n <= DENSE_GROUND_QUBITS {
            let eig = SymmetricEigen::new(self.to_matrix()?);
            return Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min));
        }
        Ok(self.lanczos_ground())
    }

    fn lanczos_ground(&self) -> f64 {
        let dim = 1usize << self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c);
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        normalize(&mut v);
        let mut basis: Vec<Vec<C64>> = vec![v];
        let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
        let mut last = f64::INFINITY;
        let max_iter = dim.min(400);
        loop {
            let j = basis.len() - 1;
            let mut w = self.apply(&basis[j]);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole Krylov basis
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= proj * bi;
                    }
                }
            }
            let bnorm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let m = alpha.len();
            let done = bnorm < 1e-12 || m >= max_iter;
            if m % 10 == 0 || done {
                let mut t = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    t[(i, i)] = alpha[i];
                    if i + 1 < m {
                        t[(i, i + 1)] = beta[i];
                        t[(i + 1, i)] = beta[i];
                    }
                }
                let low = SymmetricEigen::new(t)
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if done || (last - low).abs() < 1e-13 * (1.0 + low.abs()) {
                    return low;
                }
                last = low;
            }
            beta.push(bnorm);
            for x in w.iter_mut() {
                *x /= bnorm;
            }
            basis.push(w);
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}
