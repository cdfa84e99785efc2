//! Dense statevector simulation of layered gate circuits.
//!
//! Basis index bit `n − 1 − q` holds qubit `q`, so qubit 0 is the leftmost
//! tensor factor. Gate matrices act on their support in the listed order,
//! first support qubit most significant.

use rand::Rng;

use crate::hamiltonian::Hamiltonian;
use crate::pauli::Pauli;
use crate::unitary::{self, haar_random};
use crate::{Error, Matrix, Result, C64};

/// Largest register the simulator accepts.
pub const MAX_SIM_QUBITS: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_SIM_QUBITS {
            return Err(Error::Unsupported(format!(
                "{n} qubits exceeds simulator limit {MAX_SIM_QUBITS}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies an arbitrary (possibly non-unitary) matrix on `support`.
    pub fn apply(&mut self, m: &Matrix, support: &[usize]) {
        apply_matrix(&mut self.amps, self.n, m, support);
    }
}

/// In-place `amps ← (m on support) · amps`.
pub(crate) fn apply_matrix(amps: &mut [C64], n: usize, m: &Matrix, support: &[usize]) {
    let k = support.len();
    let d = 1usize << k;
    let bits: Vec<usize> = support.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let mask: usize = bits.iter().sum();
    // offsets[s] = basis offset of local index s (first support qubit is the
    // most significant local bit)
    let offsets: Vec<usize> = (0..d)
        .map(|s| {
            (0..k)
                .filter(|&j| (s >> (k - 1 - j)) & 1 == 1)
                .map(|j| bits[j])
                .sum()
        })
        .collect();
    let mut local = vec![C64::new(0.0, 0.0); d];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for s in 0..d {
            local[s] = amps[base + offsets[s]];
        }
        for r in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..d {
                acc += m[(r, s)] * local[s];
            }
            amps[base + offsets[r]] = acc;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub matrix: Matrix,
    pub support: Vec<usize>,
}

/// Ordered gate list; gate 0 acts first on `|0…0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn push(&mut self, matrix: Matrix, support: Vec<usize>) -> Result<()> {
        check_gate(self.n, &matrix, &support)?;
        self.gates.push(GateOp { matrix, support });
        Ok(())
    }

    pub fn with_gate(mut self, matrix: Matrix, support: Vec<usize>) -> Result<Self> {
        self.push(matrix, support)?;
        Ok(self)
    }

    /// `layers × (n−1)` Haar-random two-qubit gates on `(0,1), (1,2), …`
    /// repeated layer by layer.
    pub fn staircase_ansatz<R: Rng + ?Sized>(n: usize, layers: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("staircase needs n ≥ 2".into()));
        }
        let mut c = Self::new(n);
        for _ in 0..layers {
            for q in 0..n - 1 {
                c.push(haar_random(4, rng), vec![q, q + 1])?;
            }
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, index: usize) -> Result<&GateOp> {
        self.gates.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("gate index {index} of {}", self.gates.len()))
        })
    }

    /// Copy with gate `index` replaced by `u`.
    pub fn substitute_gate(&self, index: usize, u: &Matrix) -> Result<Self> {
        let mut c = self.clone();
        c.replace_gate(index, u.clone())?;
        Ok(c)
    }

    pub fn replace_gate(&mut self, index: usize, u: Matrix) -> Result<()> {
        let support = self.gate(index)?.support.clone();
        check_gate(self.n, &u, &support)?;
        self.gates[index].matrix = u;
        Ok(())
    }

    /// Final state `(∏ gates)|0…0⟩`.
    pub fn run(&self) -> Result<StateVector> {
        self.run_range(StateVector::zero(self.n)?, 0..self.gates.len())
    }

    /// Applies gates `range` to `state`.
    pub fn run_range(&self, mut state: StateVector, range: std::ops::Range<usize>) -> Result<StateVector> {
        if state.n != self.n {
            return Err(Error::Dimension("state and circuit sizes differ".into()));
        }
        for g in &self.gates[range] {
            state.apply(&g.matrix, &g.support);
        }
        Ok(state)
    }
}

fn check_gate(n: usize, m: &Matrix, support: &[usize]) -> Result<()> {
    let d = 1usize << support.len();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Dimension(format!(
            "{}×{} matrix on {} qubits",
            m.nrows(),
            m.ncols(),
            support.len()
        )));
    }
    for (i, &q) in support.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        if support[..i].contains(&q) {
            return Err(Error::InvalidArgument(format!("qubit {q} repeated in support")));
        }
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩` for the circuit's output state.
pub fn exact_energy(c: &Circuit, h: &Hamiltonian) -> Result<f64> {
    if c.n() != h.n() {
        return Err(Error::Dimension("circuit and Hamiltonian sizes differ".into()));
    }
    Ok(h.expectation(c.run()?.amplitudes()))
}

/// Smallest eigenvalue of `h`.
pub fn exact_ground_energy(h: &Hamiltonian) -> Result<f64> {
    h.ground_energy()
}

/// Rotation taking the measured letter to `Z`: `H` for `X`, `H·S†` for `Y`.
pub(crate) fn basis_rotation(p: Pauli) -> Option<Matrix> {
    match p {
        Pauli::X => Some(unitary::hadamard()),
        Pauli::Y => Some(unitary::hadamard() * unitary::phase_sdg()),
        Pauli::I | Pauli::Z => None,
    }
}

/// Rotates `amps` so that group `g`'s basis becomes computational.
pub(crate) fn rotate_to_basis(amps: &mut [C64], n: usize, basis: &[Pauli]) {
    for (q, &p) in basis.iter().enumerate() {
        if let Some(r) = basis_rotation(p) {
            apply_matrix(amps, n, &r, &[q]);
        }
    }
}

/// Per-group readout energies `Σ_{t∈g} c_t (−1)^{|b & mask_t|}` for every
/// bitstring `b`, divided by the group probability.
pub(crate) fn group_outcome_values(h: &Hamiltonian) -> Vec<Vec<f64>> {
    let n = h.n();
    let dim = 1usize << n;
    h.groups()
        .iter()
        .zip(h.probabilities())
        .map(|(g, &pg)| {
            let masks: Vec<(f64, usize)> = g
                .terms
                .iter()
                .map(|&t| {
                    let (c, p) = &h.terms()[t];
                    let support = p.x_bits() | p.z_bits();
                    (*c, crate::pauli::PauliString::basis_mask(support, n))
                })
                .collect();
            (0..dim)
                .map(|b| {
                    masks
                        .iter()
                        .map(|&(c, m)| if (b & m).count_ones() % 2 == 0 { c } else { -c })
                        .sum::<f64>()
                        / pg
                })
                .collect()
        })
        .collect()
}

/// Picks a group by its probability.
pub(crate) fn pick_group<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (g, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return g;
        }
    }
    probs.len() - 1
}

/// Inverse-CDF draw from unnormalized weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Repeated single-shot energy samples from a fixed state: per group, the
/// rotated outcome distribution and readout values are computed once.
#[derive(Clone, Debug)]
pub struct ShotSampler {
    probs: Vec<f64>,
    cdfs: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

impl ShotSampler {
    pub fn new(state: &StateVector, h: &Hamiltonian) -> Result<Self> {
        if state.n() != h.n() {
            return Err(Error::Dimension("state and Hamiltonian sizes differ".into()));
        }
        let n = h.n();
        let cdfs = h
            .groups()
            .iter()
            .map(|g| {
                let mut amps = state.amplitudes().to_vec();
                rotate_to_basis(&mut amps, n, &g.basis);
                let mut acc = 0.0;
                amps.iter()
                    .map(|a| {
                        acc += a.norm_sqr();
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            probs: h.probabilities().to_vec(),
            cdfs,
            values: group_outcome_values(h),
        })
    }

    pub(crate) fn from_parts(probs: Vec<f64>, cdfs: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Self {
        Self { probs, cdfs, values }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = pick_group(&self.probs, rng);
        let cdf = &self.cdfs[g];
        let u = rng.random::<f64>() * cdf[cdf.len() - 1];
        let b = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        self.values[g][b]
    }

    /// Exact mean of [`ShotSampler::sample`].
    pub fn mean(&self) -> f64 {
        self.cdfs
            .iter()
            .zip(&self.values)
            .zip(&self.probs)
            .map(|((cdf, vals), p)| {
                let mut prev = 0.0;
                p * cdf
                    .iter()
                    .zip(vals)
                    .map(|(c, v)| {
                        let w = c - prev;
                        prev = *c;
                        w * v
                    })
                    .sum::<f64>()
                    / cdf[cdf.len() - 1]
            })
            .sum()
    }
}

/// One unbiased single-shot estimate of the circuit energy: pick a basis
/// group with probability `p_g`, rotate, sample a bitstring and return the
/// group's readout value divided by `p_g`.
pub fn single_shot_sample<R: Rng + ?Sized>(c: &Circuit, h: &Hamiltonian, rng: &mut R) -> Result<f64> {
    let state = c.run()?;
    Ok(ShotSampler::new(&state, h)?.sample(rng))
}
