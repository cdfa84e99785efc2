//! Finite gate sets probed during tomography.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{enumerate_clifford_group, format_circuit, CliffordTableau};
use crate::pauli::PauliString;
use crate::tomography::cover::CliffordCover;
use crate::unitary::{haar_random, identity, unitarity_defect, UNITARY_TOL};
use crate::{par, Error, Matrix, Result};

/// How shots are assigned to gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Shot `s` uses gate `s mod N`.
    #[default]
    Cycle,
    /// Every shot draws a gate uniformly at random.
    Uniform,
}

/// Optional Clifford metadata of a gate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateInfo {
    pub tableau: Option<CliffordTableau>,
    /// Generator circuit in token format.
    pub circuit: Option<String>,
    pub cnots: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GateSet {
    k: usize,
    gates: Vec<Matrix>,
    info: Vec<GateInfo>,
    mode: SamplingMode,
}

fn clifford_unitaries(k: usize) -> Result<&'static [(CliffordTableau, Matrix)]> {
    static CACHE: [OnceLock<Vec<(CliffordTableau, Matrix)>>; 2] = [OnceLock::new(), OnceLock::new()];
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("Clifford group gate set for k = {k}")));
    }
    Ok(CACHE[k - 1].get_or_init(|| {
        let group = enumerate_clifford_group(k).expect("k checked");
        par::map_slice(&group, |t| (t.clone(), t.to_unitary().expect("k ≤ 2")))
    }))
}

impl GateSet {
    /// Gate set from explicit unitaries, each checked to [`UNITARY_TOL`].
    pub fn new(k: usize, gates: Vec<Matrix>, mode: SamplingMode) -> Result<Self> {
        let d = 1usize << k;
        for (i, g) in gates.iter().enumerate() {
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::Dimension(format!("gate {i} is {}×{}, expected {d}×{d}", g.nrows(), g.ncols())));
            }
            let defect = unitarity_defect(g);
            if defect > UNITARY_TOL {
                return Err(Error::InvalidArgument(format!("gate {i} is not unitary (defect {defect:.3e})")));
            }
        }
        let info = vec![GateInfo::default(); gates.len()];
        Ok(Self { k, gates, info, mode })
    }

    /// Every element of the `k`-qubit Clifford group, `k ∈ {1, 2}`, identity
    /// first.
    pub fn clifford_group(k: usize) -> Result<Self> {
        let all = clifford_unitaries(k)?;
        Ok(Self {
            k,
            gates: all.iter().map(|(_, u)| u.clone()).collect(),
            info: all
                .iter()
                .map(|(t, _)| GateInfo { tableau: Some(t.clone()), ..GateInfo::default() })
                .collect(),
            mode: SamplingMode::Cycle,
        })
    }

    /// `n` Clifford-group elements drawn uniformly with replacement.
    pub fn random_cliffords<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Self> {
        let all = clifford_unitaries(k)?;
        let picks: Vec<&(CliffordTableau, Matrix)> = (0..n).map(|_| &all[rng.random_range(0..all.len())]).collect();
        Ok(Self {
            k,
            gates: picks.iter().map(|(_, u)| u.clone()).collect(),
            info: picks
                .iter()
                .map(|(t, _)| GateInfo { tableau: Some(t.clone()), ..GateInfo::default() })
                .collect(),
            mode: SamplingMode::Cycle,
        })
    }

    /// `n` Haar-random unitaries.
    pub fn haar<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Self {
        let d = 1usize << k;
        let gates: Vec<Matrix> = (0..n).map(|_| haar_random(d, rng)).collect();
        let info = vec![GateInfo::default(); n];
        Self { k, gates, info, mode: SamplingMode::Cycle }
    }

    /// The `4^k` Pauli strings as gates.
    pub fn paulis(k: usize) -> Self {
        let strings = PauliString::all(k);
        Self {
            k,
            gates: strings.iter().map(|p| p.to_matrix()).collect(),
            info: strings
                .iter()
                .map(|p| GateInfo {
                    tableau: None,
                    circuit: Some(pauli_tokens(p)),
                    cnots: Some(0),
                })
                .collect(),
            mode: SamplingMode::Cycle,
        }
    }

    /// The single gate `I`.
    pub fn identity(k: usize) -> Self {
        Self {
            k,
            gates: vec![identity(1 << k)],
            info: vec![GateInfo {
                tableau: Some(CliffordTableau::identity(k)),
                circuit: Some(String::new()),
                cnots: Some(0),
            }],
            mode: SamplingMode::Cycle,
        }
    }

    /// The `G · 4^k` gates `P_m U₀` of a cover, grouped by generator.
    pub fn from_cover(cover: &CliffordCover) -> Result<Self> {
        let k = cover.k();
        let mut gates = Vec::new();
        let mut info = Vec::new();
        for g in cover.groups() {
            let group = crate::tomography::tableaux_group(&g.tableau)?;
            let base = format_circuit(&g.circuit);
            for (m, u) in group.gates.into_iter().enumerate() {
                let p = PauliString::from_index(k, m);
                let tail = pauli_tokens(&p);
                let circuit = match (base.is_empty(), tail.is_empty()) {
                    (_, true) => base.clone(),
                    (true, false) => tail,
                    (false, false) => format!("{base} {tail}"),
                };
                gates.push(u);
                info.push(GateInfo {
                    tableau: Some(g.tableau.left_multiply_pauli(&p)),
                    circuit: Some(circuit),
                    cnots: Some(g.cnots),
                });
            }
        }
        Ok(Self { k, gates, info, mode: SamplingMode::Cycle })
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Matrix] {
        &self.gates
    }

    pub fn info(&self, i: usize) -> &GateInfo {
        &self.info[i]
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    /// Shots per gate for a budget of `n_shots`. Cycle mode spreads the
    /// remainder over the first gates; uniform mode draws every shot.
    pub fn allocate<R: Rng + ?Sized>(&self, n_shots: u64, rng: &mut R) -> Vec<u64> {
        let n = self.gates.len();
        if n == 0 {
            return Vec::new();
        }
        match self.mode {
            SamplingMode::Cycle => {
                let base = n_shots / n as u64;
                let extra = (n_shots % n as u64) as usize;
                (0..n).map(|i| base + u64::from(i < extra)).collect()
            }
            SamplingMode::Uniform => {
                let mut counts = vec![0u64; n];
                for _ in 0..n_shots {
                    counts[rng.random_range(0..n)] += 1;
                }
                counts
            }
        }
    }

    /// Total CNOT count, if every gate carries one.
    pub fn total_cnots(&self) -> Option<usize> {
        self.info.iter().map(|i| i.cnots).sum()
    }
}

/// Token form of a Pauli string, e.g. `X0 Z1`; empty for the identity.
fn pauli_tokens(p: &PauliString) -> String {
    (0..p.n())
        .filter_map(|q| match p.letter(q).letter() {
            'I' => None,
            l => Some(format!("{l}{q}")),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
