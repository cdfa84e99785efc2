//! Clifford gates as signed tableaux.
//!
//! A tableau stores, for every generator `X_0..X_{k-1}, Z_0..Z_{k-1}`, the
//! signed Pauli string `U G U†`. Conjugating an arbitrary string composes the
//! generator images, so every operation is exact integer arithmetic.
//!
//! Circuits are written as whitespace-separated tokens such as `"H0 S1 CX01"`
//! (control digit first) and applied in listed order: the first token acts
//! first on states.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::pauli::{Pauli, PauliString};
use crate::{unitary, Error, Matrix, Result, C64};

/// Largest register [`CliffordTableau::to_unitary`] will densify.
pub const MAX_UNITARY_QUBITS: usize = 6;

/// Elementary Clifford gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => vec![q],
            CliffordGate::Cx(c, t) => vec![c, t],
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, CliffordGate::Cx(..))
    }

    /// Dense matrix on the gate's own qubits (control first for CNOT).
    pub fn matrix(&self) -> Matrix {
        match self {
            CliffordGate::H(_) => unitary::hadamard(),
            CliffordGate::S(_) => unitary::phase_s(),
            CliffordGate::Sdg(_) => unitary::phase_sdg(),
            CliffordGate::X(_) => unitary::pauli_x(),
            CliffordGate::Y(_) => unitary::pauli_y(),
            CliffordGate::Z(_) => unitary::pauli_z(),
            CliffordGate::Cx(..) => unitary::cnot(),
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= k {
                return Err(Error::QubitOutOfRange { index: q, n: k });
            }
        }
        if let CliffordGate::Cx(c, t) = self {
            if c == t {
                return Err(Error::InvalidArgument(format!("CNOT with control = target = {c}")));
            }
        }
        Ok(())
    }

    /// `U P U†` for this gate, by single-qubit rules.
    fn conjugate(&self, p: &PauliString) -> PauliString {
        let n = p.n();
        let (mut x, mut z) = (p.x_bits(), p.z_bits());
        let mut phase = p.phase_exponent() as i32;
        let bit = |m: u64, q: usize| (m >> q) & 1 == 1;
        match *self {
            CliffordGate::Cx(c, t) => {
                // X_c → X_c X_t, Z_t → Z_c Z_t; the sign flips for X_c Z_t
                // factors with matching parity (Y_c Y_t → −X_c Z_t etc.)
                let (xc, zc, xt, zt) = (bit(x, c), bit(z, c), bit(x, t), bit(z, t));
                if xc && zt && (xt == zc) {
                    phase += 2;
                }
                x ^= (xc as u64) << t;
                z ^= (zt as u64) << c;
            }
            g => {
                let q = g.qubits()[0];
                let letter = p.letter(q);
                let (new, sign) = single_qubit_image(g, letter);
                let (nx, nz) = new.bits();
                x = (x & !(1 << q)) | ((nx as u64) << q);
                z = (z & !(1 << q)) | ((nz as u64) << q);
                phase += sign;
            }
        }
        PauliString::new(n, x, z, phase.rem_euclid(4) as u8).expect("bits stay in range")
    }
}

/// Image of a single-qubit Pauli under a single-qubit Clifford, with the
/// phase exponent (0 or 2) acquired.
fn single_qubit_image(g: CliffordGate, p: Pauli) -> (Pauli, i32) {
    use Pauli::*;
    match (g, p) {
        (_, I) => (I, 0),
        (CliffordGate::H(_), X) => (Z, 0),
        (CliffordGate::H(_), Y) => (Y, 2),
        (CliffordGate::H(_), Z) => (X, 0),
        (CliffordGate::S(_), X) => (Y, 0),
        (CliffordGate::S(_), Y) => (X, 2),
        (CliffordGate::S(_), Z) => (Z, 0),
        (CliffordGate::Sdg(_), X) => (Y, 2),
        (CliffordGate::Sdg(_), Y) => (X, 0),
        (CliffordGate::Sdg(_), Z) => (Z, 0),
        (CliffordGate::X(_), X) => (X, 0),
        (CliffordGate::X(_), l) => (l, 2),
        (CliffordGate::Y(_), Y) => (Y, 0),
        (CliffordGate::Y(_), l) => (l, 2),
        (CliffordGate::Z(_), Z) => (Z, 0),
        (CliffordGate::Z(_), l) => (l, 2),
        (CliffordGate::Cx(..), _) => unreachable!("two-qubit gate"),
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliffordGate::H(q) => write!(f, "H{q}"),
            CliffordGate::S(q) => write!(f, "S{q}"),
            CliffordGate::Sdg(q) => write!(f, "Sdg{q}"),
            CliffordGate::X(q) => write!(f, "X{q}"),
            CliffordGate::Y(q) => write!(f, "Y{q}"),
            CliffordGate::Z(q) => write!(f, "Z{q}"),
            CliffordGate::Cx(c, t) => write!(f, "CX{c}{t}"),
        }
    }
}

impl FromStr for CliffordGate {
    type Err = Error;

    fn from_str(tok: &str) -> Result<Self> {
        let upper = tok.to_ascii_uppercase();
        let bad = || Error::Parse(format!("unknown Clifford gate token {tok:?}"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        if let Some(rest) = upper.strip_prefix("CNOT").or_else(|| upper.strip_prefix("CX")) {
            let digits: Vec<usize> = rest
                .chars()
                .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_>>()?;
            return match digits.as_slice() {
                [c, t] => Ok(CliffordGate::Cx(*c, *t)),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = upper.strip_prefix("SDG") {
            return Ok(CliffordGate::Sdg(num(rest)?));
        }
        let (head, rest) = upper.split_at(1.min(upper.len()));
        let q = num(rest)?;
        match head {
            "H" => Ok(CliffordGate::H(q)),
            "S" => Ok(CliffordGate::S(q)),
            "X" => Ok(CliffordGate::X(q)),
            "Y" => Ok(CliffordGate::Y(q)),
            "Z" => Ok(CliffordGate::Z(q)),
            _ => Err(bad()),
        }
    }
}

/// Parses a token circuit such as `"H0 S1 CX01"`.
pub fn parse_circuit(s: &str) -> Result<Vec<CliffordGate>> {
    s.split_whitespace().map(str::parse).collect()
}

/// Formats gates in the token format accepted by [`parse_circuit`].
pub fn format_circuit(gates: &[CliffordGate]) -> String {
    gates.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
}

/// Signed images of the `2k` generators under conjugation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    k: usize,
    /// `[X_0, .., X_{k-1}, Z_0, .., Z_{k-1}]`
    images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(k: usize) -> Self {
        let mut images = Vec::with_capacity(2 * k);
        for p in [Pauli::X, Pauli::Z] {
            for q in 0..k {
                images.push(PauliString::single(k, q, p).expect("q < k"));
            }
        }
        Self { k, images }
    }

    /// Builds a tableau from explicit images, validating commutation.
    pub fn from_images(k: usize, images: Vec<PauliString>) -> Result<Self> {
        if images.len() != 2 * k || images.iter().any(|p| p.n() != k) {
            return Err(Error::Dimension(format!("need {} images on {k} qubits", 2 * k)));
        }
        let t = Self { k, images };
        if !t.is_valid() {
            return Err(Error::InvalidArgument("images do not preserve commutation".into()));
        }
        Ok(t)
    }

    pub fn from_gates(k: usize, gates: &[CliffordGate]) -> Result<Self> {
        let mut t = Self::identity(k);
        for g in gates {
            t.apply(*g)?;
        }
        Ok(t)
    }

    pub fn from_circuit(k: usize, circuit: &str) -> Result<Self> {
        Self::from_gates(k, &parse_circuit(circuit)?)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    /// Image of `X_q`.
    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.images[q]
    }

    /// Image of `Z_q`.
    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.images[self.k + q]
    }

    /// Appends a gate acting after the current tableau.
    pub fn apply(&mut self, g: CliffordGate) -> Result<()> {
        g.check(self.k)?;
        for img in &mut self.images {
            *img = g.conjugate(img);
        }
        Ok(())
    }

    /// `U P U†` as a signed string.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.k {
            return Err(Error::Dimension(format!(
                "{}-qubit string under {}-qubit tableau",
                p.n(),
                self.k
            )));
        }
        // P = i^{phase + #Y} Π_q X_q^{x_q} Z_q^{z_q}
        let mut out = PauliString::identity(self.k)
            .with_phase(((p.phase_exponent() as u32 + p.y_count()) % 4) as u8);
        for q in 0..self.k {
            if (p.x_bits() >> q) & 1 == 1 {
                out = out.compose(self.x_image(q))?;
            }
            if (p.z_bits() >> q) & 1 == 1 {
                out = out.compose(self.z_image(q))?;
            }
        }
        Ok(out)
    }

    /// Tableau of `other · self` (self acts first).
    pub fn then(&self, other: &Self) -> Result<Self> {
        if other.k != self.k {
            return Err(Error::Dimension("composing tableaux of different size".into()));
        }
        let images = self
            .images
            .iter()
            .map(|img| other.conjugate(img))
            .collect::<Result<_>>()?;
        Ok(Self { k: self.k, images })
    }

    /// Tableau of `P · U` for a Pauli string `P`: signs flip on images that
    /// anticommute with `P`.
    pub fn left_multiply_pauli(&self, p: &PauliString) -> Self {
        let images = self
            .images
            .iter()
            .map(|img| {
                if p.commutes_unchecked(img) {
                    img.clone()
                } else {
                    img.with_phase(img.phase_exponent() + 2)
                }
            })
            .collect();
        Self { k: self.k, images }
    }

    /// Symplectic and Hermiticity check of the images.
    pub fn is_valid(&self) -> bool {
        let k = self.k;
        if self.images.iter().any(|p| !p.is_hermitian() || p.is_identity_string()) {
            return false;
        }
        for a in 0..2 * k {
            for b in (a + 1)..2 * k {
                let should_anticommute = b == a + k && a < k;
                if self.images[a].commutes_unchecked(&self.images[b]) == should_anticommute {
                    return false;
                }
            }
        }
        true
    }

    /// The `2k × 2k` GF(2) matrix whose column `g` holds the `(x | z)` bits of
    /// generator image `g`.
    pub fn symplectic_matrix(&self) -> Vec<Vec<u8>> {
        let k = self.k;
        let mut m = vec![vec![0u8; 2 * k]; 2 * k];
        for (g, img) in self.images.iter().enumerate() {
            for q in 0..k {
                m[q][g] = ((img.x_bits() >> q) & 1) as u8;
                m[k + q][g] = ((img.z_bits() >> q) & 1) as u8;
            }
        }
        m
    }

    /// Dense unitary with `U G U† = image(G)` for every generator. The global
    /// phase makes the first nonzero entry of column 0 real and positive.
    pub fn to_unitary(&self) -> Result<Matrix> {
        let k = self.k;
        if k > MAX_UNITARY_QUBITS {
            return Err(Error::Unsupported(format!(
                "dense Clifford unitaries limited to {MAX_UNITARY_QUBITS} qubits"
            )));
        }
        let d = 1usize << k;
        let zs: Vec<Matrix> = (0..k).map(|q| self.z_image(q).to_matrix()).collect();
        let xs: Vec<Matrix> = (0..k).map(|q| self.x_image(q).to_matrix()).collect();
        // projector onto U|0…0⟩, the joint +1 eigenspace of the Z images
        let mut proj = Matrix::identity(d, d);
        for z in &zs {
            proj = &proj * (Matrix::identity(d, d) + z) * C64::new(0.5, 0.0);
        }
        let col = (0..d)
            .max_by(|&a, &b| {
                proj.column(a)
                    .norm()
                    .partial_cmp(&proj.column(b).norm())
                    .expect("finite norms")
            })
            .expect("d ≥ 1");
        let mut psi0 = proj.column(col).into_owned();
        psi0 /= C64::new(psi0.norm(), 0.0);
        let lead = psi0
            .iter()
            .find(|v| v.norm() > 1e-12)
            .copied()
            .expect("nonzero stabilizer state");
        psi0 *= lead.conj() / lead.norm();
        let mut u = Matrix::zeros(d, d);
        for x in 0..d {
            let mut v = psi0.clone();
            for (q, xm) in xs.iter().enumerate() {
                if (x >> (k - 1 - q)) & 1 == 1 {
                    v = xm * v;
                }
            }
            u.set_column(x, &v);
        }
        Ok(u)
    }
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.k {
            writeln!(f, "X{q} -> {}", self.x_image(q))?;
        }
        for q in 0..self.k {
            writeln!(f, "Z{q} -> {}", self.z_image(q))?;
        }
        Ok(())
    }
}

/// Random Clifford from a word of `20 k²` generators drawn from `H`, `S`,
/// nearest-neighbour CNOTs and CNOTs on a random pair, plus one more
/// generator with probability 1/2 (a fixed-length word only reaches the
/// even-length coset). Every Clifford has nonzero probability; the
/// distribution is not uniform.
pub fn random_clifford<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CliffordTableau {
    random_clifford_word(k, rng).0
}

/// [`random_clifford`] together with the generating word.
pub fn random_clifford_word<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (CliffordTableau, Vec<CliffordGate>) {
    assert!(k >= 1, "need at least one qubit");
    let mut t = CliffordTableau::identity(k);
    let mut word = Vec::new();
    let len = 20 * k * k + rng.random_range(0..2);
    let kinds = if k == 1 { 2 } else { 4 };
    for _ in 0..len {
        let g = match rng.random_range(0..kinds) {
            0 => CliffordGate::H(rng.random_range(0..k)),
            1 => CliffordGate::S(rng.random_range(0..k)),
            2 => {
                let a = rng.random_range(0..k - 1);
                if rng.random::<bool>() {
                    CliffordGate::Cx(a, a + 1)
                } else {
                    CliffordGate::Cx(a + 1, a)
                }
            }
            _ => {
                let c = rng.random_range(0..k);
                let mut t = rng.random_range(0..k - 1);
                if t >= c {
                    t += 1;
                }
                CliffordGate::Cx(c, t)
            }
        };
        t.apply(g).expect("generated in range");
        word.push(g);
    }
    (t, word)
}

/// Every Clifford on `k ≤ 2` qubits modulo global phase (24 for one qubit,
/// 11520 for two), by breadth-first closure under `H`, `S` and CNOT. The
/// identity comes first.
pub fn enumerate_clifford_group(k: usize) -> Result<Vec<CliffordTableau>> {
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("Clifford enumeration for k = {k}")));
    }
    let mut gens: Vec<CliffordGate> = Vec::new();
    for q in 0..k {
        gens.push(CliffordGate::H(q));
        gens.push(CliffordGate::S(q));
    }
    if k == 2 {
        gens.push(CliffordGate::Cx(0, 1));
        gens.push(CliffordGate::Cx(1, 0));
    }
    let start = CliffordTableau::identity(k);
    let mut seen: HashSet<CliffordTableau> = HashSet::from([start.clone()]);
    let mut out = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for g in &gens {
            let mut next = t.clone();
            next.apply(*g)?;
            if seen.insert(next.clone()) {
                out.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::{embed, max_abs_diff, phase_distance};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// Independent oracle: multiply embedded gate matrices in circuit order.
    fn dense_circuit(k: usize, gates: &[CliffordGate]) -> Matrix {
        gates.iter().fold(Matrix::identity(1 << k, 1 << k), |acc, g| {
            embed(&g.matrix(), &g.qubits(), k).unwrap() * acc
        })
    }

    #[test]
    fn gate_tokens_round_trip() {
        let gates = parse_circuit("H0 S1 Sdg0 X1 Y0 Z1 CX01 CX10").unwrap();
        assert_eq!(gates[2], CliffordGate::Sdg(0));
        assert_eq!(gates[6], CliffordGate::Cx(0, 1));
        assert_eq!(format_circuit(&gates), "H0 S1 Sdg0 X1 Y0 Z1 CX01 CX10");
        assert!(parse_circuit("Q0").is_err());
        assert!(parse_circuit("CX0").is_err());
    }

    #[test]
    fn out_of_range_gate_rejected() {
        assert!(matches!(
            CliffordTableau::from_circuit(2, "H2"),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(CliffordTableau::from_circuit(2, "CX00").is_err());
    }

    #[test]
    fn empty_circuit_is_identity() {
        assert_eq!(CliffordTableau::from_circuit(2, "").unwrap(), CliffordTableau::identity(2));
    }

    #[test]
    fn cnot_generator_images() {
        let t = CliffordTableau::from_circuit(2, "CX01").unwrap();
        assert_eq!(t.z_image(0), &p("ZI"));
        assert_eq!(t.x_image(0), &p("XX"));
        assert_eq!(t.z_image(1), &p("ZZ"));
        assert_eq!(t.x_image(1), &p("IX"));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let t = CliffordTableau::from_circuit(1, "H0").unwrap();
        assert_eq!(t.x_image(0), &p("Z"));
        assert_eq!(t.z_image(0), &p("X"));
    }

    #[test]
    fn conjugation_examples() {
        let any = p("-YX");
        assert_eq!(CliffordTableau::identity(2).conjugate(&any).unwrap(), any);
        let cx = CliffordTableau::from_circuit(2, "CX01").unwrap();
        assert_eq!(cx.conjugate(&p("ZZ")).unwrap(), p("IZ"));
        let s = CliffordTableau::from_circuit(1, "S0").unwrap();
        assert_eq!(s.conjugate(&p("X")).unwrap(), p("Y"));
        assert!(s.conjugate(&p("XX")).is_err());
    }

    #[test]
    fn unitary_of_standard_tableaux() {
        assert!(max_abs_diff(&CliffordTableau::identity(2).to_unitary().unwrap(), &Matrix::identity(4, 4)) < 1e-12);
        let h = CliffordTableau::from_circuit(1, "H0").unwrap().to_unitary().unwrap();
        assert!(phase_distance(&h, &unitary::hadamard()) < 1e-12);
        let cx = CliffordTableau::from_circuit(2, "CX01").unwrap().to_unitary().unwrap();
        assert!(max_abs_diff(&cx, &unitary::cnot()) < 1e-12);
    }

    #[test]
    fn single_gate_rules_match_dense() {
        for tok in ["H0", "S0", "Sdg0", "X0", "Y0", "Z0", "CX01", "CX10"] {
            let gates = parse_circuit(tok).unwrap();
            let u = dense_circuit(2, &gates);
            let t = CliffordTableau::from_gates(2, &gates).unwrap();
            for s in PauliString::all(2) {
                let lhs = t.conjugate(&s).unwrap().to_matrix();
                let rhs = &u * s.to_matrix() * u.adjoint();
                assert!(max_abs_diff(&lhs, &rhs) < 1e-12, "{tok} on {s}");
            }
        }
    }

    #[test]
    fn one_qubit_group_has_24_distinct_actions() {
        let g = enumerate_clifford_group(1).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], CliffordTableau::identity(1));
        let set: HashSet<_> = g.iter().collect();
        assert_eq!(set.len(), 24);
    }

    #[test]
    fn two_qubit_group_order() {
        let g = enumerate_clifford_group(2).unwrap();
        assert_eq!(g.len(), 11520);
        assert!(g.iter().all(|t| t.is_valid()));
        assert!(enumerate_clifford_group(3).is_err());
    }

    #[test]
    fn random_cliffords_reach_all_single_qubit_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seen: HashSet<_> = (0..10_000).map(|_| random_clifford(1, &mut rng)).collect();
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn random_clifford_is_deterministic() {
        let a = random_clifford(2, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_clifford(2, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.is_valid());
        assert!(a.to_unitary().is_ok());
    }

    #[test]
    fn pauli_left_multiplication_matches_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_clifford(2, &mut rng);
        for m in PauliString::all(2) {
            let direct = t.left_multiply_pauli(&m);
            let pm = CliffordTableau::from_images(
                2,
                (0..4)
                    .map(|g| {
                        let gen = CliffordTableau::identity(2).images()[g].clone();
                        m.compose(&gen).unwrap().compose(&m).unwrap()
                    })
                    .collect(),
            )
            .unwrap();
            assert_eq!(direct, t.then(&pm).unwrap());
        }
    }

    fn arb_circuit(k: usize) -> impl Strategy<Value = Vec<CliffordGate>> {
        let gate = (0usize..7, 0..k, 0..k).prop_filter_map("distinct CNOT qubits", move |(kind, a, b)| {
            Some(match kind {
                0 => CliffordGate::H(a),
                1 => CliffordGate::S(a),
                2 => CliffordGate::Sdg(a),
                3 => CliffordGate::X(a),
                4 => CliffordGate::Y(a),
                5 => CliffordGate::Z(a),
                _ if a != b => CliffordGate::Cx(a, b),
                _ => return None,
            })
        });
        proptest::collection::vec(gate, 0..16)
    }

    fn arb_pauli(k: usize) -> impl Strategy<Value = PauliString> {
        let mask = (1u64 << k) - 1;
        (any::<u64>(), any::<u64>(), 0u8..4).prop_map(move |(x, z, ph)| PauliString::new(k, x & mask, z & mask, ph).unwrap())
    }

    proptest! {
        #[test]
        fn conjugation_matches_dense(gates in arb_circuit(3), s in arb_pauli(3)) {
            let t = CliffordTableau::from_gates(3, &gates).unwrap();
            let v = t.to_unitary().unwrap();
            let lhs = t.conjugate(&s).unwrap().to_matrix();
            let rhs = &v * s.to_matrix() * v.adjoint();
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
            prop_assert!(phase_distance(&v, &dense_circuit(3, &gates)) < 1e-10);
            prop_assert!(t.is_valid());
        }

        #[test]
        fn composition_is_sequential(a in arb_circuit(2), b in arb_circuit(2), c in arb_circuit(2)) {
            let ta = CliffordTableau::from_gates(2, &a).unwrap();
            let tb = CliffordTableau::from_gates(2, &b).unwrap();
            let tc = CliffordTableau::from_gates(2, &c).unwrap();
            let joined: Vec<_> = a.iter().chain(&b).copied().collect();
            prop_assert_eq!(ta.then(&tb).unwrap(), CliffordTableau::from_gates(2, &joined).unwrap());
            prop_assert_eq!(ta.then(&tb).unwrap().then(&tc).unwrap(), ta.then(&tb.then(&tc).unwrap()).unwrap());
        }

        #[test]
        fn symplectic_form_preserved(gates in arb_circuit(3)) {
            let t = CliffordTableau::from_gates(3, &gates).unwrap();
            let m = t.symplectic_matrix();
            // Mᵀ Ω M = Ω over GF(2), Ω = [[0, I], [I, 0]]
            let k = 3;
            for a in 0..2 * k {
                for b in 0..2 * k {
                    let mut s = 0u8;
                    for q in 0..k {
                        s ^= (m[q][a] & m[k + q][b]) ^ (m[k + q][a] & m[q][b]);
                    }
                    let expect = ((a + k == b) || (b + k == a)) as u8;
                    prop_assert_eq!(s, expect);
                }
            }
        }
    }
}
