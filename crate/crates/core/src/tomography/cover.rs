//! Clifford covers of the measurable pair space and the greedy search.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::{enumerate_clifford_group, format_circuit, parse_circuit, random_clifford, CliffordGate, CliffordTableau};
use crate::tomography::tableaux::pairing;
use crate::tomography::uniform::two_design_trace;
use crate::{par, Error, Result};

/// Shipped 17-group two-qubit cover.
pub const BUILTIN_COVER_2Q_JSON: &str = include_str!("../../data/cover_2q.json");

#[derive(Clone, Debug, PartialEq)]
pub struct CoverGroup {
    pub tableau: CliffordTableau,
    /// Generator circuit, first gate acting first.
    pub circuit: Vec<CliffordGate>,
    pub cnots: usize,
}

impl CoverGroup {
    pub fn from_circuit(k: usize, circuit: Vec<CliffordGate>) -> Result<Self> {
        let tableau = CliffordTableau::from_gates(k, &circuit)?;
        let cnots = circuit.iter().filter(|g| g.is_cnot()).count();
        Ok(Self { tableau, circuit, cnots })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordCover {
    k: usize,
    groups: Vec<CoverGroup>,
    provenance: String,
}

#[derive(Serialize, Deserialize)]
struct CoverFile {
    k: usize,
    provenance: String,
    groups: Vec<CoverLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sha256: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CoverLine {
    circuit: String,
    cnots: usize,
}

fn checksum(lines: &[CoverLine]) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(format!("{};{}\n", l.circuit, l.cnots).as_bytes());
    }
    hex::encode(h.finalize())
}

impl CliffordCover {
    pub fn new(k: usize, groups: Vec<CoverGroup>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(g) = groups.iter().find(|g| g.tableau.k() != k) {
            return Err(Error::Dimension(format!("{}-qubit group in a {k}-qubit cover", g.tableau.k())));
        }
        Ok(Self { k, groups, provenance: provenance.into() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn groups(&self) -> &[CoverGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Number of distinct circuits, `G · 4^k`.
    pub fn total_gates(&self) -> usize {
        self.groups.len() << (2 * self.k)
    }

    pub fn total_cnots(&self) -> usize {
        self.groups.iter().map(|g| g.cnots).sum()
    }

    pub fn max_cnots(&self) -> usize {
        self.groups.iter().map(|g| g.cnots).max().unwrap_or(0)
    }

    /// Mean CNOT count per generator as a reduced fraction.
    pub fn mean_cnots(&self) -> (usize, usize) {
        let (n, d) = (self.total_cnots(), self.groups.len().max(1));
        let g = gcd(n, d);
        (n / g, d / g)
    }

    /// Number of groups probing each pair, flat index `i·4^k + j`.
    pub fn multiplicity(&self) -> Vec<u32> {
        let nb = 1usize << (2 * self.k);
        let mut c = vec![0u32; nb * nb];
        for g in &self.groups {
            let (pi, _) = pairing(&g.tableau);
            for (j, &i) in pi.iter().enumerate() {
                c[i * nb + j] += 1;
            }
        }
        c
    }

    /// Non-identity pairs no group probes.
    pub fn missing_pairs(&self) -> Vec<(usize, usize)> {
        let nb = 1usize << (2 * self.k);
        let c = self.multiplicity();
        (1..nb)
            .flat_map(|i| (1..nb).map(move |j| (i, j)))
            .filter(|&(i, j)| c[i * nb + j] == 0)
            .collect()
    }

    pub fn check_complete(&self) -> Result<()> {
        let missing = self.missing_pairs();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteCover { missing })
        }
    }

    /// `Tr[(MᵀM/N)⁺]` of the expanded gate set: the second moment is
    /// diagonal with `1` on the constant pair and `c_p / G` on pair `p`.
    pub fn trace_inv_pseudo(&self) -> f64 {
        let g = self.groups.len() as f64;
        let nb = 1usize << (2 * self.k);
        let c = self.multiplicity();
        1.0 + (1..nb * nb)
            .filter(|&idx| c[idx] > 0 && idx / nb != 0 && idx % nb != 0)
            .map(|idx| g / f64::from(c[idx]))
            .sum::<f64>()
    }

    /// Shot overhead relative to a 2-design, `traceInvPseudo / (1 + (d²−1)³)`.
    pub fn overhead_ratio(&self) -> f64 {
        self.trace_inv_pseudo() / two_design_trace(self.k)
    }

    fn lines(&self) -> Vec<CoverLine> {
        self.groups
            .iter()
            .map(|g| CoverLine { circuit: format_circuit(&g.circuit), cnots: g.cnots })
            .collect()
    }

    /// Hex SHA-256 over the lines `"{circuit};{cnots}\n"`.
    pub fn checksum(&self) -> String {
        checksum(&self.lines())
    }

    pub fn to_json(&self) -> Result<String> {
        let lines = self.lines();
        let file = CoverFile {
            k: self.k,
            provenance: self.provenance.clone(),
            sha256: Some(checksum(&lines)),
            groups: lines,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses a cover file, checking the checksum (when present), the declared
    /// CNOT counts and completeness.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: CoverFile = serde_json::from_str(s)?;
        if let Some(sum) = &file.sha256 {
            let actual = checksum(&file.groups);
            if &actual != sum {
                return Err(Error::Verification(format!("cover checksum {actual} does not match {sum}")));
            }
        }
        let groups = file
            .groups
            .iter()
            .enumerate()
            .map(|(n, line)| {
                let g = CoverGroup::from_circuit(file.k, parse_circuit(&line.circuit)?)?;
                if g.cnots != line.cnots {
                    return Err(Error::Verification(format!(
                        "group {n} declares {} CNOTs but its circuit has {}",
                        line.cnots, g.cnots
                    )));
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        let cover = Self::new(file.k, groups, file.provenance)?;
        cover.check_complete()?;
        Ok(cover)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// The shipped 17-group two-qubit cover, verified on every call.
pub fn builtin_cover_2q() -> Result<CliffordCover> {
    let cover = CliffordCover::from_json(BUILTIN_COVER_2Q_JSON)
        .map_err(|e| Error::Verification(format!("builtin cover data is corrupt: {e}")))?;
    if cover.k() != 2 || cover.len() != 17 {
        return Err(Error::Verification(format!(
            "builtin cover has k = {} and {} groups",
            cover.k(),
            cover.len()
        )));
    }
    Ok(cover)
}

/// The three-group one-qubit cover: the identity and the two cyclic
/// Cliffords `X → Y → Z → X` and its inverse, up to signs.
pub fn minimal_cover_1q() -> Result<CliffordCover> {
    let cyc = |shift: usize| vec![0, 1 + shift % 3, 1 + (shift + 1) % 3, 1 + (shift + 2) % 3];
    let group = enumerate_clifford_group(1)?;
    let groups = (0..3)
        .map(|s| {
            let want = if s == 0 { vec![0, 1, 2, 3] } else { cyc(s) };
            let t = group
                .iter()
                .find(|t| pairing(t).0 == want)
                .ok_or_else(|| Error::Verification("cyclic Clifford not found".into()))?;
            CoverGroup::from_circuit(1, min_cnot_circuit(t)?)
        })
        .collect::<Result<_>>()?;
    let cover = CliffordCover::new(1, groups, "builtin: one-qubit identity and cyclic Cliffords")?;
    cover.check_complete()?;
    Ok(cover)
}

/// Minimal-CNOT generator words of every Clifford on `k ≤ 2` qubits, by
/// Dijkstra over `H`, `S` and CNOT with cost `(CNOTs, length)`.
struct CliffordCatalog {
    words: HashMap<CliffordTableau, Vec<CliffordGate>>,
}

fn catalog(k: usize) -> Result<&'static CliffordCatalog> {
    static CACHE: [OnceLock<CliffordCatalog>; 2] = [OnceLock::new(), OnceLock::new()];
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("Clifford catalog for k = {k}")));
    }
    Ok(CACHE[k - 1].get_or_init(|| build_catalog(k)))
}

fn build_catalog(k: usize) -> CliffordCatalog {
    let mut gens = Vec::new();
    for q in 0..k {
        gens.push(CliffordGate::H(q));
        gens.push(CliffordGate::S(q));
    }
    if k == 2 {
        gens.push(CliffordGate::Cx(0, 1));
        gens.push(CliffordGate::Cx(1, 0));
    }
    let mut nodes = vec![CliffordTableau::identity(k)];
    let mut index = HashMap::from([(nodes[0].clone(), 0usize)]);
    let mut best = vec![(0usize, 0usize)];
    let mut parent: Vec<Option<(usize, CliffordGate)>> = vec![None];
    let mut heap = BinaryHeap::from([Reverse(((0usize, 0usize), 0usize))]);
    while let Some(Reverse((cost, node))) = heap.pop() {
        if cost > best[node] {
            continue;
        }
        for &g in &gens {
            let mut t = nodes[node].clone();
            t.apply(g).expect("generators in range");
            let c = (cost.0 + usize::from(g.is_cnot()), cost.1 + 1);
            let id = match index.get(&t) {
                Some(&id) if best[id] <= c => continue,
                Some(&id) => id,
                None => {
                    nodes.push(t.clone());
                    best.push(c);
                    parent.push(None);
                    index.insert(t, nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            best[id] = c;
            parent[id] = Some((node, g));
            heap.push(Reverse((c, id)));
        }
    }
    let words = nodes
        .iter()
        .enumerate()
        .map(|(id, t)| {
            let mut w = Vec::new();
            let mut cur = id;
            while let Some((p, g)) = parent[cur] {
                w.push(g);
                cur = p;
            }
            w.reverse();
            (t.clone(), w)
        })
        .collect();
    CliffordCatalog { words }
}

/// Shortest generator word with the fewest CNOTs for a Clifford on `k ≤ 2`
/// qubits.
pub fn min_cnot_circuit(t: &CliffordTableau) -> Result<Vec<CliffordGate>> {
    let cat = catalog(t.k())?;
    cat.words
        .get(t)
        .cloned()
        .ok_or_else(|| Error::Verification("tableau missing from the Clifford catalog".into()))
}

/// A [`random_clifford`] draw together with its minimal-CNOT circuit.
pub fn random_clifford_with_circuit<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<CoverGroup> {
    let tableau = random_clifford(k, rng);
    let circuit = min_cnot_circuit(&tableau)?;
    let cnots = circuit.iter().filter(|g| g.is_cnot()).count();
    Ok(CoverGroup { tableau, circuit, cnots })
}

/// Number of Clifford-group elements, for sanity checks on the catalog.
pub fn catalog_size(k: usize) -> Result<usize> {
    Ok(catalog(k)?.words.len())
}

struct Candidate {
    group: CoverGroup,
    /// Flat indices of the non-identity pairs it probes.
    pairs: Vec<usize>,
}

fn draw_pool<R: Rng + ?Sized>(k: usize, size: usize, rng: &mut R) -> Result<Vec<Candidate>> {
    let nb = 1usize << (2 * k);
    (0..size)
        .map(|_| {
            let group = random_clifford_with_circuit(k, rng)?;
            let (pi, _) = pairing(&group.tableau);
            let pairs = (1..nb).map(|j| pi[j] * nb + j).collect();
            Ok(Candidate { group, pairs })
        })
        .collect()
}

/// One greedy pass: repeatedly add a uniformly chosen minimal-overlap
/// candidate from the pool, redrawing the pool when no candidate adds a new
/// pair.
fn greedy_pass<R: Rng + ?Sized>(k: usize, pool_size: usize, rng: &mut R) -> Result<Vec<CoverGroup>> {
    let nb = 1usize << (2 * k);
    let target = (nb - 1) * (nb - 1);
    let mut covered = vec![false; nb * nb];
    let mut n_covered = 0;
    let mut groups = Vec::new();
    let mut pool = draw_pool(k, pool_size, rng)?;
    while n_covered < target {
        let overlaps: Vec<usize> = pool
            .iter()
            .map(|c| c.pairs.iter().filter(|&&p| covered[p]).count())
            .collect();
        let min = overlaps.iter().copied().min().unwrap_or(nb - 1);
        if min == nb - 1 {
            pool = draw_pool(k, pool_size, rng)?;
            continue;
        }
        let ties: Vec<usize> = (0..pool.len()).filter(|&i| overlaps[i] == min).collect();
        let pick = pool.swap_remove(ties[rng.random_range(0..ties.len())]);
        for &p in &pick.pairs {
            if !covered[p] {
                covered[p] = true;
                n_covered += 1;
            }
        }
        groups.push(pick.group);
    }
    Ok(groups)
}

/// Greedy cover search: `restarts` independent passes (each with its own
/// stream), each drawing pools of `pool_size` random Cliffords. Returns the
/// cover with the fewest groups, the earliest restart on ties.
pub fn greedy_cover_search<R: Rng + ?Sized>(
    k: usize,
    pool_size: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<CliffordCover> {
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("cover search for k = {k}")));
    }
    if pool_size == 0 || restarts == 0 {
        return Err(Error::InvalidArgument("pool_size and restarts must be positive".into()));
    }
    let seed: u64 = rng.random();
    let runs = par::map_range(restarts, |r| greedy_pass(k, pool_size, &mut par::task_rng(seed, r as u64)));
    let mut best: Option<(usize, Vec<CoverGroup>)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let groups = run?;
        if best.as_ref().is_none_or(|(_, b)| groups.len() < b.len()) {
            best = Some((r, groups));
        }
    }
    let (r, groups) = best.expect("restarts > 0");
    CliffordCover::new(
        k,
        groups,
        format!("greedy search: k = {k}, pool {pool_size}, {restarts} restarts, seed {seed}, best restart {r}"),
    )
}
