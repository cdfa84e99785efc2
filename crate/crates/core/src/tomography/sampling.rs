//! Cost oracles and shot collection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::environment::{EnvironmentTensor, SlotSampler};
use crate::hamiltonian::Hamiltonian;
use crate::tomography::gateset::GateSet;
use crate::{par, Matrix, Result};

/// Source of cost evaluations for one gate slot.
#[derive(Clone, Copy, Debug)]
pub enum CostOracle<'a> {
    /// Single-shot measurements of the circuit with the gate substituted.
    Shots(&'a SlotSampler),
    /// Noiseless: every "shot" returns `f(U)` computed from the tensor.
    Exact(&'a EnvironmentTensor),
}

/// Sample mean and unbiased sample variance of a run of shots.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShotMoments {
    pub shots: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ShotMoments {
    pub fn mean(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.sum / self.shots as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.shots < 2 {
            return 0.0;
        }
        let n = self.shots as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn push(&mut self, y: f64) {
        self.shots += 1;
        self.sum += y;
        self.sum_sq += y * y;
    }

    pub fn merge(&mut self, other: &Self) {
        self.shots += other.shots;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

impl CostOracle<'_> {
    pub fn k(&self) -> usize {
        match self {
            CostOracle::Shots(s) => s.k(),
            CostOracle::Exact(e) => e.k(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CostOracle::Exact(_))
    }

    /// `shots` single-shot values with gate `u` in the slot.
    pub fn samples<R: Rng + ?Sized>(&self, u: &Matrix, shots: u64, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            CostOracle::Exact(e) => Ok(vec![e.cost(u)?; shots as usize]),
            CostOracle::Shots(s) if shots < 4 => (0..shots).map(|_| s.single_shot(u, rng)).collect(),
            CostOracle::Shots(s) => {
                let sampler = s.gate_sampler(u)?;
                Ok((0..shots).map(|_| sampler.sample(rng)).collect())
            }
        }
    }

    /// Moments of `shots` single-shot values, without storing them.
    pub fn moments<R: Rng + ?Sized>(&self, u: &Matrix, shots: u64, rng: &mut R) -> Result<ShotMoments> {
        let mut m = ShotMoments::default();
        match self {
            CostOracle::Exact(e) => {
                let f = e.cost(u)?;
                let n = shots as f64;
                m = ShotMoments { shots, sum: f * n, sum_sq: f * f * n };
            }
            CostOracle::Shots(s) if shots < 4 => {
                for _ in 0..shots {
                    m.push(s.single_shot(u, rng)?);
                }
            }
            CostOracle::Shots(s) => {
                let sampler = s.gate_sampler(u)?;
                for _ in 0..shots {
                    m.push(sampler.sample(rng));
                }
            }
        }
        Ok(m)
    }

    /// Mean of `shots` single-shot values.
    pub fn mean<R: Rng + ?Sized>(&self, u: &Matrix, shots: u64, rng: &mut R) -> Result<f64> {
        Ok(self.moments(u, shots, rng)?.mean())
    }
}

/// Single-shot outcomes `(gate index into the gate set, value)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotBatch {
    pub samples: Vec<(usize, f64)>,
    /// Free-form identifier of the probed circuit.
    pub circuit_id: String,
    pub gate_index: usize,
    pub seed: u64,
}

impl ShotBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-gate moments over `n_gates` gates.
    pub fn moments(&self, n_gates: usize) -> Vec<ShotMoments> {
        let mut out = vec![ShotMoments::default(); n_gates];
        for &(g, y) in &self.samples {
            out[g].push(y);
        }
        out
    }
}

/// Draws `n_shots` shots over `gs` through `oracle`. Shots are assigned to
/// gates per the set's sampling mode, then every gate's shots come from an
/// independent stream, so the batch does not depend on the thread count.
/// Samples are stored grouped by gate.
pub fn collect_oracle_samples<R: Rng + ?Sized>(
    oracle: &CostOracle<'_>,
    gs: &GateSet,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotBatch> {
    let seed: u64 = rng.random();
    let counts = gs.allocate(n_shots, rng);
    let per_gate = par::map_range(gs.len(), |g| {
        let mut r = par::task_rng(seed, g as u64);
        oracle.samples(&gs.gates()[g], counts[g], &mut r)
    });
    let mut samples = Vec::with_capacity(n_shots as usize);
    for (g, vals) in per_gate.into_iter().enumerate() {
        samples.extend(vals?.into_iter().map(|y| (g, y)));
    }
    Ok(ShotBatch { samples, circuit_id: String::new(), gate_index: 0, seed })
}

/// [`collect_oracle_samples`] on gate `gate_index` of circuit `c`.
pub fn collect_samples<R: Rng + ?Sized>(
    c: &Circuit,
    h: &Hamiltonian,
    gate_index: usize,
    gs: &GateSet,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotBatch> {
    let slot = SlotSampler::new(c, h, gate_index)?;
    let mut batch = collect_oracle_samples(&CostOracle::Shots(&slot), gs, n_shots, rng)?;
    batch.gate_index = gate_index;
    batch.circuit_id = format!("n{}-g{}", c.n(), c.len());
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::exact_energy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Circuit, Hamiltonian) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (
            Circuit::staircase_ansatz(3, 1, &mut rng).unwrap(),
            Hamiltonian::ising(3, 1.0, 0.5).unwrap(),
        )
    }

    #[test]
    fn cycle_mode_samples_each_gate_once() {
        let (c, h) = setup();
        let gs = GateSet::paulis(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = collect_samples(&c, &h, 0, &gs, 16, &mut rng).unwrap();
        let gates: Vec<usize> = b.samples.iter().map(|s| s.0).collect();
        assert_eq!(gates, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_under_seed() {
        let (c, h) = setup();
        let gs = GateSet::paulis(2);
        let a = collect_samples(&c, &h, 1, &gs, 200, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = collect_samples(&c, &h, 1, &gs, 200, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn per_gate_means_converge_to_exact_costs() {
        let (c, h) = setup();
        let gs = GateSet::paulis(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shots = 16 * 20_000;
        let b = collect_samples(&c, &h, 0, &gs, shots, &mut rng).unwrap();
        for (g, m) in b.moments(16).iter().enumerate() {
            let exact = exact_energy(&c.substitute_gate(0, &gs.gates()[g]).unwrap(), &h).unwrap();
            let se = (m.variance() / m.shots as f64).sqrt();
            assert!((m.mean() - exact).abs() < 5.0 * se + 1e-12, "gate {g}: {} vs {exact}", m.mean());
        }
    }

    #[test]
    fn exact_oracle_repeats_the_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = EnvironmentTensor::random_hermitian(1, &mut rng).unwrap();
        let u = crate::unitary::haar_random(2, &mut rng);
        let m = CostOracle::Exact(&e).moments(&u, 10, &mut rng).unwrap();
        assert!((m.mean() - e.cost(&u).unwrap()).abs() < 1e-12);
        assert!(m.variance() < 1e-9);
    }
}
