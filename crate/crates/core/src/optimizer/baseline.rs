//! Parameterized baselines: parameter-shift gradient descent and SPSA.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{exact_energy, Circuit, ShotSampler};
use crate::hamiltonian::Hamiltonian;
use crate::optimizer::sweep::{EventKind, Trace};
use crate::optimizer::template::{fit_template, two_qubit_template, TEMPLATE_PARAMS};
use crate::{par, Error, Result};

/// Two-qubit template gates on fixed supports, all angles in one vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    n: usize,
    supports: Vec<[usize; 2]>,
    pub theta: Vec<f64>,
}

impl ParamCircuit {
    pub fn new(n: usize, supports: Vec<[usize; 2]>, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != supports.len() * TEMPLATE_PARAMS {
            return Err(Error::Dimension(format!(
                "{} angles for {} gates",
                theta.len(),
                supports.len()
            )));
        }
        let pc = Self { n, supports, theta };
        pc.to_circuit()?;
        Ok(pc)
    }

    /// Staircase layout with uniformly random angles.
    pub fn staircase<R: Rng + ?Sized>(n: usize, layers: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("staircase needs n ≥ 2".into()));
        }
        let supports: Vec<[usize; 2]> = (0..layers).flat_map(|_| (0..n - 1).map(|q| [q, q + 1])).collect();
        let theta = (0..supports.len() * TEMPLATE_PARAMS).map(|_| rng.random_range(-PI..PI)).collect();
        Self::new(n, supports, theta)
    }

    /// Fits every (two-qubit) gate of `c` by the template. Returns the
    /// parameterization and the worst gate fidelity reached.
    pub fn fit<R: Rng + ?Sized>(c: &Circuit, starts: usize, sweeps: usize, rng: &mut R) -> Result<(Self, f64)> {
        let mut supports = Vec::with_capacity(c.len());
        let mut theta = Vec::with_capacity(c.len() * TEMPLATE_PARAMS);
        let mut worst = 1.0f64;
        for g in c.gates() {
            let [a, b] = g.support[..] else {
                return Err(Error::Unsupported("only two-qubit gates can be parameterized".into()));
            };
            let seeds: Vec<Vec<f64>> = (0..starts.max(1))
                .map(|_| (0..TEMPLATE_PARAMS).map(|_| rng.random_range(-PI..PI)).collect())
                .collect();
            let (th, fid) = fit_template(&g.matrix, &seeds, sweeps)?;
            worst = worst.min(fid);
            supports.push([a, b]);
            theta.extend(th);
        }
        Ok((Self::new(c.n(), supports, theta)?, worst))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_gates(&self) -> usize {
        self.supports.len()
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        self.circuit_with(&self.theta)
    }

    fn circuit_with(&self, theta: &[f64]) -> Result<Circuit> {
        let mut c = Circuit::new(self.n);
        for (g, s) in self.supports.iter().enumerate() {
            let u = two_qubit_template(&theta[g * TEMPLATE_PARAMS..(g + 1) * TEMPLATE_PARAMS])?;
            c.push(u, s.to_vec())?;
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    #[default]
    ParameterShiftGd,
    Spsa,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub max_iters: usize,
    pub max_total_shots: Option<u64>,
    /// Stop once the exact energy reaches this value.
    pub target_energy: Option<f64>,
    /// Gradient-descent learning rate.
    pub eta: f64,
    /// Shots per shifted circuit.
    pub shots_per_shift: u64,
    /// Use exact expectation values (no shot noise, no shot accounting).
    pub exact: bool,
    pub spsa_a: f64,
    pub spsa_c: f64,
    /// Stability constant `A` of the step-size schedule.
    pub spsa_big_a: f64,
    /// Shots per SPSA evaluation.
    pub spsa_shots: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            method: BaselineMethod::ParameterShiftGd,
            max_iters: 200,
            max_total_shots: None,
            target_energy: None,
            eta: 0.15,
            shots_per_shift: 100,
            exact: false,
            spsa_a: 0.2,
            spsa_c: 0.1,
            spsa_big_a: 20.0,
            spsa_shots: 10_000,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.eta, self.spsa_a, self.spsa_c].iter().all(|v| v.is_finite() && *v > 0.0);
        if !positive || !(self.spsa_big_a.is_finite() && self.spsa_big_a >= 0.0) {
            return Err(Error::InvalidArgument("baseline step sizes must be positive and finite".into()));
        }
        if !self.exact && (self.shots_per_shift == 0 || self.spsa_shots == 0) {
            return Err(Error::InvalidArgument("sampled baselines need a positive shot count".into()));
        }
        if self.max_total_shots == Some(0) {
            return Err(Error::InvalidArgument("max_total_shots must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub params: ParamCircuit,
    pub trace: Trace,
    pub iterations: usize,
}

/// Estimate of the energy of `c` from `shots` single shots, or the exact value
/// when `shots == 0`.
fn energy_estimate<R: Rng + ?Sized>(c: &Circuit, h: &Hamiltonian, shots: u64, rng: &mut R) -> Result<f64> {
    let sampler = ShotSampler::new(&c.run()?, h)?;
    if shots == 0 {
        return Ok(sampler.mean());
    }
    Ok((0..shots).map(|_| sampler.sample(rng)).sum::<f64>() / shots as f64)
}

/// Runs the configured baseline from `start`. In parameter-shift mode one
/// iteration evaluates `2 · 15 · G` distinct circuits; SPSA evaluates two.
pub fn run_baseline<R: Rng + ?Sized>(
    cfg: &BaselineConfig,
    start: &ParamCircuit,
    h: &Hamiltonian,
    rng: &mut R,
) -> Result<BaselineResult> {
    cfg.validate()?;
    if start.n != h.n() {
        return Err(Error::Dimension("circuit and Hamiltonian sizes differ".into()));
    }
    let mut pc = start.clone();
    let mut trace = Trace::default();
    let mut energy = exact_energy(&pc.to_circuit()?, h)?;
    trace.push(EventKind::Init, None, 0, 0, energy);
    let base: u64 = rng.random();
    let np = pc.n_params();
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        if cfg.target_energy.is_some_and(|t| energy <= t)
            || cfg.max_total_shots.is_some_and(|m| trace.totals().0 >= m)
        {
            break;
        }
        let (shots, circuits) = match cfg.method {
            BaselineMethod::ParameterShiftGd => {
                let per = if cfg.exact { 0 } else { cfg.shots_per_shift };
                let vals = par::map_range(2 * np, |j| {
                    let mut th = pc.theta.clone();
                    th[j / 2] += if j % 2 == 0 { FRAC_PI_2 } else { -FRAC_PI_2 };
                    let mut r = par::task_rng(base, (it * 2 * np + j) as u64);
                    energy_estimate(&pc.circuit_with(&th)?, h, per, &mut r)
                })
                .into_iter()
                .collect::<Result<Vec<f64>>>()?;
                for m in 0..np {
                    pc.theta[m] -= cfg.eta * (vals[2 * m] - vals[2 * m + 1]) / 2.0;
                }
                (2 * np as u64 * per, 2 * np as u64)
            }
            BaselineMethod::Spsa => {
                let k = (it + 1) as f64;
                let ak = cfg.spsa_a / (k + cfg.spsa_big_a).powf(0.602);
                let ck = cfg.spsa_c / k.powf(0.101);
                let mut r = par::task_rng(base, it as u64);
                let delta: Vec<f64> = (0..np).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
                let per = if cfg.exact { 0 } else { cfg.spsa_shots };
                let shifted = |sign: f64| -> Vec<f64> {
                    pc.theta.iter().zip(&delta).map(|(t, d)| t + sign * ck * d).collect()
                };
                let fp = energy_estimate(&pc.circuit_with(&shifted(1.0))?, h, per, &mut r)?;
                let fm = energy_estimate(&pc.circuit_with(&shifted(-1.0))?, h, per, &mut r)?;
                let g = (fp - fm) / (2.0 * ck);
                for (t, d) in pc.theta.iter_mut().zip(&delta) {
                    *t -= ak * g * d;
                }
                (2 * per, 2)
            }
        };
        energy = exact_energy(&pc.to_circuit()?, h)?;
        trace.push(EventKind::Iteration, None, shots, circuits, energy);
        iterations += 1;
    }
    Ok(BaselineResult { params: pc, trace, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_iterations_log_initial_energy_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = Hamiltonian::ising(3, 1.0, 1.0).unwrap();
        let pc = ParamCircuit::staircase(3, 1, &mut rng).unwrap();
        let cfg = BaselineConfig { max_iters: 0, ..Default::default() };
        let r = run_baseline(&cfg, &pc, &h, &mut rng).unwrap();
        assert_eq!(r.trace.events.len(), 1);
        assert_eq!(r.trace.events[0].event, EventKind::Init);
    }

    #[test]
    fn exact_gradient_descent_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = Hamiltonian::ising(4, 1.0, 1.0).unwrap();
        let pc = ParamCircuit::staircase(4, 1, &mut rng).unwrap();
        let cfg = BaselineConfig { max_iters: 30, exact: true, eta: 0.05, ..Default::default() };
        let r = run_baseline(&cfg, &pc, &h, &mut rng).unwrap();
        for w in r.trace.events.windows(2) {
            assert!(w[1].energy < w[0].energy, "{} -> {}", w[0].energy, w[1].energy);
        }
    }

    #[test]
    fn circuit_accounting() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = Hamiltonian::ising(4, 1.0, 1.0).unwrap();
        let pc = ParamCircuit::staircase(4, 1, &mut rng).unwrap();
        let g = pc.n_gates() as u64;
        let r = run_baseline(&BaselineConfig { max_iters: 1, ..Default::default() }, &pc, &h, &mut rng).unwrap();
        assert_eq!(r.trace.totals(), (2 * 15 * g * 100, 2 * 15 * g));
        let cfg = BaselineConfig { method: BaselineMethod::Spsa, max_iters: 3, ..Default::default() };
        let r = run_baseline(&cfg, &pc, &h, &mut rng).unwrap();
        assert_eq!(r.trace.totals(), (3 * 20_000, 6));
    }

    #[test]
    fn fit_reproduces_a_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Circuit::staircase_ansatz(3, 1, &mut rng).unwrap();
        let h = Hamiltonian::ising(3, 1.0, 1.0).unwrap();
        let (pc, worst) = ParamCircuit::fit(&c, 4, 200, &mut rng).unwrap();
        assert!(worst > 0.999);
        let e0 = exact_energy(&c, &h).unwrap();
        let e1 = exact_energy(&pc.to_circuit().unwrap(), &h).unwrap();
        assert!((e0 - e1).abs() < 0.1);
    }
}
