//! Gate-by-gate sweeps and the event trace shared with the baselines.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{exact_energy, Circuit};
use crate::environment::{exact_environment, EnvironmentTensor, SlotSampler};
use crate::hamiltonian::Hamiltonian;
use crate::optimizer::gate::{optimal_gate_from, GateOptConfig};
use crate::tomography::cover::{builtin_cover_2q, minimal_cover_1q};
use crate::tomography::sampling::CostOracle;
use crate::tomography::tableaux::tableaux_tomography;
use crate::tomography::uniform::{uniform_tomography, UniformEstimator, UniformSource};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Init,
    Gate,
    Iteration,
    SweepEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEvent {
    pub event: EventKind,
    pub gate_index: Option<usize>,
    pub cum_shots: u64,
    pub cum_circuits: u64,
    /// Exact energy after the event.
    pub energy: f64,
}

/// Resource/energy log. Shots and circuits are cumulative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn last_energy(&self) -> Option<f64> {
        self.events.last().map(|e| e.energy)
    }

    pub fn totals(&self) -> (u64, u64) {
        self.events.last().map_or((0, 0), |e| (e.cum_shots, e.cum_circuits))
    }

    pub(crate) fn push(&mut self, event: EventKind, gate_index: Option<usize>, shots: u64, circuits: u64, energy: f64) {
        let (s, c) = self.totals();
        self.events.push(TraceEvent {
            event,
            gate_index,
            cum_shots: s + shots,
            cum_circuits: c + circuits,
            energy,
        });
    }

    /// First event whose energy is at or below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<&TraceEvent> {
        self.events.iter().find(|e| e.energy <= threshold)
    }

    /// CSV with header `event,gate_index,cum_shots,cum_circuits,energy`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for e in &self.events {
            wr.serialize(e).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TomographyMethod {
    /// Tableau groups over the builtin cover (minimal 3-group cover at k = 1).
    #[default]
    Tableaux,
    /// Regression over the cycled Clifford group.
    CliffordRegression,
    /// Closed-form shadow over the cycled Clifford group.
    CliffordShadow,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Forward,
    #[default]
    ForwardBackward,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub tomography: TomographyMethod,
    /// Tomography shots per gate, split evenly over the circuits.
    pub shots_per_gate: u64,
    pub order: SweepOrder,
    pub max_sweeps: usize,
    pub max_total_shots: Option<u64>,
    /// Stop once the exact energy reaches this value.
    pub target_energy: Option<f64>,
    /// Stop after a sweep that lowers the exact energy by less than this.
    pub stall: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tomography: TomographyMethod::Tableaux,
            shots_per_gate: 50_000,
            order: SweepOrder::ForwardBackward,
            max_sweeps: 10,
            max_total_shots: None,
            target_energy: None,
            stall: 1e-6,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots_per_gate == 0 || self.max_sweeps == 0 || self.max_total_shots == Some(0) {
            return Err(Error::InvalidArgument("sweep budgets must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub circuit: Circuit,
    pub trace: Trace,
    pub sweeps: usize,
    /// True when the stall criterion ended the run.
    pub stalled: bool,
}

/// Sampled environment of one slot and the shots and circuits it used.
pub fn estimate_environment<R: Rng + ?Sized>(
    c: &Circuit,
    h: &Hamiltonian,
    gate_index: usize,
    method: TomographyMethod,
    shots: u64,
    rng: &mut R,
) -> Result<(EnvironmentTensor, u64, u64)> {
    let slot = SlotSampler::new(c, h, gate_index)?;
    let oracle = CostOracle::Shots(&slot);
    let k = slot.k();
    match method {
        TomographyMethod::Tableaux => {
            let cover = match k {
                1 => minimal_cover_1q()?,
                2 => builtin_cover_2q()?,
                _ => return Err(Error::Unsupported(format!("tableaux tomography of a {k}-qubit gate"))),
            };
            let per = (shots / cover.total_gates() as u64).max(1);
            let r = tableaux_tomography(&oracle, &cover, per, rng)?;
            Ok((r.estimate, r.shots_used, r.gates_used as u64))
        }
        TomographyMethod::CliffordRegression | TomographyMethod::CliffordShadow => {
            let est = if method == TomographyMethod::CliffordShadow {
                UniformEstimator::ClosedFormShadow
            } else {
                UniformEstimator::Regression
            };
            let r = uniform_tomography(&oracle, shots, UniformSource::CliffordGroup, est, rng)?;
            Ok((r.estimate, r.shots_used, r.gates_used as u64))
        }
    }
}

/// Replaces gates one at a time by the minimizer of their (exact or
/// estimated) environment, logging the exact energy after every event.
pub fn sweep_optimize<R: Rng + ?Sized>(
    c: &Circuit,
    h: &Hamiltonian,
    sweep: &SweepConfig,
    gate_cfg: &GateOptConfig,
    mode: SweepMode,
    rng: &mut R,
) -> Result<SweepResult> {
    sweep.validate()?;
    gate_cfg.validate()?;
    if c.is_empty() {
        return Err(Error::InvalidArgument("empty circuit".into()));
    }
    let mut circ = c.clone();
    let mut trace = Trace::default();
    let mut energy = exact_energy(&circ, h)?;
    trace.push(EventKind::Init, None, 0, 0, energy);
    let base: u64 = rng.random();
    let mut event = 0u64;
    let mut stalled = false;
    let mut sweeps = 0;
    'outer: for s in 0..sweep.max_sweeps {
        let start_energy = energy;
        let order: Vec<usize> = match (sweep.order, s % 2) {
            (SweepOrder::ForwardBackward, 1) => (0..circ.len()).rev().collect(),
            _ => (0..circ.len()).collect(),
        };
        for g in order {
            if sweep.max_total_shots.is_some_and(|m| trace.totals().0 >= m)
                || sweep.target_energy.is_some_and(|t| energy <= t)
            {
                break 'outer;
            }
            let (env, shots, circuits) = match mode {
                SweepMode::Exact => (exact_environment(&circ, h, g)?, 0, 0),
                SweepMode::Sampled => estimate_environment(
                    &circ,
                    h,
                    g,
                    sweep.tomography,
                    sweep.shots_per_gate,
                    &mut par::task_rng(base, 2 * event),
                )?,
            };
            let cfg = GateOptConfig { seed: par::derive_seed(base, 2 * event + 1), ..gate_cfg.clone() };
            event += 1;
            let current = circ.gate(g)?.matrix.clone();
            let best = optimal_gate_from(&env, &cfg, Some(&current))?;
            circ.replace_gate(g, best.u)?;
            energy = exact_energy(&circ, h)?;
            trace.push(EventKind::Gate, Some(g), shots, circuits, energy);
        }
        sweeps += 1;
        trace.push(EventKind::SweepEnd, None, 0, 0, energy);
        if start_energy - energy < sweep.stall {
            stalled = true;
            break;
        }
    }
    Ok(SweepResult { circuit: circ, trace, sweeps, stalled })
}
