//! The six experiment subcommands.

use qlt_core::circuit::{exact_energy, exact_ground_energy, Circuit};
use qlt_core::environment::{exact_environment, SlotSampler};
use qlt_core::hamiltonian::Hamiltonian;
use qlt_core::optimizer::{
    estimate_environment, optimal_gate, run_baseline, sweep_optimize, BaselineConfig, BaselineMethod, GateOptConfig,
    ParamCircuit, SweepConfig, SweepMode, TomographyMethod, Trace,
};
use qlt_core::tomography::{
    build_design_matrix, builtin_cover_2q, check_gates, design_diagnostics, error_ener, error_env, greedy_cover_search,
    minimal_cover_1q, tableaux_tomography, two_design_trace, uniform_tomography, Basis, CliffordCover, CostOracle,
    GateSet, UniformEstimator, UniformSource, DEFAULT_CHECK_GATES,
};
use qlt_core::unitary::haar_random;
use qlt_core::{par, Matrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CliError, CliResult, Output, Seeded};

/// Stream tags keep the random inputs of a run independent of each other.
const CIRCUIT_STREAM: u64 = 0;
const CHECK_STREAM: u64 = 1;
const TASK_STREAM: u64 = 1 << 32;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    par::task_rng(seed, stream)
}

/// Ising benchmark: staircase ansatz on `n` qubits and
/// `H = jz Σ Z_q Z_{q+1} − hx Σ X_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub n: usize,
    pub layers: usize,
    pub jz: f64,
    pub hx: f64,
}

impl Default for Model {
    fn default() -> Self {
        Self { n: 6, layers: 3, jz: 1.0, hx: 1.0 }
    }
}

impl Model {
    fn with(n: usize, layers: usize) -> Self {
        Self { n, layers, ..Default::default() }
    }

    fn hamiltonian(&self) -> CliResult<Hamiltonian> {
        Ok(Hamiltonian::ising(self.n, self.jz, self.hx)?)
    }

    fn circuit(&self, seed: u64) -> CliResult<Circuit> {
        Ok(Circuit::staircase_ansatz(self.n, self.layers, &mut rng_for(seed, CIRCUIT_STREAM))?)
    }
}

fn gate_slot(c: &Circuit, gate_index: Option<usize>) -> CliResult<usize> {
    let g = gate_index.unwrap_or(c.len() / 2);
    if g >= c.len() {
        return Err(CliError::Config(format!("gate_index {g} out of range for {} gates", c.len())));
    }
    Ok(g)
}

macro_rules! seeded {
    ($($t:ty),*) => {$(
        impl Seeded for $t {
            fn seed_mut(&mut self) -> &mut u64 {
                &mut self.seed
            }
        }
    )*};
}

seeded!(EnvCheckConfig, TomoBenchConfig, OptGateBenchConfig, GatesetOverheadConfig, CoverSearchConfig, VqeConfig);

// ---------------------------------------------------------------- env-check

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvCheckConfig {
    pub seed: u64,
    pub model: Model,
    /// Slot to extract; the middle gate when absent.
    pub gate_index: Option<usize>,
    /// Random test gates per check.
    pub checks: usize,
    /// Absolute tolerance of the exact identities, scaled by `‖E‖`.
    pub tol: f64,
}

impl Default for EnvCheckConfig {
    fn default() -> Self {
        Self { seed: 0, model: Model::with(4, 2), gate_index: None, checks: 20, tol: 1e-9 }
    }
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

pub fn env_check(cfg: &EnvCheckConfig, out: &Output) -> CliResult<()> {
    if cfg.tol.is_nan() || cfg.tol < 0.0 || cfg.checks == 0 {
        return Err(CliError::Config("tol must be nonnegative and checks positive".into()));
    }
    let h = cfg.model.hamiltonian()?;
    let c = cfg.model.circuit(cfg.seed)?;
    let g = gate_slot(&c, cfg.gate_index)?;
    let e = exact_environment(&c, &h, g)?;
    let proj = e.measurable_projection();
    let slot = SlotSampler::new(&c, &h, g)?;
    let scale = e.norm().max(1.0);
    let tol = cfg.tol * scale;
    let mut rng = rng_for(cfg.seed, CHECK_STREAM);
    let d = e.d();

    let (mut subst, mut measurable, mut sampler, mut grad) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.checks {
        let v = haar_random(d, &mut rng);
        let f = e.cost(&v)?;
        subst = subst.max((f - exact_energy(&c.substitute_gate(g, &v)?, &h)?).abs());
        measurable = measurable.max((f - proj.cost(&v)?).abs());
        sampler = sampler.max((f - slot.gate_sampler(&v)?.mean()).abs());
        let dir = Matrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let gr = e.gradient(&v)?;
        let analytic = 2.0 * gr.iter().zip(dir.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        let step = 1e-6;
        let hd = &dir * C64::new(step, 0.0);
        let fd = (e.cost(&(&v + &hd))? - e.cost(&(&v - &hd))?) / (2.0 * step);
        grad = grad.max((analytic - fd).abs() / analytic.abs().max(1.0));
    }
    let current = (e.cost(&c.gate(g)?.matrix)? - exact_energy(&c, &h)?).abs();
    let rows = vec![
        CheckRow { name: "hermiticity_defect", value: e.hermiticity_defect(), tolerance: tol, pass: e.hermiticity_defect() <= tol },
        CheckRow { name: "current_gate_cost", value: current, tolerance: tol, pass: current <= tol },
        CheckRow { name: "substitution_cost", value: subst, tolerance: tol, pass: subst <= tol },
        CheckRow { name: "measurable_projection_cost", value: measurable, tolerance: tol, pass: measurable <= tol },
        CheckRow { name: "sampler_mean", value: sampler, tolerance: tol, pass: sampler <= tol },
        CheckRow { name: "gradient_finite_difference", value: grad, tolerance: 1e-5, pass: grad <= 1e-5 },
    ];
    let env: serde_json::Value = serde_json::from_str(&e.to_json()?).map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = serde_json::json!({
        "gate_index": g,
        "k": e.k(),
        "norm": e.norm(),
        "checks": rows,
        "environment": env,
    });
    let path = out.json("env_check.json", &report)?;
    for r in &rows {
        println!("{:<28} {:>10.3e}  tol {:.1e}  {}", r.name, r.value, r.tolerance, if r.pass { "ok" } else { "FAIL" });
    }
    println!("wrote {}", path.display());
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("environment checks failed: {}", failed.join(", "))))
    }
}

// --------------------------------------------------------------- tomo-bench

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    CliffordRegression,
    CliffordShadow,
    HaarRegression,
    HaarShadow,
    Tableaux,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoBenchConfig {
    pub seed: u64,
    pub model: Model,
    pub gate_index: Option<usize>,
    pub shots: Vec<u64>,
    pub estimators: Vec<Estimator>,
    pub repetitions: usize,
    pub check_gates: usize,
}

impl Default for TomoBenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: Model::default(),
            gate_index: Some(7),
            shots: vec![10_000, 100_000, 1_000_000],
            estimators: vec![Estimator::CliffordRegression, Estimator::Tableaux],
            repetitions: 3,
            check_gates: DEFAULT_CHECK_GATES,
        }
    }
}

#[derive(Serialize)]
struct TomoRow {
    estimator: Estimator,
    shots: u64,
    repetition: usize,
    circuits: usize,
    shots_used: u64,
    error_env: f64,
}

fn cover_for(k: usize) -> CliResult<CliffordCover> {
    Ok(match k {
        1 => minimal_cover_1q()?,
        2 => builtin_cover_2q()?,
        _ => return Err(CliError::Config(format!("no cover for {k}-qubit gates"))),
    })
}

pub fn tomo_bench(cfg: &TomoBenchConfig, out: &Output) -> CliResult<()> {
    if cfg.shots.is_empty() || cfg.estimators.is_empty() || cfg.repetitions == 0 || cfg.check_gates == 0 {
        return Err(CliError::Config("shots, estimators, repetitions and check_gates must be nonempty".into()));
    }
    let h = cfg.model.hamiltonian()?;
    let c = cfg.model.circuit(cfg.seed)?;
    let g = gate_slot(&c, cfg.gate_index)?;
    let truth = exact_environment(&c, &h, g)?;
    let slot = SlotSampler::new(&c, &h, g)?;
    let oracle = CostOracle::Shots(&slot);
    let checks = check_gates(slot.k(), cfg.check_gates, &mut rng_for(cfg.seed, CHECK_STREAM));
    let needs_cover = cfg.estimators.contains(&Estimator::Tableaux);
    let cover = if needs_cover { Some(cover_for(slot.k())?) } else { None };
    let mut rows = Vec::new();
    let mut task = 0u64;
    for &est in &cfg.estimators {
        for &shots in &cfg.shots {
            for repetition in 0..cfg.repetitions {
                let mut rng = rng_for(cfg.seed, TASK_STREAM + task);
                task += 1;
                let r = match (est, &cover) {
                    (Estimator::Tableaux, Some(cover)) => {
                        let per = (shots / cover.total_gates() as u64).max(1);
                        tableaux_tomography(&oracle, cover, per, &mut rng)?
                    }
                    _ => {
                        let (source, estimator) = match est {
                            Estimator::CliffordRegression => (UniformSource::CliffordGroup, UniformEstimator::Regression),
                            Estimator::CliffordShadow => (UniformSource::CliffordGroup, UniformEstimator::ClosedFormShadow),
                            Estimator::HaarRegression => (UniformSource::Haar, UniformEstimator::Regression),
                            _ => (UniformSource::Haar, UniformEstimator::ClosedFormShadow),
                        };
                        uniform_tomography(&oracle, shots, source, estimator, &mut rng)?
                    }
                };
                let error_env = error_env(&r.estimate, &truth, &checks)?;
                rows.push(TomoRow { estimator: est, shots, repetition, circuits: r.gates_used, shots_used: r.shots_used, error_env });
            }
        }
    }
    println!("wrote {}", out.csv("tomo_bench.csv", &rows)?.display());
    Ok(())
}

// ------------------------------------------------------------ optgate-bench

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptGateBenchConfig {
    pub seed: u64,
    pub model: Model,
    pub gate_index: Option<usize>,
    pub shots: Vec<u64>,
    /// Independent random circuits.
    pub instances: usize,
    pub tomography: TomographyMethod,
    pub gate: GateOptConfig,
    /// Restarts for the reference minimum of the exact environment.
    pub reference_restarts: usize,
}

impl Default for OptGateBenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: Model::default(),
            gate_index: Some(7),
            shots: vec![10_000, 100_000, 1_000_000],
            instances: 8,
            tomography: TomographyMethod::Tableaux,
            gate: GateOptConfig::default(),
            reference_restarts: 16,
        }
    }
}

#[derive(Serialize)]
struct OptGateRow {
    instance: usize,
    shots: u64,
    f_opt: f64,
    f_min: f64,
    error_ener: f64,
}

pub fn optgate_bench(cfg: &OptGateBenchConfig, out: &Output) -> CliResult<()> {
    if cfg.shots.is_empty() || cfg.instances == 0 || cfg.reference_restarts == 0 {
        return Err(CliError::Config("shots and instances must be nonempty".into()));
    }
    cfg.gate.validate()?;
    let h = cfg.model.hamiltonian()?;
    let mut rows = Vec::new();
    for instance in 0..cfg.instances {
        let iseed = par::derive_seed(cfg.seed, instance as u64);
        let c = cfg.model.circuit(iseed)?;
        let g = gate_slot(&c, cfg.gate_index)?;
        let e = exact_environment(&c, &h, g)?;
        let reference = GateOptConfig { restarts: cfg.reference_restarts, seed: iseed, ..cfg.gate.clone() };
        let f_min = optimal_gate(&e, &reference)?.cost;
        for (s, &shots) in cfg.shots.iter().enumerate() {
            let mut rng = rng_for(iseed, TASK_STREAM + s as u64);
            let (est, _, _) = estimate_environment(&c, &h, g, cfg.tomography, shots, &mut rng)?;
            let u = optimal_gate(&est, &GateOptConfig { seed: rng.random(), ..cfg.gate.clone() })?.u;
            let f_opt = e.cost(&u)?;
            rows.push(OptGateRow { instance, shots, f_opt, f_min, error_ener: error_ener(f_opt, f_min)? });
        }
    }
    println!("wrote {}", out.csv("optgate_bench.csv", &rows)?.display());
    Ok(())
}

// --------------------------------------------------------- gateset-overhead

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Haar,
    RandomClifford,
    /// The builtin cover, or the cover file given in `cover`.
    BuiltinCover,
    /// The full Clifford group, an exact 2-design.
    CliffordGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatesetOverheadConfig {
    pub seed: u64,
    pub k: usize,
    /// Set sizes for the random families.
    pub sizes: Vec<usize>,
    pub sets: Vec<SetKind>,
    /// Draws per random family and size.
    pub repetitions: usize,
    /// Cover file used instead of the builtin cover.
    pub cover: Option<std::path::PathBuf>,
}

impl Default for GatesetOverheadConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: 2,
            sizes: vec![272, 500, 1000, 2000, 5000, 11520],
            sets: vec![SetKind::Haar, SetKind::RandomClifford, SetKind::BuiltinCover, SetKind::CliffordGroup],
            repetitions: 1,
            cover: None,
        }
    }
}

#[derive(Serialize)]
struct OverheadRow {
    set: SetKind,
    repetition: usize,
    n_gates: usize,
    rank: usize,
    complete: bool,
    trace_inv_pseudo: f64,
    ratio: f64,
}

pub fn gateset_overhead(cfg: &GatesetOverheadConfig, out: &Output) -> CliResult<()> {
    if !(1..=2).contains(&cfg.k) {
        return Err(CliError::Config(format!("k = {} (supported: 1, 2)", cfg.k)));
    }
    let optimum = two_design_trace(cfg.k);
    let mut rows = Vec::new();
    let mut push = |set, repetition, gs: &GateSet| -> CliResult<()> {
        let d = design_diagnostics(&build_design_matrix(gs, &Basis::Pauli)?)?;
        let trace = if d.coverage_complete { d.trace_inv_pseudo } else { f64::INFINITY };
        rows.push(OverheadRow {
            set,
            repetition,
            n_gates: gs.len(),
            rank: d.rank,
            complete: d.coverage_complete,
            trace_inv_pseudo: trace,
            ratio: trace / optimum,
        });
        Ok(())
    };
    let mut task = 0u64;
    for &set in &cfg.sets {
        match set {
            SetKind::Haar | SetKind::RandomClifford => {
                for &n in &cfg.sizes {
                    for rep in 0..cfg.repetitions {
                        let mut rng = rng_for(cfg.seed, TASK_STREAM + task);
                        task += 1;
                        let gs = if set == SetKind::Haar {
                            GateSet::haar(cfg.k, n, &mut rng)
                        } else {
                            GateSet::random_cliffords(cfg.k, n, &mut rng)?
                        };
                        push(set, rep, &gs)?;
                    }
                }
            }
            SetKind::BuiltinCover => {
                let cover = match &cfg.cover {
                    Some(p) => CliffordCover::load(p)?,
                    None => cover_for(cfg.k)?,
                };
                if cover.k() != cfg.k {
                    return Err(CliError::Config(format!("cover is for k = {}, run has k = {}", cover.k(), cfg.k)));
                }
                push(set, 0, &GateSet::from_cover(&cover)?)?;
            }
            SetKind::CliffordGroup => push(set, 0, &GateSet::clifford_group(cfg.k)?)?,
        }
    }
    println!("wrote {}", out.csv("gateset_overhead.csv", &rows)?.display());
    Ok(())
}

// ------------------------------------------------------------- cover-search

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverSearchConfig {
    pub seed: u64,
    pub k: usize,
    pub pool_size: usize,
    pub restarts: usize,
}

impl Default for CoverSearchConfig {
    fn default() -> Self {
        Self { seed: 0, k: 2, pool_size: 300, restarts: 256 }
    }
}

#[derive(Serialize)]
struct CoverStats {
    k: usize,
    groups: usize,
    total_gates: usize,
    total_cnots: usize,
    max_cnots: usize,
    mean_cnots: String,
    missing_pairs: usize,
    overhead_ratio: f64,
    sha256: String,
}

pub fn cover_search(cfg: &CoverSearchConfig, out: &Output) -> CliResult<()> {
    if cfg.pool_size == 0 || cfg.restarts == 0 {
        return Err(CliError::Config("pool_size and restarts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let found = greedy_cover_search(cfg.k, cfg.pool_size, cfg.restarts, &mut rng)?;
    let hdr = out.header();
    let provenance = format!(
        "greedy search; qlt {}; seed {}; config_sha256 {}",
        qlt_core::VERSION,
        hdr.seed,
        hdr.config_hash
    );
    let cover = CliffordCover::new(found.k(), found.groups().to_vec(), provenance)?;
    cover.check_complete()?;
    let (num, den) = cover.mean_cnots();
    let stats = CoverStats {
        k: cover.k(),
        groups: cover.len(),
        total_gates: cover.total_gates(),
        total_cnots: cover.total_cnots(),
        max_cnots: cover.max_cnots(),
        mean_cnots: format!("{num}/{den}"),
        missing_pairs: cover.missing_pairs().len(),
        overhead_ratio: cover.overhead_ratio(),
        sha256: cover.checksum(),
    };
    let a = out.text("cover.json", &(cover.to_json()? + "\n"))?;
    let b = out.json("cover_stats.json", &stats)?;
    println!(
        "{} groups, {} gates, max CNOTs {}, mean CNOTs {num}/{den}, overhead ratio {:.6}",
        stats.groups, stats.total_gates, stats.max_cnots, stats.overhead_ratio
    );
    println!("wrote {} and {}", a.display(), b.display());
    Ok(())
}

// ---------------------------------------------------------------------- vqe

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VqeMethod {
    Sweep,
    Gd,
    Spsa,
}

fn spsa_default() -> BaselineConfig {
    BaselineConfig { method: BaselineMethod::Spsa, max_iters: 2000, ..Default::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub seed: u64,
    pub model: Model,
    pub methods: Vec<VqeMethod>,
    /// Stop every method once the exact energy falls this fraction of the
    /// way from the initial energy to the ground energy.
    pub target_fraction: Option<f64>,
    pub sweep_mode: SweepMode,
    pub sweep: SweepConfig,
    pub gate: GateOptConfig,
    pub gd: BaselineConfig,
    #[serde(default = "spsa_default")]
    pub spsa: BaselineConfig,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: Model::with(6, 2),
            methods: vec![VqeMethod::Sweep, VqeMethod::Gd, VqeMethod::Spsa],
            target_fraction: None,
            sweep_mode: SweepMode::Sampled,
            sweep: SweepConfig::default(),
            gate: GateOptConfig::default(),
            gd: BaselineConfig::default(),
            spsa: spsa_default(),
        }
    }
}

#[derive(Serialize)]
struct VqeSummary {
    method: VqeMethod,
    initial_energy: f64,
    final_energy: f64,
    ground_energy: f64,
    total_shots: u64,
    total_circuits: u64,
    events: usize,
}

pub fn vqe(cfg: &VqeConfig, out: &Output) -> CliResult<()> {
    if cfg.methods.is_empty() {
        return Err(CliError::Config("methods must be nonempty".into()));
    }
    if cfg.target_fraction.is_some_and(|f| !(f > 0.0 && f <= 1.0)) {
        return Err(CliError::Config("target_fraction must lie in (0, 1]".into()));
    }
    if cfg.gd.method != BaselineMethod::ParameterShiftGd || cfg.spsa.method != BaselineMethod::Spsa {
        return Err(CliError::Config("gd.method and spsa.method must name their own method".into()));
    }
    cfg.sweep.validate()?;
    cfg.gate.validate()?;
    let h = cfg.model.hamiltonian()?;
    let start = ParamCircuit::staircase(cfg.model.n, cfg.model.layers, &mut rng_for(cfg.seed, CIRCUIT_STREAM))?;
    let c0 = start.to_circuit()?;
    let e0 = exact_energy(&c0, &h)?;
    let ground = exact_ground_energy(&h)?;
    let target = cfg.target_fraction.map(|f| e0 - f * (e0 - ground));
    let mut summary = Vec::new();
    for (i, &m) in cfg.methods.iter().enumerate() {
        let mut rng = rng_for(cfg.seed, TASK_STREAM + i as u64);
        let trace: Trace = match m {
            VqeMethod::Sweep => {
                let sw = SweepConfig { target_energy: target.or(cfg.sweep.target_energy), ..cfg.sweep.clone() };
                sweep_optimize(&c0, &h, &sw, &cfg.gate, cfg.sweep_mode, &mut rng)?.trace
            }
            VqeMethod::Gd | VqeMethod::Spsa => {
                let base = if m == VqeMethod::Gd { &cfg.gd } else { &cfg.spsa };
                let bc = BaselineConfig { target_energy: target.or(base.target_energy), ..base.clone() };
                run_baseline(&bc, &start, &h, &mut rng)?.trace
            }
        };
        let name = match m {
            VqeMethod::Sweep => "trace_sweep.csv",
            VqeMethod::Gd => "trace_gd.csv",
            VqeMethod::Spsa => "trace_spsa.csv",
        };
        let path = out.trace(name, &trace)?;
        let (total_shots, total_circuits) = trace.totals();
        let final_energy = trace.last_energy().unwrap_or(e0);
        println!(
            "{m:?}: energy {e0:.6} -> {final_energy:.6} (ground {ground:.6}), {total_shots} shots, {total_circuits} circuits; wrote {}",
            path.display()
        );
        summary.push(VqeSummary {
            method: m,
            initial_energy: e0,
            final_energy,
            ground_energy: ground,
            total_shots,
            total_circuits,
            events: trace.events.len(),
        });
    }
    out.csv("vqe_summary.csv", &summary)?;
    Ok(())
}
