//! Single-gate minimization, gate-by-gate sweeps and the baselines.

pub mod baseline;
pub mod gate;
pub mod sweep;
pub mod template;

pub use baseline::{run_baseline, BaselineConfig, BaselineMethod, BaselineResult, ParamCircuit};
pub use gate::{optimal_gate, optimal_gate_from, polar_minimizer, GateOptConfig, GateOptMethod, GateOptResult};
pub use sweep::{
    estimate_environment, sweep_optimize, EventKind, SweepConfig, SweepMode, SweepOrder, SweepResult,
    TomographyMethod, Trace, TraceEvent,
};
pub use template::{two_qubit_template, TEMPLATE_PARAMS};
