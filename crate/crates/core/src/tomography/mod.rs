//! Environment-tensor estimators.
//!
//! Every estimator takes a [`CostOracle`], either shot sampling of a circuit
//! slot or exact evaluation of a known tensor, and returns a
//! [`Reconstruction`] in the measurable subspace.

pub mod basis;
pub mod cover;
pub mod design;
pub mod gateset;
pub mod linear_square;
pub mod metrics;
pub mod regress;
pub mod sampling;
pub mod tableaux;
pub mod uniform;

pub use basis::{measurable_columns, Basis};
pub use cover::{builtin_cover_2q, greedy_cover_search, minimal_cover_1q, random_clifford_with_circuit, CliffordCover, CoverGroup};
pub use design::{build_design_matrix, design_diagnostics, frame_potential, DesignDiagnostics, DesignMatrix};
pub use gateset::{GateInfo, GateSet, SamplingMode};
pub use linear_square::{linear_square_tomography, LinearSquareResult};
pub use metrics::{check_gates, error_ener, error_env, DEFAULT_CHECK_GATES};
pub use regress::{regress, regress_with, Diagnostics, Reconstruction, RegressOptions, Solver};
pub use sampling::{collect_oracle_samples, collect_samples, CostOracle, ShotBatch, ShotMoments};
pub use tableaux::{tableaux_group, tableaux_tomography, TableauGroup};
pub use uniform::{two_design_trace, uniform_tomography, UniformEstimator, UniformSource};
