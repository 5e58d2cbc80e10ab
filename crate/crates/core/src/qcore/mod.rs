//! Basis-agnostic complex linear algebra: states, operators, Lüders
//! measurements, expectations and reduced density matrices.

mod density;
mod ensemble;
mod operator;
pub mod spin;
mod state;

pub use density::{reduced_density, DensityMatrix};
pub use ensemble::{expectation, luders_measure, Branch, BranchEnsemble, ProjectiveMeasurement, QuantumState};
pub use operator::{apply, tensor_product, LinearOperator, TensorProduct, DENSE_MAX_DIM};
pub use state::{BasisTag, StateVector};

pub type C64 = num_complex::Complex64;

/// Branches whose projected squared norm is at or below this are dropped.
pub const BRANCH_PRUNE: f64 = 1e-14;
/// Tolerance on `‖ψ‖ = 1` for states entering expectations and ensembles.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on ensemble weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-10;
