//! Stationary scattering: interior box, bordered system, effective
//! non-Hermitian Hamiltonian and S-matrix.

mod heff;
mod interior;
mod problem;
mod smatrix;
mod sweep;

pub use heff::{build_couplings, build_effective_hamiltonian, ChannelKind, ChannelLabel, Coupling, EffectiveHamiltonian, Tamper};
pub use interior::InteriorBox;
pub use problem::{ProblemOptions, ScatteringProblem};
pub use smatrix::{channel_probabilities, compute_smatrix, dimer_probabilities, SMatrix, ScatteringProbabilities};
pub use sweep::{convergence_scan, k_grid, linspace, lsq_slope, sweep_kv, ConvergenceScan, SweepCell};
