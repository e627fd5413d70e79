//! Modelling and verification toolkit for quantum sensing with an
//! anti-PT-symmetric pair of dissipatively coupled modes.
//!
//! The two-mode effective Hamiltonian, its coherent steady state and that
//! state's sensitivity to small perturbations all have closed forms. This
//! crate evaluates them, cross-checks them against a matrix-derivative route
//! and finite differences, turns them into quantum Fisher information and
//! Cramér-Rao bounds, and confirms by integrating the full Lindblad master
//! equation in a truncated Fock basis that the steady state really is coherent.

pub mod error;
pub mod fock;
pub mod hamiltonian;
mod linalg;
pub mod lindblad;
pub mod ode;
pub mod params;
pub mod qfi;
pub mod sensitivity;
pub mod steady;

pub use error::{Error, Result};
pub use fock::{coherent_state, Cutoffs, FockDensityMatrix, SparseOp};
pub use hamiltonian::{build_hamiltonian, classify_phase, spectrum, EffectiveHamiltonian, Phase, SpectralInfo};
pub use linalg::{hermitian_eigenvalues, hermiticity_defect};
pub use lindblad::{evolve_master_equation, evolve_sampled, husimi_q, EvolveOptions, MasterEquation};
pub use params::SystemParams;
pub use qfi::{qfi_closed_form, qfi_pure_state_oracle, qfi_report, qfi_sld_oracle, sweep_bound, QfiReport, SweepRow};
pub use sensitivity::{
    analytic_sensitivity, fd_sensitivity, matrix_derivative_sensitivity, scaling_exponent, GammaConvention, Parameter,
    ScalingFit, SensitivityPair,
};
pub use steady::{steady_state, steady_state_solve, ModeAmplitudes};

pub use num_complex::Complex64;
