//! Second-quantized weak-field Hamiltonian on a small periodic lattice.
//!
//! This is the linear side of the comparison: the field Hamiltonian is
//! projected onto fixed-`N` occupation-number sectors and evolved exactly.
//! Everything nonlinear elsewhere in the crate is checked against it.

mod basis;
mod evolve;
mod observables;
mod operator;

pub use basis::{build_basis, build_basis_with_cap, fock_dimension, FockBasis, FockVector, DEFAULT_DIMENSION_CAP};
pub use evolve::{evolve_dense, evolve_exact, evolve_krylov, KrylovParams, SpectralPropagator, DENSE_THRESHOLD};
pub use observables::{linearity_check, mass_density_expectation, number_expectation, occupation_expectation};
pub use operator::{
    build_hamiltonian, number_operator, one_particle_matrix, two_particle_matrix, HamiltonianOptions, ManyBodyOperator,
};

pub use crate::lattice::{Lattice, Stencil};

use thiserror::Error;

use crate::kernels::KernelError;
use crate::lattice::LatticeError;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("Fock dimension {} exceeds the cap of {cap}", .dimension.map_or("overflowing u128".to_string(), |d| d.to_string()))]
    DimensionOverflow { dimension: Option<u128>, cap: usize },
    #[error("sigma = {sigma} is below two lattice spacings ({spacing}); set allow_under_resolved to override")]
    UnderResolved { sigma: f64, spacing: f64 },
    #[error("operation needs the N = {expected} sector, basis has N = {got}")]
    WrongSector { expected: usize, got: usize },
    #[error("vectors or operators live on different bases")]
    BasisMismatch,
    #[error("amplitude vector has length {got}, basis dimension is {want}")]
    Length { got: usize, want: usize },
    #[error("occupation vector is not in the basis")]
    NotInBasis,
    #[error("state contains non-finite amplitudes")]
    NonFinite,
    #[error("Krylov propagation did not converge (error estimate {residual:e})")]
    KrylovNotConverged { residual: f64 },
}
