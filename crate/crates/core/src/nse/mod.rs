//! Continuum solvers for single-field nonlinear equations.
//!
//! The Newton-Schrodinger equation
//!
//! ```text
//! i dpsi/dt = -lap psi / 2m + V[psi] psi,   V[psi](r) = -S int |psi(r')|^2 / |r - r'| dr'
//! ```
//!
//! with `S = G m^2`, and its repulsive Coulomb twin (the time-dependent
//! Hartree equation) share one Strang split-step engine. A preconditioned
//! gradient flow finds stationary states, [`radial`] solves spherically
//! symmetric eigenproblems by shooting, and [`lattice`] carries the same
//! nonlinear flow on a small site lattice for comparison with exact
//! many-body dynamics.

mod ground;
pub mod lattice;
mod linearity;
pub mod radial;
pub mod snapshot;
mod split_step;
mod wavefield;

pub use ground::{ground_state, GroundState, GroundStateParams};
pub use lattice::{LatticeNse, PairKernel};
pub use linearity::{linearity_violation, two_lump_superposition, TwoLumpScenario};
pub use radial::{radial_ground_state, RadialProblem, RadialSolution};
pub use split_step::{default_dt, evolve, hartree_step, nse_step, EvolutionParams, Propagator, Scheme, Trajectory};
pub use wavefield::{Observables, WaveField};

use thiserror::Error;

use crate::grid::GridError;
use crate::kernels::{InteractionKind, KernelError};
use crate::lattice::LatticeError;

#[derive(Debug, Error, PartialEq)]
pub enum NseError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("field has {got} samples, grid has {want}")]
    Shape { got: usize, want: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("non-finite amplitude after step {step}")]
    NonFinite { step: usize },
    #[error("{operation} needs a {expected:?} coupling, got {got:?}")]
    WrongKind { operation: &'static str, expected: InteractionKind, got: InteractionKind },
    #[error("no convergence after {iterations} iterations (residual {residual:e}, energy change {energy_change:e})")]
    NotConverged { iterations: usize, residual: f64, energy_change: f64 },
    #[error("no bound state in window")]
    NoBoundState,
}
