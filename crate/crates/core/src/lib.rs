pub mod fock;
pub mod grid;
pub mod kernels;
pub mod lattice;
pub mod meanfield;
pub mod nse;
pub mod output;
pub mod sce;
pub mod scenario;
