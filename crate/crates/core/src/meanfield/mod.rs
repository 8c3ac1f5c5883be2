//! Product states, one-body density matrices and the comparison of exact
//! `N`-boson dynamics with the Hartree orbital equation on the same lattice.

mod experiment;

pub use experiment::{
    convergence_experiment, spearman, ConvergenceParams, ConvergenceReport, ConvergenceRow, LogLogFit,
};

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockBasis, FockError, FockVector, Stencil};
use crate::kernels::CouplingSpec;
use crate::nse::{LatticeNse, NseError, PairKernel};

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Nse(#[from] NseError),
    #[error("orbital has {got} sites, lattice has {want}")]
    OrbitalLength { got: usize, want: usize },
    #[error("orbital has zero norm")]
    ZeroOrbital,
    #[error("the one-body density matrix needs N >= 1")]
    EmptySector,
    #[error("invalid parameters: {0}")]
    Params(String),
}

fn normalized(chi: &[Complex64]) -> Result<Vec<Complex64>, MeanFieldError> {
    let n = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(MeanFieldError::ZeroOrbital);
    }
    Ok(chi.iter().map(|z| z / n).collect())
}

/// `|chi> (x) ... (x) |chi>` in the occupation basis: amplitude
/// `sqrt(N! / prod n_a!) prod chi_a^{n_a}`. The orbital is normalized first.
pub fn product_embed(chi: &[Complex64], basis: &Arc<FockBasis>) -> Result<FockVector, MeanFieldError> {
    if chi.len() != basis.sites() {
        return Err(MeanFieldError::OrbitalLength { got: chi.len(), want: basis.sites() });
    }
    let chi = normalized(chi)?;
    let n = basis.n_particles();
    let ln_fact = |k: usize| (2..=k).map(|j| (j as f64).ln()).sum::<f64>();
    let ln_n = ln_fact(n);
    let amps = basis
        .states()
        .map(|occ| {
            let ln_weight = 0.5 * (ln_n - occ.iter().map(|&k| ln_fact(k as usize)).sum::<f64>());
            let mut z = Complex64::new(ln_weight.exp(), 0.0);
            for (c, &k) in chi.iter().zip(occ) {
                if k > 0 {
                    z *= c.powu(k as u32);
                }
            }
            z
        })
        .collect();
    Ok(FockVector::new(basis.clone(), amps)?)
}

/// One-body density matrix `rho_ij = <a_j^dag a_i> / N`, so that a product
/// state gives `|chi><chi|`.
pub fn one_body_rdm(v: &FockVector) -> Result<DMatrix<Complex64>, MeanFieldError> {
    let basis = v.basis();
    let n = basis.n_particles();
    if n == 0 {
        return Err(MeanFieldError::EmptySector);
    }
    let m = basis.sites();
    let norm2 = v.norm().powi(2);
    if norm2 == 0.0 {
        return Err(MeanFieldError::Params("zero state".into()));
    }
    let amps = v.amplitudes();
    let mut rho = DMatrix::<Complex64>::zeros(m, m);
    let mut target = vec![0u16; m];
    for (idx, occ) in basis.states().enumerate() {
        let c = amps[idx];
        if c == Complex64::default() {
            continue;
        }
        for j in 0..m {
            if occ[j] == 0 {
                continue;
            }
            rho[(j, j)] += c.norm_sqr() * occ[j] as f64;
            // a_i^dag a_j |occ> = sqrt(n_j (n_i + 1)) |occ - e_j + e_i>.
            for i in 0..m {
                if i == j {
                    continue;
                }
                target.copy_from_slice(occ);
                target[j] -= 1;
                target[i] += 1;
                if let Some(t) = basis.index_of(&target) {
                    let me = (occ[j] as f64 * (occ[i] as f64 + 1.0)).sqrt();
                    // <a_i^dag a_j> += conj(c_t) c me; rho_ji = <a_i^dag a_j> / N.
                    rho[(j, i)] += amps[t].conj() * c * me;
                }
            }
        }
    }
    rho /= Complex64::new(n as f64 * norm2, 0.0);
    Ok(rho)
}

/// `|| rho - |chi><chi| ||_1 / 2` for a normalized `chi`.
pub fn trace_distance(rho: &DMatrix<Complex64>, chi: &[Complex64]) -> Result<f64, MeanFieldError> {
    let m = rho.nrows();
    if chi.len() != m {
        return Err(MeanFieldError::OrbitalLength { got: chi.len(), want: m });
    }
    let chi = normalized(chi)?;
    let mut diff = rho.clone();
    for i in 0..m {
        for j in 0..m {
            diff[(i, j)] -= chi[i] * chi[j].conj();
        }
    }
    // Symmetrize against rounding before the Hermitian solver.
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    Ok(0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().cloned().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Hartree orbitals at every step of
/// `i dchi/dt = t chi + s (N - 1) S (F_sigma * |chi|^2) chi` over `steps` steps of `dt`.
///
/// `coupling` carries the per-pair strength. `N = 1` gives free hopping.
pub fn hartree_evolve_lattice(
    chi0: &[Complex64],
    n_particles: usize,
    coupling: &CouplingSpec,
    stencil: Stencil,
    lattice: &crate::lattice::Lattice,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<Complex64>>, MeanFieldError> {
    if chi0.len() != lattice.sites() {
        return Err(MeanFieldError::OrbitalLength { got: chi0.len(), want: lattice.sites() });
    }
    if n_particles == 0 {
        return Err(MeanFieldError::EmptySector);
    }
    let chi0 = normalized(chi0)?;
    let factor = (n_particles - 1) as f64;
    let kernel = if factor == 0.0 {
        PairKernel::from_table(vec![0.0; lattice.sites()])
    } else {
        PairKernel::regularized(lattice, coupling, factor)?
    };
    let mut nse = LatticeNse::new(lattice, coupling.mass, stencil, &kernel, dt)?;
    Ok(nse.trajectory(&chi0, steps)?)
}
