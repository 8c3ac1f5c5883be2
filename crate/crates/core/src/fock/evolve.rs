use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{FockError, FockVector, ManyBodyOperator};

/// Below this dimension [`evolve_exact`] diagonalizes densely.
pub const DENSE_THRESHOLD: usize = 2000;

/// Propagator `exp(-i H t)` from a dense eigendecomposition, reusable across times.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn new(h: &ManyBodyOperator) -> Self {
        Self::from_dense(h.to_dense())
    }

    pub fn from_dense(h: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self { energies: eig.eigenvalues.as_slice().to_vec(), vectors: eig.eigenvectors }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn propagate(&self, amps: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.energies.len();
        let q = &self.vectors;
        let mut coeffs = vec![Complex64::default(); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for i in 0..n {
                acc += amps[i] * q[(i, k)];
            }
            *c = acc * Complex64::from_polar(1.0, -self.energies[k] * t);
        }
        (0..n).map(|i| (0..n).map(|k| coeffs[k] * q[(i, k)]).sum()).collect()
    }
}

fn check_shapes(h: &ManyBodyOperator, v: &FockVector) -> Result<(), FockError> {
    if !h.basis().same_space(v.basis()) || h.dimension() != v.amplitudes().len() {
        return Err(FockError::BasisMismatch);
    }
    Ok(())
}

/// `exp(-i H t) v` by dense diagonalization.
pub fn evolve_dense(h: &ManyBodyOperator, v: &FockVector, t: f64) -> Result<FockVector, FockError> {
    check_shapes(h, v)?;
    let out = SpectralPropagator::new(h).propagate(v.amplitudes(), t);
    FockVector::new(v.basis().clone(), out)
}

/// `exp(-i H t) v`: dense diagonalization for small sectors, Krylov otherwise.
pub fn evolve_exact(h: &ManyBodyOperator, v: &FockVector, t: f64) -> Result<FockVector, FockError> {
    if h.dimension() < DENSE_THRESHOLD {
        evolve_dense(h, v, t)
    } else {
        evolve_krylov(h, v, t, KrylovParams::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovParams {
    pub subspace: usize,
    /// Accepted local error estimate per substep.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for KrylovParams {
    fn default() -> Self {
        Self { subspace: 30, tol: 1e-12, max_substeps: 100_000 }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos basis of the Krylov space of `v`.
struct Lanczos {
    vectors: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `beta_{k}` coupling out of the subspace; zero on breakdown.
    residual_beta: f64,
}

fn lanczos(h: &ManyBodyOperator, v: &[Complex64], beta0: f64, size: usize) -> Lanczos {
    let mut vectors = vec![v.iter().map(|z| z / beta0).collect::<Vec<_>>()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![Complex64::default(); v.len()];
    let mut scale = 0.0f64;
    loop {
        let j = vectors.len() - 1;
        h.apply(&vectors[j], &mut w);
        let a = dot(&vectors[j], &w).re;
        alpha.push(a);
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for q in &vectors {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        if b <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Lanczos { vectors, alpha, beta, residual_beta: 0.0 };
        }
        if vectors.len() == size {
            return Lanczos { vectors, alpha, beta, residual_beta: b };
        }
        beta.push(b);
        vectors.push(w.iter().map(|z| z / b).collect());
    }
}

/// First column of `exp(-i T t)` for a tridiagonal `T` given by its eigensystem.
fn projected_exponential(eig: &SymmetricEigen<f64, nalgebra::Dyn>, t: f64) -> Vec<Complex64> {
    let k = eig.eigenvalues.len();
    let phases: Vec<Complex64> =
        (0..k).map(|s| eig.eigenvectors[(0, s)] * Complex64::from_polar(1.0, -eig.eigenvalues[s] * t)).collect();
    (0..k).map(|i| (0..k).map(|s| eig.eigenvectors[(i, s)] * phases[s]).sum()).collect()
}

/// `exp(-i H t) v` by restarted Lanczos with adaptive substeps.
pub fn evolve_krylov(
    h: &ManyBodyOperator,
    v: &FockVector,
    t: f64,
    params: KrylovParams,
) -> Result<FockVector, FockError> {
    check_shapes(h, v)?;
    let mut state = v.amplitudes().to_vec();
    if t == 0.0 {
        return FockVector::new(v.basis().clone(), state);
    }
    let mut remaining = t;
    let mut tau = t;
    let mut substeps = 0;
    let mut worst = 0.0f64;
    while remaining.abs() > 0.0 {
        let beta0 = norm(&state);
        if beta0 == 0.0 {
            break;
        }
        let basis = lanczos(h, &state, beta0, params.subspace.max(2));
        let k = basis.alpha.len();
        let mut tri = DMatrix::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = basis.alpha[i];
            if i + 1 < k {
                tri[(i, i + 1)] = basis.beta[i];
                tri[(i + 1, i)] = basis.beta[i];
            }
        }
        let full = SymmetricEigen::new(tri.clone());
        let reduced = (k > 1 && basis.residual_beta > 0.0)
            .then(|| SymmetricEigen::new(tri.view((0, 0), (k - 1, k - 1)).into_owned()));
        loop {
            substeps += 1;
            if substeps > params.max_substeps {
                return Err(FockError::KrylovNotConverged { residual: worst });
            }
            let step = if tau.abs() > remaining.abs() { remaining } else { tau };
            let coeffs = projected_exponential(&full, step);
            // Residual estimate plus the change from dropping the last Lanczos vector.
            let mut err = basis.residual_beta * coeffs[k - 1].norm();
            if let Some(reduced) = &reduced {
                let lower = projected_exponential(reduced, step);
                let diff =
                    coeffs[k - 1].norm_sqr() + lower.iter().zip(&coeffs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
                err = err.max(diff.sqrt());
            }
            err *= beta0;
            if err <= params.tol {
                let mut next = vec![Complex64::default(); state.len()];
                for (c, q) in coeffs.iter().zip(&basis.vectors) {
                    let c = c * beta0;
                    next.iter_mut().zip(q).for_each(|(x, y)| *x += c * y);
                }
                state = next;
                remaining -= step;
                tau = step * 1.5;
                break;
            }
            worst = worst.max(err);
            tau = step / 2.0;
        }
    }
    FockVector::new(v.basis().clone(), state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, build_hamiltonian, HamiltonianOptions, Lattice};
    use crate::grid::Dim;
    use crate::kernels::CouplingSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let n = norm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    fn setup(m: usize, n: usize) -> (ManyBodyOperator, FockVector) {
        let l = Lattice::new(Dim::One, m, 1.0).unwrap();
        let b = build_basis(&l, n).unwrap();
        let c = CouplingSpec::gravity(1.5, 1.0, 2.0).unwrap();
        let h = build_hamiltonian(&b, &c, HamiltonianOptions::default()).unwrap();
        let v = FockVector::new(b.clone(), random_vector(b.dimension(), 3)).unwrap();
        (h, v)
    }

    #[test]
    fn zero_time_is_identity() {
        let (h, v) = setup(4, 2);
        let out = evolve_exact(&h, &v, 0.0).unwrap();
        assert!(out.distance(&v) < 1e-14);
        let out = evolve_krylov(&h, &v, 0.0, KrylovParams::default()).unwrap();
        assert_eq!(out.amplitudes(), v.amplitudes());
    }

    #[test]
    fn diagonal_hamiltonian_gives_rest_mass_phase() {
        // Zero-width box: one site, no hopping; strength zero and rest mass on.
        let l = Lattice::new(Dim::One, 1, 1.0).unwrap();
        let b = build_basis(&l, 3).unwrap();
        let c = CouplingSpec::gravity(0.0, 2.0, 2.0).unwrap();
        let opts = HamiltonianOptions { include_rest_mass: true, ..Default::default() };
        let h = build_hamiltonian(&b, &c, opts).unwrap();
        let v = FockVector::new(b.clone(), vec![Complex64::new(0.6, 0.8)]).unwrap();
        let t = 0.37;
        let out = evolve_exact(&h, &v, t).unwrap();
        let want = Complex64::new(0.6, 0.8) * Complex64::from_polar(1.0, -2.0 * 3.0 * t);
        assert!((out.amplitudes()[0] - want).norm() < 1e-14);
    }

    #[test]
    fn krylov_matches_dense_on_small_sectors() {
        for (m, n, subspace) in [(4, 2, 30), (8, 2, 8), (8, 4, 20)] {
            let (h, v) = setup(m, n);
            let t = 2.3;
            let dense = evolve_dense(&h, &v, t).unwrap();
            let params = KrylovParams { subspace, ..Default::default() };
            let kry = evolve_krylov(&h, &v, t, params).unwrap();
            assert!(dense.distance(&kry) < 1e-10, "M={m} N={n}: {}", dense.distance(&kry));
            assert!((kry.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_evolution_preserves_norm() {
        let (h, v) = setup(6, 3);
        let out = evolve_exact(&h, &v, 11.0).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}
