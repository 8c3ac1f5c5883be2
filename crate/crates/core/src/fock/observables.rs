use num_complex::Complex64;

use super::{evolve_exact, FockError, FockVector, ManyBodyOperator};
use crate::kernels::gaussian_value;

/// `<n_a>` for every site.
pub fn occupation_expectation(v: &FockVector) -> Vec<f64> {
    let basis = v.basis();
    let norm2 = v.norm().powi(2);
    let mut occ = vec![0.0; basis.sites()];
    if norm2 == 0.0 {
        return occ;
    }
    for (state, amp) in basis.states().zip(v.amplitudes()) {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (o, &n) in occ.iter_mut().zip(state) {
            *o += p * n as f64;
        }
    }
    occ.iter_mut().for_each(|o| *o /= norm2);
    occ
}

/// `<N>`; equals the sector's particle number for any nonzero state.
pub fn number_expectation(v: &FockVector) -> f64 {
    occupation_expectation(v).iter().sum()
}

/// `<mu_reg(r)>` at every site: `m sum_b s_sigma(r - r_b) <n_b>`, with the
/// Gaussian taken at minimum-image distance.
pub fn mass_density_expectation(v: &FockVector, sigma: f64, mass: f64) -> Vec<f64> {
    let lattice = v.basis().lattice();
    let occ = occupation_expectation(v);
    let m = lattice.sites();
    (0..m)
        .map(|a| {
            mass * (0..m)
                .filter(|&b| occ[b] != 0.0)
                .map(|b| gaussian_value(lattice.distance(a, b), sigma, lattice.dim()) * occ[b])
                .sum::<f64>()
        })
        .collect()
}

/// `|| U(av1 + bv2) - aU v1 - bU v2 ||` with `U = exp(-i H t)`.
pub fn linearity_check(
    h: &ManyBodyOperator,
    v1: &FockVector,
    v2: &FockVector,
    a: Complex64,
    b: Complex64,
    t: f64,
) -> Result<f64, FockError> {
    let joint = evolve_exact(h, &v1.combine(a, v2, b)?, t)?;
    let separate = evolve_exact(h, v1, t)?.combine(a, &evolve_exact(h, v2, t)?, b)?;
    Ok(joint.distance(&separate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, build_hamiltonian, HamiltonianOptions, Lattice};
    use crate::grid::Dim;
    use crate::kernels::CouplingSpec;

    #[test]
    fn number_is_exact_in_each_sector() {
        let l = Lattice::new(Dim::One, 4, 1.0).unwrap();
        let b1 = build_basis(&l, 1).unwrap();
        let v = FockVector::basis_state(b1, &[0, 1, 0, 0]).unwrap();
        assert_eq!(number_expectation(&v), 1.0);
        let b3 = build_basis(&l, 3).unwrap();
        let amps: Vec<Complex64> = (0..b3.dimension()).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let v3 = FockVector::new(b3, amps).unwrap();
        assert!((number_expectation(&v3) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn number_survives_evolution() {
        let l = Lattice::new(Dim::One, 4, 1.0).unwrap();
        let b = build_basis(&l, 2).unwrap();
        let h = build_hamiltonian(&b, &CouplingSpec::gravity(1.0, 1.0, 2.0).unwrap(), HamiltonianOptions::default())
            .unwrap();
        let v = FockVector::basis_state(b, &[2, 0, 0, 0]).unwrap();
        let out = evolve_exact(&h, &v, 3.0).unwrap();
        assert!((number_expectation(&out) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_has_zero_mass_density() {
        let l = Lattice::new(Dim::One, 4, 1.0).unwrap();
        let b = build_basis(&l, 0).unwrap();
        let v = FockVector::basis_state(b, &[0, 0, 0, 0]).unwrap();
        assert!(mass_density_expectation(&v, 1.0, 2.0).iter().all(|&x| x == 0.0));
    }

    /// For `(N, 0, ..., 0)`, `mu_reg(r) = m sum_b s(r - r_b) a_b^dag a_b` acting on the
    /// state gives `m N s(r - r_0)`; compare with the operator applied by hand.
    #[test]
    fn condensed_fock_state_gives_smeared_point_mass() {
        let l = Lattice::new(Dim::One, 6, 0.5).unwrap();
        let b = build_basis(&l, 3).unwrap();
        let v = FockVector::basis_state(b, &[3, 0, 0, 0, 0, 0]).unwrap();
        let (sigma, mass) = (0.5, 1.7);
        let got = mass_density_expectation(&v, sigma, mass);
        for (a, g) in got.iter().enumerate() {
            let want = mass * 3.0 * gaussian_value(l.distance(a, 0), sigma, Dim::One);
            assert!((g - want).abs() < 1e-14);
        }
        let total: f64 = got.iter().sum::<f64>() * l.cell_volume();
        assert!((total - mass * 3.0).abs() < 0.05 * mass * 3.0);
    }

    #[test]
    fn one_particle_density_is_smeared_orbital_density() {
        let l = Lattice::new(Dim::One, 5, 1.0).unwrap();
        let b = build_basis(&l, 1).unwrap();
        let phi: Vec<Complex64> = [0.1, 0.5, 0.7, 0.3, 0.2].iter().map(|&x| Complex64::new(x, 0.1 * x)).collect();
        let v = FockVector::one_particle(b, &phi).unwrap();
        let nrm: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        let got = mass_density_expectation(&v, 0.8, 1.0);
        for (a, g) in got.iter().enumerate() {
            let want: f64 =
                (0..5).map(|c| gaussian_value(l.distance(a, c), 0.8, Dim::One) * phi[c].norm_sqr() / nrm).sum();
            assert!((g - want).abs() < 1e-14);
        }
    }
}
