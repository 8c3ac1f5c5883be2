use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{FockBasis, FockError, FockVector};
use crate::kernels::{delta_m, f_sigma, CouplingSpec, InteractionKind};
use crate::lattice::Stencil;

/// Rows above this count are multiplied in parallel.
const PARALLEL_ROWS: usize = 4096;

/// A real symmetric operator on a fixed-`N` Fock basis, stored as CSR.
///
/// All operators built here are real in the site basis, so symmetric means
/// Hermitian.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator {
    basis: Arc<FockBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

/// Which terms of the field Hamiltonian to assemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianOptions {
    /// Add `m N` (the bare rest mass).
    pub include_rest_mass: bool,
    pub include_kinetic: bool,
    pub include_interaction: bool,
    pub stencil: Stencil,
    /// Accept `sigma < 2 * spacing`.
    pub allow_under_resolved: bool,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        Self {
            include_rest_mass: false,
            include_kinetic: true,
            include_interaction: true,
            stencil: Stencil::default(),
            allow_under_resolved: false,
        }
    }
}

impl ManyBodyOperator {
    fn from_rows(basis: Arc<FockBasis>, rows: Vec<BTreeMap<usize, f64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    cols.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { basis, row_ptr, cols, values }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dimension())
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k])))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let row = |r: usize| -> Complex64 {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| x[self.cols[k]] * self.values[k]).sum()
        };
        if self.dimension() >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
    }

    pub fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); x.len()];
        self.apply(x, &mut y);
        y
    }

    /// `<v|H|v>` (real for a symmetric operator).
    pub fn expectation(&self, v: &FockVector) -> f64 {
        let hv = self.apply_vec(v.amplitudes());
        v.amplitudes().iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / v.norm().powi(2)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut d = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    /// Largest `|H_ij - H_ji|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }

    /// Writes `row,col,re,im` coordinate triples with 17 significant digits.
    pub fn write_coo_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r},{c},{v:.16e},{:.16e}", 0.0)?;
        }
        Ok(())
    }
}

/// Projection of the weak-field field Hamiltonian onto the basis's `N`-particle
/// sector: rest mass, lattice kinetic term, and the regularized pair
/// interaction.
///
/// The interaction counts each unordered pair once with energy
/// `sign * strength * F_sigma(r_ij)` (using `F_sigma(0)` for two particles on
/// one site) and adds `N * delta_m` for the self-energy.
pub fn build_hamiltonian(
    basis: &Arc<FockBasis>,
    coupling: &CouplingSpec,
    options: HamiltonianOptions,
) -> Result<ManyBodyOperator, FockError> {
    coupling.validate()?;
    let lattice = basis.lattice();
    let m_sites = lattice.sites();
    let n_part = basis.n_particles();
    if options.include_interaction {
        if coupling.kind == InteractionKind::CoulombExternalAttractive {
            return Err(FockError::Kernel(crate::kernels::KernelError::NoSelfEnergy(coupling.kind)));
        }
        if !options.allow_under_resolved && coupling.sigma < 2.0 * lattice.spacing() {
            return Err(FockError::UnderResolved { sigma: coupling.sigma, spacing: lattice.spacing() });
        }
    }

    let hop = lattice.hopping_matrix(coupling.mass, options.stencil);
    let hop_diag: Vec<f64> = (0..m_sites).map(|a| hop[(a, a)]).collect();
    let hop_off: Vec<Vec<(usize, f64)>> = (0..m_sites)
        .map(|b| (0..m_sites).filter(|&a| a != b && hop[(a, b)] != 0.0).map(|a| (a, hop[(a, b)])).collect())
        .collect();

    let (pair, self_energy) = if options.include_interaction {
        let s = coupling.signed_strength();
        let pair: Vec<f64> = (0..m_sites * m_sites)
            .map(|ab| s * f_sigma(lattice.distance(ab / m_sites, ab % m_sites), coupling.sigma))
            .collect();
        (pair, n_part as f64 * delta_m(coupling)?)
    } else {
        (Vec::new(), 0.0)
    };
    let rest = if options.include_rest_mass { coupling.mass * n_part as f64 } else { 0.0 };

    let rows: Vec<BTreeMap<usize, f64>> = (0..basis.dimension())
        .into_par_iter()
        .map_init(
            || vec![0u16; m_sites],
            |scratch, i| {
                let occ = basis.state(i);
                let mut row = BTreeMap::new();
                let mut diag = rest;
                if options.include_interaction {
                    let mut e = 0.0;
                    for a in 0..m_sites {
                        let na = occ[a] as f64;
                        if na == 0.0 {
                            continue;
                        }
                        e += 0.5 * pair[a * m_sites + a] * na * (na - 1.0);
                        for b in (a + 1)..m_sites {
                            e += pair[a * m_sites + b] * na * occ[b] as f64;
                        }
                    }
                    diag += e + self_energy;
                }
                if options.include_kinetic {
                    for a in 0..m_sites {
                        diag += hop_diag[a] * occ[a] as f64;
                    }
                    // a_a^dagger a_b on occupied b.
                    for b in 0..m_sites {
                        let nb = occ[b];
                        if nb == 0 {
                            continue;
                        }
                        for &(a, t) in &hop_off[b] {
                            scratch.copy_from_slice(occ);
                            scratch[b] -= 1;
                            scratch[a] += 1;
                            let j = basis.index_of(scratch).expect("hopping stays in the sector");
                            let amp = t * (nb as f64 * scratch[a] as f64).sqrt();
                            *row.entry(j).or_insert(0.0) += amp;
                        }
                    }
                }
                *row.entry(i).or_insert(0.0) += diag;
                row
            },
        )
        .collect();
    Ok(ManyBodyOperator::from_rows(basis.clone(), rows))
}

/// Particle-number operator (diagonal).
pub fn number_operator(basis: &Arc<FockBasis>) -> ManyBodyOperator {
    let rows = (0..basis.dimension())
        .map(|i| {
            let mut row = BTreeMap::new();
            row.insert(i, basis.n_particles() as f64);
            row
        })
        .collect();
    ManyBodyOperator::from_rows(basis.clone(), rows)
}

/// Dense `<site i|H|site j>` for an operator on the one-particle sector.
pub fn one_particle_matrix(h: &ManyBodyOperator) -> Result<DMatrix<f64>, FockError> {
    if h.basis().n_particles() != 1 {
        return Err(FockError::WrongSector { expected: 1, got: h.basis().n_particles() });
    }
    // N = 1 states are ordered site 0, 1, ..., M-1.
    Ok(h.to_dense())
}

/// Dense matrix on the two-particle occupation basis.
pub fn two_particle_matrix(h: &ManyBodyOperator) -> Result<DMatrix<f64>, FockError> {
    if h.basis().n_particles() != 2 {
        return Err(FockError::WrongSector { expected: 2, got: h.basis().n_particles() });
    }
    Ok(h.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::grid::Dim;
    use crate::lattice::Lattice;

    fn gravity() -> CouplingSpec {
        CouplingSpec::gravity(0.8, 1.1, 2.0).unwrap()
    }

    #[test]
    fn hamiltonian_is_symmetric_in_every_sector() {
        let l = Lattice::new(Dim::One, 5, 1.0).unwrap();
        for n in 0..=3 {
            let b = build_basis(&l, n).unwrap();
            let h = build_hamiltonian(&b, &gravity(), HamiltonianOptions::default()).unwrap();
            assert_eq!(h.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn under_resolved_sigma_needs_override() {
        let l = Lattice::new(Dim::One, 4, 1.0).unwrap();
        let b = build_basis(&l, 2).unwrap();
        let narrow = gravity().with_sigma(1.0);
        assert!(matches!(
            build_hamiltonian(&b, &narrow, HamiltonianOptions::default()),
            Err(FockError::UnderResolved { .. })
        ));
        let opts = HamiltonianOptions { allow_under_resolved: true, ..Default::default() };
        assert!(build_hamiltonian(&b, &narrow, opts).is_ok());
    }

    #[test]
    fn one_particle_interaction_is_delta_m_identity() {
        let l = Lattice::new(Dim::One, 6, 0.5).unwrap();
        let b = build_basis(&l, 1).unwrap();
        let c = gravity();
        let opts = HamiltonianOptions { include_kinetic: false, ..Default::default() };
        let h = one_particle_matrix(&build_hamiltonian(&b, &c, opts).unwrap()).unwrap();
        let dm = delta_m(&c).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    assert_eq!(h[(i, j)], dm);
                } else {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn free_one_particle_matrix_is_the_hopping_matrix() {
        let l = Lattice::new(Dim::One, 6, 0.5).unwrap();
        let b = build_basis(&l, 1).unwrap();
        let c = gravity().with_strength(0.0);
        let h = one_particle_matrix(&build_hamiltonian(&b, &c, HamiltonianOptions::default()).unwrap()).unwrap();
        let t = l.hopping_matrix(c.mass, Stencil::default());
        assert_eq!(h, t);
        for r in 0..6 {
            assert!(h.row(r).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn rest_mass_adds_m_times_n() {
        let l = Lattice::new(Dim::One, 3, 1.0).unwrap();
        let b = build_basis(&l, 2).unwrap();
        let c = gravity().with_strength(0.0);
        let plain = build_hamiltonian(&b, &c, HamiltonianOptions::default()).unwrap().to_dense();
        let opts = HamiltonianOptions { include_rest_mass: true, ..Default::default() };
        let with = build_hamiltonian(&b, &c, opts).unwrap().to_dense();
        let diff = with - plain;
        for i in 0..b.dimension() {
            assert!((diff[(i, i)] - 2.0 * c.mass).abs() < 1e-14);
        }
    }

    #[test]
    fn wrong_sector_is_rejected() {
        let l = Lattice::new(Dim::One, 3, 1.0).unwrap();
        let b = build_basis(&l, 2).unwrap();
        let h = build_hamiltonian(&b, &gravity(), HamiltonianOptions::default()).unwrap();
        assert!(matches!(one_particle_matrix(&h), Err(FockError::WrongSector { expected: 1, got: 2 })));
        assert!(two_particle_matrix(&h).is_ok());
    }

    #[test]
    fn coo_export_lists_every_entry() {
        let l = Lattice::new(Dim::One, 3, 1.0).unwrap();
        let b = build_basis(&l, 2).unwrap();
        let h = build_hamiltonian(&b, &gravity(), HamiltonianOptions::default()).unwrap();
        let mut buf = Vec::new();
        h.write_coo_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("row,col,re,im"));
        let mut n = 0;
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            let (r, c): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            let v: f64 = f[2].parse().unwrap();
            assert_eq!(v, h.get(r, c));
            n += 1;
        }
        assert_eq!(n, h.nnz());
    }
}
