//! Semiclassical sourcing on a lattice: the Newtonian potential of a field
//! state's mean mass density, and the single-particle comparison between
//! re-sourcing that potential from the evolving orbital and evolving the
//! same orbital under the linear one-particle field Hamiltonian.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{
    build_basis, build_hamiltonian, mass_density_expectation, FockError, FockVector, HamiltonianOptions,
    SpectralPropagator,
};
use crate::kernels::{gaussian_value, CouplingSpec, InteractionKind, KernelError, CELL_AVERAGE_INVERSE_DISTANCE};
use crate::lattice::{Lattice, Stencil};
use crate::output::{fmt_float, CsvTable};

#[derive(Debug, Error, PartialEq)]
pub enum SceError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("orbital has {got} sites, lattice has {want}")]
    OrbitalLength { got: usize, want: usize },
    #[error("orbital has zero norm")]
    ZeroOrbital,
    #[error("semiclassical sourcing needs a pair interaction, got {0:?}")]
    External(InteractionKind),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("non-finite orbital at step {step}")]
    NonFinite { step: usize },
}

/// Bare lattice Green function: `1/r`, and `C / h` on coincident sites.
fn green(lattice: &Lattice, a: usize, b: usize) -> f64 {
    if a == b {
        CELL_AVERAGE_INVERSE_DISTANCE / lattice.spacing()
    } else {
        1.0 / lattice.distance(a, b)
    }
}

/// Potential per unit mass sourced by a mean mass density `mu`:
/// `V(r) = (s S / m^2) sum_r' vol mu(r') K0(r - r')`. For gravity `s S / m^2 = -G`.
pub fn potential_from_density(lattice: &Lattice, mu: &[f64], coupling: &CouplingSpec) -> Result<Vec<f64>, SceError> {
    coupling.validate()?;
    if coupling.kind == InteractionKind::CoulombExternalAttractive {
        return Err(SceError::External(coupling.kind));
    }
    let m = lattice.sites();
    if mu.len() != m {
        return Err(SceError::OrbitalLength { got: mu.len(), want: m });
    }
    let pref = coupling.signed_strength() / (coupling.mass * coupling.mass) * lattice.cell_volume();
    Ok((0..m)
        .map(|a| pref * (0..m).filter(|&b| mu[b] != 0.0).map(|b| mu[b] * green(lattice, a, b)).sum::<f64>())
        .collect())
}

/// Newtonian potential of `<mu_reg>` in the state `v`.
///
/// Linear in the density expectation; the vacuum gives zero.
pub fn sce_potential(v: &FockVector, coupling: &CouplingSpec) -> Result<Vec<f64>, SceError> {
    let lattice = v.basis().lattice();
    if v.basis().n_particles() == 0 || v.norm() == 0.0 {
        return Ok(vec![0.0; lattice.sites()]);
    }
    let mu = mass_density_expectation(v, coupling.sigma, coupling.mass);
    potential_from_density(lattice, &mu, coupling)
}

/// Per-site energy `U_a = m sum_r vol s_sigma(r - r_a) V(r)` felt by a
/// particle on site `a`.
fn smeared_energy(lattice: &Lattice, potential: &[f64], coupling: &CouplingSpec) -> Vec<f64> {
    let m = lattice.sites();
    let vol = lattice.cell_volume();
    (0..m)
        .map(|a| {
            coupling.mass
                * vol
                * (0..m)
                    .map(|r| gaussian_value(lattice.distance(r, a), coupling.sigma, lattice.dim()) * potential[r])
                    .sum::<f64>()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceMode {
    /// Hopping plus the potential re-sourced from the orbital's own density.
    MeanFieldSourced,
    /// The one-particle sector of the field Hamiltonian: hopping plus `delta_m`.
    ExactField,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MisstepParams {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub stencil: Stencil,
    /// Keep the potential sourced by the initial orbital instead of re-sourcing.
    pub frozen_source: bool,
    /// Accept `sigma < 2 * spacing` in the field Hamiltonian.
    pub allow_under_resolved: bool,
}

impl Default for MisstepParams {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 1000,
            record_every: 10,
            stencil: Stencil::FourthOrder,
            frozen_source: false,
            allow_under_resolved: false,
        }
    }
}

impl MisstepParams {
    pub fn validate(&self) -> Result<(), SceError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SceError::Params(format!("dt must be positive, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(SceError::Params("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_orbital(lattice: &Lattice, orbital: &[Complex64]) -> Result<Vec<Complex64>, SceError> {
    if orbital.len() != lattice.sites() {
        return Err(SceError::OrbitalLength { got: orbital.len(), want: lattice.sites() });
    }
    let n = orbital.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(SceError::ZeroOrbital);
    }
    Ok(orbital.iter().map(|z| z / n).collect())
}

/// Dense `exp(-i T dt)` for the hopping matrix.
fn hopping_exponential(lattice: &Lattice, mass: f64, stencil: Stencil, dt: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(lattice.hopping_matrix(mass, stencil));
    let q = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * dt)));
    &q * phases * q.transpose()
}

/// Orbitals after every step in the given mode, starting with the normalized
/// initial orbital.
pub fn semiclassical_trajectory(
    lattice: &Lattice,
    orbital: &[Complex64],
    coupling: &CouplingSpec,
    mode: SceMode,
    params: &MisstepParams,
) -> Result<Vec<Vec<Complex64>>, SceError> {
    params.validate()?;
    coupling.validate()?;
    let chi0 = check_orbital(lattice, orbital)?;
    match mode {
        SceMode::MeanFieldSourced => mean_field_sourced(lattice, chi0, coupling, params),
        SceMode::ExactField => exact_field(lattice, chi0, coupling, params),
    }
}

fn orbital_energy(lattice: &Lattice, chi: &[Complex64], coupling: &CouplingSpec) -> Result<Vec<f64>, SceError> {
    let mu: Vec<f64> = chi.iter().map(|z| coupling.mass * z.norm_sqr()).collect();
    // Smear the point density, source the potential, then smear again on the test particle.
    let smeared: Vec<f64> = (0..lattice.sites())
        .map(|r| {
            (0..lattice.sites())
                .map(|b| gaussian_value(lattice.distance(r, b), coupling.sigma, lattice.dim()) * mu[b])
                .sum()
        })
        .collect();
    let v = potential_from_density(lattice, &smeared, coupling)?;
    Ok(smeared_energy(lattice, &v, coupling))
}

fn mean_field_sourced(
    lattice: &Lattice,
    mut chi: Vec<Complex64>,
    coupling: &CouplingSpec,
    params: &MisstepParams,
) -> Result<Vec<Vec<Complex64>>, SceError> {
    if coupling.kind == InteractionKind::CoulombExternalAttractive {
        return Err(SceError::External(coupling.kind));
    }
    let drift = hopping_exponential(lattice, coupling.mass, params.stencil, params.dt);
    let half = 0.5 * params.dt;
    let kick = |chi: &mut [Complex64], u: &[f64]| {
        for (z, &u) in chi.iter_mut().zip(u) {
            *z *= Complex64::from_polar(1.0, -u * half);
        }
    };
    let mut u = orbital_energy(lattice, &chi, coupling)?;
    let mut out = Vec::with_capacity(params.steps + 1);
    out.push(chi.clone());
    for step in 1..=params.steps {
        kick(&mut chi, &u);
        chi = (&drift * nalgebra::DVector::from_vec(chi)).data.into();
        if chi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SceError::NonFinite { step });
        }
        if !params.frozen_source {
            u = orbital_energy(lattice, &chi, coupling)?;
        }
        kick(&mut chi, &u);
        out.push(chi.clone());
    }
    Ok(out)
}

fn exact_field(
    lattice: &Lattice,
    chi0: Vec<Complex64>,
    coupling: &CouplingSpec,
    params: &MisstepParams,
) -> Result<Vec<Vec<Complex64>>, SceError> {
    let basis = build_basis(lattice, 1)?;
    let options = HamiltonianOptions {
        stencil: params.stencil,
        allow_under_resolved: params.allow_under_resolved,
        ..Default::default()
    };
    let h = build_hamiltonian(&basis, coupling, options)?;
    let prop = SpectralPropagator::new(&h);
    let psi0 = FockVector::one_particle(basis.clone(), &chi0)?;
    let index: Vec<usize> = (0..lattice.sites())
        .map(|a| {
            let mut occ = vec![0u16; lattice.sites()];
            occ[a] = 1;
            basis.index_of(&occ).expect("one-particle state is in the basis")
        })
        .collect();
    Ok((0..=params.steps)
        .map(|step| {
            let amps = prop.propagate(psi0.amplitudes(), step as f64 * params.dt);
            index.iter().map(|&i| amps[i]).collect()
        })
        .collect())
}

fn norm(chi: &[Complex64]) -> f64 {
    chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `min_phi || a/|a| - e^{i phi} b/|b| || = sqrt(2 - 2 |<a|b>| / (|a| |b|))`.
///
/// Blind to the global phase `delta_m` puts on the field evolution.
pub fn aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm() / (norm(a) * norm(b));
    (2.0 - 2.0 * overlap.min(1.0)).max(0.0).sqrt()
}

/// `sum_a sqrt(rho_a rho'_a)` of the normalized densities; 1 for equal densities.
pub fn density_overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let (na, nb) = (norm(a).powi(2), norm(b).powi(2));
    a.iter().zip(b).map(|(x, y)| (x.norm_sqr() / na * y.norm_sqr() / nb).sqrt()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MisstepRecord {
    pub t: f64,
    pub l2_distance: f64,
    pub density_overlap: f64,
    pub norm_a: f64,
    pub norm_b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MisstepReport {
    pub records: Vec<MisstepRecord>,
    /// Full trajectories, one orbital per step.
    pub mean_field: Vec<Vec<Complex64>>,
    pub exact: Vec<Vec<Complex64>>,
}

impl MisstepReport {
    pub const COLUMNS: [&'static str; 5] = ["t", "l2_distance", "density_overlap", "norm_a", "norm_b"];

    pub fn max_distance(&self) -> f64 {
        self.records.iter().map(|r| r.l2_distance).fold(0.0, f64::max)
    }

    /// First recorded time with distance above `threshold`.
    pub fn first_exceeding(&self, threshold: f64) -> Option<f64> {
        self.records.iter().find(|r| r.l2_distance > threshold).map(|r| r.t)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(Self::COLUMNS);
        for r in &self.records {
            t.push([r.t, r.l2_distance, r.density_overlap, r.norm_a, r.norm_b].iter().map(|&x| fmt_float(x)).collect());
        }
        t
    }
}

/// Runs both modes from the same normalized orbital and records their
/// phase-aligned distance every `record_every` steps and at the end.
pub fn misstep_compare(
    lattice: &Lattice,
    orbital: &[Complex64],
    coupling: &CouplingSpec,
    params: &MisstepParams,
) -> Result<MisstepReport, SceError> {
    let mean_field = semiclassical_trajectory(lattice, orbital, coupling, SceMode::MeanFieldSourced, params)?;
    let exact = semiclassical_trajectory(lattice, orbital, coupling, SceMode::ExactField, params)?;
    let records = (0..=params.steps)
        .filter(|&s| s % params.record_every == 0 || s == params.steps)
        .map(|s| {
            let (a, b) = (&mean_field[s], &exact[s]);
            MisstepRecord {
                t: s as f64 * params.dt,
                l2_distance: aligned_distance(a, b),
                density_overlap: density_overlap(a, b),
                norm_a: norm(a),
                norm_b: norm(b),
            }
        })
        .collect();
    Ok(MisstepReport { records, mean_field, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dim;
    use crate::nse::{LatticeNse, PairKernel};

    fn lump(lattice: &Lattice, centre: f64, width: f64, k: f64) -> Vec<Complex64> {
        (0..lattice.sites())
            .map(|a| {
                let x = a as f64 * lattice.spacing() - centre;
                Complex64::from_polar((-0.5 * (x / width).powi(2)).exp(), k * x)
            })
            .collect()
    }

    fn setup() -> (Lattice, CouplingSpec) {
        (Lattice::new(Dim::One, 24, 1.0).unwrap(), CouplingSpec::gravity(4.0, 1.0, 2.0).unwrap())
    }

    #[test]
    fn vacuum_sources_nothing() {
        let (l, c) = setup();
        let vac = FockVector::basis_state(build_basis(&l, 0).unwrap(), &[0; 24]).unwrap();
        assert!(sce_potential(&vac, &c).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_particle_potential_is_smeared_newton() {
        let (l, c) = setup();
        let phi = lump(&l, 11.0, 1.5, 0.3);
        let n2: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        let v = sce_potential(&FockVector::one_particle(build_basis(&l, 1).unwrap(), &phi).unwrap(), &c).unwrap();
        let m = l.sites();
        let sig = |d: f64| {
            (-(d * d) / (2.0 * c.sigma * c.sigma)).exp() / (2.0 * std::f64::consts::PI * c.sigma * c.sigma).sqrt()
        };
        for a in [0, 5, 11, 17] {
            let mut want = 0.0;
            for r in 0..m {
                let mu_r: f64 = (0..m).map(|b| sig(l.distance(r, b)) * phi[b].norm_sqr() / n2).sum();
                let k = if r == a { CELL_AVERAGE_INVERSE_DISTANCE } else { 1.0 / l.distance(a, r) };
                want -= 4.0 * mu_r * k;
            }
            assert!((v[a] - want).abs() < 1e-12 * want.abs(), "{a}: {} vs {want}", v[a]);
        }
    }

    #[test]
    fn two_separated_lumps_superpose() {
        let l = Lattice::new(Dim::One, 20, 1.0).unwrap();
        let c = CouplingSpec::gravity(1.0, 2.0, 2.0).unwrap();
        let m = l.sites();
        // Disjoint supports make the orbitals orthogonal.
        let mut p1 = vec![Complex64::default(); m];
        let mut p2 = vec![Complex64::default(); m];
        for a in 1..5 {
            p1[a] = Complex64::new(1.0 + a as f64, 0.5);
            p2[a + 10] = Complex64::new(0.5, -(a as f64));
        }
        let n1 = norm(&p1);
        let n2 = norm(&p2);
        p1.iter_mut().for_each(|z| *z /= n1);
        p2.iter_mut().for_each(|z| *z /= n2);
        let b1 = build_basis(&l, 1).unwrap();
        let b2 = build_basis(&l, 2).unwrap();
        let amps: Vec<Complex64> = b2
            .states()
            .map(|occ| {
                let sites: Vec<usize> = (0..m).flat_map(|a| std::iter::repeat_n(a, occ[a] as usize)).collect();
                let (x, y) = (sites[0], sites[1]);
                let s = p1[x] * p2[y] + p1[y] * p2[x];
                if x == y {
                    s / 2f64.sqrt()
                } else {
                    s
                }
            })
            .collect();
        let pair = FockVector::new(b2, amps).unwrap();
        let v = sce_potential(&pair, &c).unwrap();
        let v1 = sce_potential(&FockVector::one_particle(b1.clone(), &p1).unwrap(), &c).unwrap();
        let v2 = sce_potential(&FockVector::one_particle(b1, &p2).unwrap(), &c).unwrap();
        for a in 0..m {
            assert!((v[a] - v1[a] - v2[a]).abs() < 1e-10 * v[a].abs());
        }
    }

    #[test]
    fn mean_field_sourcing_is_the_lattice_nse() {
        let (l, c) = setup();
        let chi = lump(&l, 8.0, 1.2, 0.4);
        let params = MisstepParams { dt: 0.02, steps: 200, ..Default::default() };
        let ours = semiclassical_trajectory(&l, &chi, &c, SceMode::MeanFieldSourced, &params).unwrap();
        let kernel = PairKernel::smeared_newton(&l, &c).unwrap();
        let mut nse = LatticeNse::new(&l, c.mass, params.stencil, &kernel, params.dt).unwrap();
        let theirs = nse.trajectory(&ours[0], params.steps).unwrap();
        for (a, b) in ours.iter().zip(&theirs) {
            let d = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            assert!(d < 1e-10, "{d}");
        }
        for w in ours.windows(2) {
            assert!((norm(&w[1]) - norm(&w[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn field_density_ignores_the_coupling() {
        let (l, c) = setup();
        let chi = lump(&l, 8.0, 1.2, 0.4);
        let params = MisstepParams { steps: 300, ..Default::default() };
        let with = semiclassical_trajectory(&l, &chi, &c, SceMode::ExactField, &params).unwrap();
        let without = semiclassical_trajectory(&l, &chi, &c.with_strength(0.0), SceMode::ExactField, &params).unwrap();
        for (a, b) in with.iter().zip(&without) {
            for (x, y) in a.iter().zip(b) {
                assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coupling_has_no_misstep() {
        let (l, c) = setup();
        let chi = lump(&l, 8.0, 1.2, 0.4);
        let params = MisstepParams { steps: 200, record_every: 20, ..Default::default() };
        let report = misstep_compare(&l, &chi, &c.with_strength(0.0), &params).unwrap();
        assert!(report.max_distance() < 1e-7);
        assert!(report.records.iter().all(|r| (r.density_overlap - 1.0).abs() < 1e-12));
    }

    #[test]
    fn self_gravity_drives_the_orbitals_apart() {
        let (l, c) = setup();
        let chi = lump(&l, 8.0, 1.2, 0.0);
        let params = MisstepParams { steps: 500, record_every: 50, ..Default::default() };
        let report = misstep_compare(&l, &chi, &c, &params).unwrap();
        assert_eq!(report.records[0].l2_distance, 0.0);
        assert!(report.max_distance() > 0.01);
        assert_eq!(report.records.len(), 11);
        assert_eq!(report.to_csv().len(), 11);
    }

    #[test]
    fn frozen_source_is_linear_in_a_fixed_potential() {
        let (l, c) = setup();
        let chi = lump(&l, 8.0, 1.2, 0.4);
        let frozen = MisstepParams { steps: 100, frozen_source: true, ..Default::default() };
        let live = MisstepParams { frozen_source: false, ..frozen };
        let a = semiclassical_trajectory(&l, &chi, &c, SceMode::MeanFieldSourced, &frozen).unwrap();
        let b = semiclassical_trajectory(&l, &chi, &c, SceMode::MeanFieldSourced, &live).unwrap();
        assert!(aligned_distance(&a[100], &b[100]) > 0.0);
        assert!((norm(&a[100]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let (l, c) = setup();
        let p = MisstepParams::default();
        assert_eq!(
            semiclassical_trajectory(&l, &[Complex64::default(); 3], &c, SceMode::ExactField, &p).unwrap_err(),
            SceError::OrbitalLength { got: 3, want: 24 }
        );
        assert_eq!(
            semiclassical_trajectory(&l, &vec![Complex64::default(); 24], &c, SceMode::ExactField, &p).unwrap_err(),
            SceError::ZeroOrbital
        );
        let bad = MisstepParams { dt: -1.0, ..p };
        assert!(matches!(misstep_compare(&l, &lump(&l, 3.0, 1.0, 0.0), &c, &bad), Err(SceError::Params(_))));
    }
}
