//! The nonlinear flow on a periodic site lattice,
//!
//! ```text
//! i dchi_a/dt = sum_b t_ab chi_b + U_a chi_a,   U_a = sum_b W(r_a - r_b) |chi_b|^2,
//! ```
//!
//! with `t` the hopping matrix of [`Lattice`] and `W` a pair kernel table.
//! Orbitals are site amplitudes with `sum |chi_a|^2 = 1`. Hopping and the
//! convolution for `U` are both applied in Fourier space.

use num_complex::Complex64;

use super::NseError;
use crate::grid::FftNd;
use crate::kernels::{f_sigma, gaussian_value, CouplingSpec, CELL_AVERAGE_INVERSE_DISTANCE};
use crate::lattice::{Lattice, Stencil};

/// `W` tabulated by displacement, in the lattice's site order.
#[derive(Clone, Debug, PartialEq)]
pub struct PairKernel {
    table: Vec<f64>,
}

impl PairKernel {
    /// `W(d) = factor * s * S * F_sigma(|d|)`, with `F_sigma(0) = 1 / (sigma sqrt(pi))`
    /// on coincident sites. With `factor = N - 1` this is the Hartree kernel
    /// of the `N`-body pair Hamiltonian.
    pub fn regularized(lattice: &Lattice, coupling: &CouplingSpec, factor: f64) -> Result<Self, NseError> {
        coupling.validate()?;
        if coupling.sigma == 0.0 {
            return Err(NseError::Params("the lattice pair kernel needs sigma > 0".into()));
        }
        let s = factor * coupling.signed_strength();
        let table = (0..lattice.sites()).map(|d| s * f_sigma(lattice.distance(0, d), coupling.sigma)).collect();
        Ok(Self { table })
    }

    /// `W = s S vol^2 (smear * K0 * smear)`: a Gaussian-smeared source, the
    /// bare `1/r` Green function (`C / h` on coincident sites) and the same
    /// smearing on the test particle, all as periodic minimum-image sums.
    pub fn smeared_newton(lattice: &Lattice, coupling: &CouplingSpec) -> Result<Self, NseError> {
        coupling.validate()?;
        if coupling.sigma == 0.0 {
            return Err(NseError::Params("the smeared Newton kernel needs sigma > 0".into()));
        }
        let m = lattice.sites();
        let h = lattice.spacing();
        let fft = FftNd::new(&lattice.shape());
        let mut smear: Vec<Complex64> = (0..m)
            .map(|d| Complex64::new(gaussian_value(lattice.distance(0, d), coupling.sigma, lattice.dim()), 0.0))
            .collect();
        let mut green: Vec<Complex64> = (0..m)
            .map(|d| {
                let r = lattice.distance(0, d);
                Complex64::new(if d == 0 { CELL_AVERAGE_INVERSE_DISTANCE / h } else { 1.0 / r }, 0.0)
            })
            .collect();
        fft.forward(&mut smear);
        fft.forward(&mut green);
        let vol = lattice.cell_volume();
        let mut w: Vec<Complex64> = smear.iter().zip(&green).map(|(s, g)| s * s * g).collect();
        fft.inverse(&mut w);
        let pref = coupling.signed_strength() * vol * vol;
        Ok(Self { table: w.into_iter().map(|z| pref * z.re).collect() })
    }

    pub fn from_table(table: Vec<f64>) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// Strang integrator for the lattice flow with a cached potential.
#[derive(Debug)]
pub struct LatticeNse {
    lattice: Lattice,
    fft: FftNd,
    dispersion: Vec<f64>,
    drift: Vec<Complex64>,
    kernel_hat: Vec<f64>,
    dt: f64,
    potential: Vec<f64>,
    potential_valid: bool,
    work: Vec<Complex64>,
}

impl LatticeNse {
    pub fn new(lattice: &Lattice, mass: f64, stencil: Stencil, kernel: &PairKernel, dt: f64) -> Result<Self, NseError> {
        let m = lattice.sites();
        if kernel.table.len() != m {
            return Err(NseError::Shape { got: kernel.table.len(), want: m });
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(NseError::Params(format!("mass must be positive, got {mass}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(NseError::Params(format!("dt must be positive, got {dt}")));
        }
        let fft = FftNd::new(&lattice.shape());
        let dispersion = lattice.dispersion(mass, stencil);
        let drift = dispersion.iter().map(|&e| Complex64::from_polar(1.0, -e * dt)).collect();
        let mut k: Vec<Complex64> = kernel.table.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        fft.forward(&mut k);
        Ok(Self {
            lattice: lattice.clone(),
            fft,
            dispersion,
            drift,
            kernel_hat: k.into_iter().map(|z| z.re).collect(),
            dt,
            potential: vec![0.0; m],
            potential_valid: false,
            work: vec![Complex64::default(); m],
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check(&self, chi: &[Complex64]) -> Result<(), NseError> {
        if chi.len() != self.lattice.sites() {
            return Err(NseError::Shape { got: chi.len(), want: self.lattice.sites() });
        }
        Ok(())
    }

    fn compute_potential(&mut self, chi: &[Complex64]) {
        for (w, z) in self.work.iter_mut().zip(chi) {
            *w = Complex64::new(z.norm_sqr(), 0.0);
        }
        self.fft.forward(&mut self.work);
        for (w, k) in self.work.iter_mut().zip(&self.kernel_hat) {
            *w *= k;
        }
        self.fft.inverse(&mut self.work);
        for (u, w) in self.potential.iter_mut().zip(&self.work) {
            *u = w.re;
        }
        self.potential_valid = true;
    }

    /// `U_a` for the given orbital.
    pub fn potential(&mut self, chi: &[Complex64]) -> Result<Vec<f64>, NseError> {
        self.check(chi)?;
        self.compute_potential(chi);
        self.potential_valid = false;
        Ok(self.potential.clone())
    }

    fn kick(&self, chi: &mut [Complex64]) {
        let h = 0.5 * self.dt;
        for (z, &u) in chi.iter_mut().zip(&self.potential) {
            *z *= Complex64::from_polar(1.0, -u * h);
        }
    }

    /// One Strang step in place. Call [`reset`](Self::reset) after modifying
    /// the orbital between steps.
    pub fn step(&mut self, chi: &mut [Complex64]) -> Result<(), NseError> {
        self.check(chi)?;
        if !self.potential_valid {
            self.compute_potential(chi);
        }
        self.kick(chi);
        self.fft.forward(chi);
        for (z, d) in chi.iter_mut().zip(&self.drift) {
            *z *= d;
        }
        self.fft.inverse(chi);
        if chi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            self.potential_valid = false;
            return Err(NseError::NonFinite { step: 0 });
        }
        self.compute_potential(chi);
        self.kick(chi);
        Ok(())
    }

    pub fn reset(&mut self) {
        self.potential_valid = false;
    }

    /// Orbitals after each of `steps` steps, starting with `chi0`.
    pub fn trajectory(&mut self, chi0: &[Complex64], steps: usize) -> Result<Vec<Vec<Complex64>>, NseError> {
        self.reset();
        let mut chi = chi0.to_vec();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(chi.clone());
        for n in 0..steps {
            self.step(&mut chi).map_err(|e| match e {
                NseError::NonFinite { .. } => NseError::NonFinite { step: n + 1 },
                other => other,
            })?;
            out.push(chi.clone());
        }
        self.reset();
        Ok(out)
    }

    /// `<T> + <U>/2` per unit norm.
    pub fn energy(&mut self, chi: &[Complex64]) -> Result<f64, NseError> {
        let u = self.potential(chi)?;
        let norm2: f64 = chi.iter().map(|z| z.norm_sqr()).sum();
        let mut c = chi.to_vec();
        self.fft.forward(&mut c);
        let m = chi.len() as f64;
        let kinetic: f64 = c.iter().zip(&self.dispersion).map(|(z, e)| z.norm_sqr() * e).sum::<f64>() / m;
        let interaction: f64 = chi.iter().zip(&u).map(|(z, u)| z.norm_sqr() * u).sum();
        Ok((kinetic + 0.5 * interaction) / norm2)
    }

    /// Stationary orbital by the kinetic-preconditioned normalized gradient
    /// flow. Returns the orbital and `mu` with `||H chi - mu chi|| <= itol`.
    pub fn ground_state(
        &mut self,
        chi0: &[Complex64],
        itol: f64,
        max_iter: usize,
    ) -> Result<(Vec<Complex64>, f64), NseError> {
        self.check(chi0)?;
        let m = chi0.len();
        let normalize = |c: &mut [Complex64]| {
            let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            c.iter_mut().for_each(|z| *z /= n);
        };
        let mut chi = chi0.to_vec();
        normalize(&mut chi);
        let k_low = self.dispersion.iter().cloned().filter(|&e| e > 1e-14).fold(f64::INFINITY, f64::min);
        let mut residual = f64::INFINITY;
        for _ in 0..=max_iter {
            let u = self.potential(&chi)?;
            let mut t_chi = chi.clone();
            self.fft.forward(&mut t_chi);
            t_chi.iter_mut().zip(&self.dispersion).for_each(|(z, e)| *z *= e);
            self.fft.inverse(&mut t_chi);
            let h_chi: Vec<Complex64> = (0..m).map(|a| t_chi[a] + chi[a] * u[a]).collect();
            let mu: f64 = chi.iter().zip(&h_chi).map(|(c, h)| (c.conj() * h).re).sum();
            residual = h_chi.iter().zip(&chi).map(|(h, c)| (h - c * mu).norm_sqr()).sum::<f64>().sqrt();
            if residual <= itol {
                self.reset();
                return Ok((chi, mu));
            }
            let u_max = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let tau = 0.5 / mu.abs().max(u_max).max(k_low.min(1e300));
            let mut next: Vec<Complex64> = (0..m).map(|a| chi[a] * (1.0 + tau * (mu - u[a]))).collect();
            self.fft.forward(&mut next);
            next.iter_mut().zip(&self.dispersion).for_each(|(z, e)| *z /= 1.0 + tau * e);
            self.fft.inverse(&mut next);
            normalize(&mut next);
            chi = next;
        }
        self.reset();
        Err(NseError::NotConverged { iterations: max_iter, residual, energy_change: f64::NAN })
    }
}
