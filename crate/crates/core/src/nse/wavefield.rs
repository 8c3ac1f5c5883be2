use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NseError;
use crate::grid::Grid;

/// A complex field on a uniform periodic grid, carrying the particle mass
/// that sets its kinetic term.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    grid: Grid,
    amplitude: Vec<Complex64>,
    mass: f64,
}

impl WaveField {
    pub fn new(grid: Grid, amplitude: Vec<Complex64>, mass: f64) -> Result<Self, NseError> {
        if amplitude.len() != grid.len() {
            return Err(NseError::Shape { got: amplitude.len(), want: grid.len() });
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(NseError::Params(format!("mass must be positive, got {mass}")));
        }
        if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NseError::NonFinite { step: 0 });
        }
        Ok(Self { grid, amplitude, mass })
    }

    pub fn from_fn(grid: Grid, mass: f64, f: impl Fn([f64; 3]) -> Complex64) -> Result<Self, NseError> {
        let amplitude = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, amplitude, mass)
    }

    /// Unit-norm Gaussian packet `exp(-|r - c|^2 / 4 w^2 + i p.r)`, so that
    /// `w` is the rms width of `|psi|^2` along each axis.
    pub fn gaussian(grid: Grid, mass: f64, centre: [f64; 3], width: f64, momentum: [f64; 3]) -> Result<Self, NseError> {
        let axes = grid.dim().axes();
        let mut psi = Self::from_fn(grid, mass, |r| {
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for a in 0..axes {
                r2 += (r[a] - centre[a]).powi(2);
                phase += momentum[a] * r[a];
            }
            Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), phase)
        })?;
        psi.normalize();
        Ok(psi)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn amplitude_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<Complex64> {
        self.amplitude
    }

    /// `sum |psi|^2 dV`.
    pub fn norm_squared(&self) -> f64 {
        self.amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalize(&mut self) {
        self.normalize_to(1.0);
    }

    /// Rescales so that `sum |psi|^2 dV = target`.
    pub fn normalize_to(&mut self, target: f64) {
        let n = self.norm_squared();
        if n > 0.0 {
            let s = (target / n).sqrt();
            self.amplitude.iter_mut().for_each(|z| *z *= s);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitude.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `sum conj(self) other dV`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| a.conj() * b).sum::<Complex64>()
            * self.grid.cell_volume()
    }

    pub fn l2_distance(&self, other: &WaveField) -> f64 {
        (self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            * self.grid.cell_volume())
        .sqrt()
    }

    /// L2 distance between the densities `|psi|^2`.
    pub fn density_distance(&self, other: &WaveField) -> f64 {
        (self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).powi(2)).sum::<f64>()
            * self.grid.cell_volume())
        .sqrt()
    }

    /// `a * self + b * other`.
    pub fn superpose(&self, a: Complex64, other: &WaveField, b: Complex64) -> Result<WaveField, NseError> {
        if self.grid != other.grid {
            return Err(NseError::Params("superposed fields live on different grids".into()));
        }
        let amplitude = self.amplitude.iter().zip(&other.amplitude).map(|(x, y)| a * x + b * y).collect();
        Ok(WaveField { grid: self.grid.clone(), amplitude, mass: self.mass })
    }
}

/// Scalar diagnostics of a field at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
    pub rms_width: f64,
    pub peak_density: f64,
    pub center_of_mass: [f64; 3],
}

impl Observables {
    /// Moments of `|psi|^2` about its centre of mass (positions are the grid's
    /// centred coordinates, without unwrapping across the periodic boundary).
    pub fn measure(psi: &WaveField, time: f64, energy: f64) -> Self {
        let grid = psi.grid();
        let dv = grid.cell_volume();
        let density = psi.density();
        let norm = density.iter().sum::<f64>() * dv;
        let mut com = [0.0; 3];
        for (i, &d) in density.iter().enumerate() {
            let r = grid.position(i);
            for a in 0..3 {
                com[a] += d * r[a] * dv;
            }
        }
        com.iter_mut().for_each(|c| *c /= norm);
        let mut second = 0.0;
        for (i, &d) in density.iter().enumerate() {
            let r = grid.position(i);
            second += d * ((r[0] - com[0]).powi(2) + (r[1] - com[1]).powi(2) + (r[2] - com[2]).powi(2)) * dv;
        }
        Self {
            time,
            norm,
            energy,
            rms_width: (second / norm).max(0.0).sqrt(),
            peak_density: density.iter().cloned().fold(0.0, f64::max),
            center_of_mass: com,
        }
    }
}
