use std::f64::consts::PI;

use num_complex::Complex64;

use super::KernelError;
use crate::grid::{Dim, FftNd, Grid};

/// Normalized Gaussian `(2 pi sigma^2)^{-dim/2} exp(-r^2 / 2 sigma^2)`.
pub fn gaussian_value(r: f64, sigma: f64, dim: Dim) -> f64 {
    let d = dim.axes() as f64;
    (2.0 * PI * sigma * sigma).powf(-d / 2.0) * (-r * r / (2.0 * sigma * sigma)).exp()
}

/// A Gaussian smearing function sampled on a grid, centred on the origin
/// with minimum-image distances.
#[derive(Clone, Debug)]
pub struct SmearingKernel {
    sigma: f64,
    grid: Grid,
    samples: Vec<f64>,
    under_resolved: bool,
}

/// Samples the smearing Gaussian on `grid`.
///
/// Widths below two grid spacings still succeed but set
/// [`SmearingKernel::under_resolved`].
pub fn gaussian_smearing(sigma: f64, grid: &Grid) -> Result<SmearingKernel, KernelError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(KernelError::Sigma(sigma));
    }
    let under_resolved = sigma < 2.0 * grid.spacing();
    if under_resolved {
        log::warn!("smearing width {sigma} is below two grid spacings ({})", grid.spacing());
    }
    let dim = grid.dim();
    let samples = grid.radial_field(|r| gaussian_value(r, sigma, dim));
    Ok(SmearingKernel { sigma, grid: grid.clone(), samples, under_resolved })
}

impl SmearingKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Kernel values in the grid's flat order; the peak is at the centre index.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn under_resolved(&self) -> bool {
        self.under_resolved
    }

    /// Discrete integral `sum * cell volume`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Periodic convolution `(kernel * field)(x) = sum_y kernel(x - y) field(y) dV`.
    pub fn convolve(&self, field: &[f64]) -> Result<Vec<f64>, KernelError> {
        let n = self.grid.len();
        if field.len() != n {
            return Err(KernelError::Shape { got: field.len(), want: n });
        }
        let fft = FftNd::new(&self.grid.shape());
        // Shift the kernel so that zero displacement sits at index 0.
        let half = self.grid.points() / 2;
        let mut k: Vec<Complex64> = vec![Complex64::default(); n];
        for (flat, &v) in self.samples.iter().enumerate() {
            let idx = self.grid.unravel(flat);
            let mut shifted = [0; 3];
            for a in 0..self.grid.dim().axes() {
                shifted[a] = (idx[a] + self.grid.points() - half) % self.grid.points();
            }
            k[self.grid.flat_index(shifted)] = Complex64::new(v, 0.0);
        }
        let mut f: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.forward(&mut k);
        fft.forward(&mut f);
        let vol = self.grid.cell_volume();
        for (a, b) in f.iter_mut().zip(&k) {
            *a *= b * vol;
        }
        fft.inverse(&mut f);
        Ok(f.into_iter().map(|z| z.re).collect())
    }
}
