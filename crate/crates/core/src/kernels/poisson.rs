use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::grid::{Dim, FftNd, Grid};

/// Mean of `1/|r|` over a unit cube centred on the origin.
///
/// Used as the finite origin value `C / h` of the free-space Green function.
pub const CELL_AVERAGE_INVERSE_DISTANCE: f64 = 2.380_077_363_979_557;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Free-space `-G / |r - r'|` convolution on a doubled, zero-padded grid.
    Isolated,
    /// Spectral solve on the periodic box with the mean density removed.
    PeriodicZeroMean,
}

/// Solves `lap V = 4 pi G rho` on a fixed grid.
///
/// The Green function transform is computed once; each call allocates its own
/// scratch, so a solver can be shared between threads.
#[derive(Debug)]
pub struct PoissonSolver {
    grid: Grid,
    bc: BoundaryCondition,
    fft: FftNd,
    /// Transform of the unit-coupling Green function (real by symmetry),
    /// already multiplied by the cell volume where applicable.
    green_hat: Vec<f64>,
}

impl PoissonSolver {
    pub fn new(grid: &Grid, bc: BoundaryCondition) -> Result<Self, KernelError> {
        match bc {
            BoundaryCondition::Isolated => Self::isolated(grid),
            BoundaryCondition::PeriodicZeroMean => Ok(Self::periodic(grid)),
        }
    }

    fn isolated(grid: &Grid) -> Result<Self, KernelError> {
        if grid.dim() != Dim::Three {
            return Err(KernelError::IsolatedNeeds3d);
        }
        let n = grid.points();
        let m = 2 * n;
        let h = grid.spacing();
        let fft = FftNd::new(&[m, m, m]);
        let wrap = |i: usize| if i <= n { i as f64 } else { i as f64 - m as f64 };
        let mut green = vec![Complex64::default(); m * m * m];
        for i in 0..m {
            let x = wrap(i) * h;
            for j in 0..m {
                let y = wrap(j) * h;
                for k in 0..m {
                    let z = wrap(k) * h;
                    let r = (x * x + y * y + z * z).sqrt();
                    let g = if r == 0.0 { CELL_AVERAGE_INVERSE_DISTANCE / h } else { 1.0 / r };
                    green[(i * m + j) * m + k] = Complex64::new(-g, 0.0);
                }
            }
        }
        fft.forward(&mut green);
        let vol = grid.cell_volume();
        let green_hat = green.into_iter().map(|z| z.re * vol).collect();
        Ok(Self { grid: grid.clone(), bc: BoundaryCondition::Isolated, fft, green_hat })
    }

    fn periodic(grid: &Grid) -> Self {
        let fft = FftNd::new(&grid.shape());
        let green_hat = grid.k_squared().into_iter().map(|k2| if k2 == 0.0 { 0.0 } else { -4.0 * PI / k2 }).collect();
        Self { grid: grid.clone(), bc: BoundaryCondition::PeriodicZeroMean, fft, green_hat }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.bc
    }

    /// Potential of `density` with coupling `g` (the sign convention is
    /// `V = -g * int rho / |r - r'|`).
    pub fn solve(&self, density: &[f64], g: f64) -> Result<Vec<f64>, KernelError> {
        let mut out = vec![0.0; self.grid.len()];
        let mut scratch = Vec::new();
        self.solve_into(density, g, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Like [`solve`](Self::solve) but reuses caller-owned buffers.
    pub fn solve_into(
        &self,
        density: &[f64],
        g: f64,
        out: &mut [f64],
        scratch: &mut Vec<Complex64>,
    ) -> Result<(), KernelError> {
        let n_total = self.grid.len();
        if density.len() != n_total {
            return Err(KernelError::Shape { got: density.len(), want: n_total });
        }
        if let Some(i) = density.iter().position(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite(i));
        }
        match self.bc {
            BoundaryCondition::PeriodicZeroMean => {
                scratch.clear();
                scratch.extend(density.iter().map(|&v| Complex64::new(v, 0.0)));
                self.fft.forward(scratch);
                for (z, &gk) in scratch.iter_mut().zip(&self.green_hat) {
                    *z *= gk * g;
                }
                self.fft.inverse(scratch);
                for (o, z) in out.iter_mut().zip(scratch.iter()) {
                    *o = z.re;
                }
            }
            BoundaryCondition::Isolated => {
                let n = self.grid.points();
                let m = 2 * n;
                scratch.clear();
                scratch.resize(m * m * m, Complex64::default());
                for i in 0..n {
                    for j in 0..n {
                        let src = (i * n + j) * n;
                        let dst = (i * m + j) * m;
                        for k in 0..n {
                            scratch[dst + k] = Complex64::new(density[src + k], 0.0);
                        }
                    }
                }
                self.fft.forward_padded(scratch);
                for (z, &gk) in scratch.iter_mut().zip(&self.green_hat) {
                    *z *= gk * g;
                }
                self.fft.inverse_padded(scratch);
                for i in 0..n {
                    for j in 0..n {
                        let dst = (i * n + j) * n;
                        let src = (i * m + j) * m;
                        for k in 0..n {
                            out[dst + k] = scratch[src + k].re;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
