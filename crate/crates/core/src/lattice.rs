//! Small periodic lattices for the second-quantized side.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Dim;

/// Default cap on the number of lattice sites.
pub const DEFAULT_SITE_CAP: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("lattice needs at least one site per axis")]
    Empty,
    #[error("spacing must be finite and positive, got {0}")]
    Spacing(f64),
    #[error("lattice has {sites} sites, above the cap of {cap}")]
    TooManySites { sites: usize, cap: usize },
}

/// Finite-difference stencil for the periodic Laplacian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// Three-point `(f[-1] - 2 f[0] + f[1]) / h^2`.
    NearestNeighbor,
    /// Five-point, fourth-order accurate.
    #[default]
    FourthOrder,
}

impl Stencil {
    /// Coefficients `c_s` for offsets `s = 0, 1, 2, ...` (symmetric), in units of `1/h^2`.
    pub fn coefficients(self) -> &'static [f64] {
        match self {
            Stencil::NearestNeighbor => &[-2.0, 1.0],
            Stencil::FourthOrder => &[-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        }
    }

    /// Fourier symbol of the 1D second difference at wavenumber `k`.
    pub fn symbol(self, k: f64, h: f64) -> f64 {
        let c = self.coefficients();
        let mut s = c[0];
        for (off, &cs) in c.iter().enumerate().skip(1) {
            s += 2.0 * cs * (off as f64 * k * h).cos();
        }
        s / (h * h)
    }
}

/// A periodic hypercubic lattice with `sites_per_axis^dim` sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: Dim,
    sites_per_axis: usize,
    spacing: f64,
}

impl Lattice {
    pub fn new(dim: Dim, sites_per_axis: usize, spacing: f64) -> Result<Self, LatticeError> {
        Self::with_site_cap(dim, sites_per_axis, spacing, DEFAULT_SITE_CAP)
    }

    pub fn with_site_cap(dim: Dim, sites_per_axis: usize, spacing: f64, cap: usize) -> Result<Self, LatticeError> {
        if sites_per_axis == 0 {
            return Err(LatticeError::Empty);
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LatticeError::Spacing(spacing));
        }
        let sites = sites_per_axis.pow(dim.axes() as u32);
        if sites > cap {
            return Err(LatticeError::TooManySites { sites, cap });
        }
        Ok(Self { dim, sites_per_axis, spacing })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn sites_per_axis(&self) -> usize {
        self.sites_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of sites `M`.
    pub fn sites(&self) -> usize {
        self.sites_per_axis.pow(self.dim.axes() as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim.axes() as i32)
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.sites_per_axis; self.dim.axes()]
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        let n = self.sites_per_axis;
        match self.dim {
            Dim::One => [site, 0, 0],
            Dim::Three => [site / (n * n), (site / n) % n, site % n],
        }
    }

    pub fn site(&self, coords: [usize; 3]) -> usize {
        let n = self.sites_per_axis;
        match self.dim {
            Dim::One => coords[0] % n,
            Dim::Three => ((coords[0] % n) * n + coords[1] % n) * n + coords[2] % n,
        }
    }

    /// Site reached from `site` by a signed displacement along `axis`.
    pub fn shift(&self, site: usize, axis: usize, by: isize) -> usize {
        let n = self.sites_per_axis as isize;
        let mut c = self.coords(site);
        c[axis] = (c[axis] as isize + by).rem_euclid(n) as usize;
        self.site(c)
    }

    /// Minimum-image separation vector from `a` to `b`, in lattice units.
    pub fn displacement(&self, a: usize, b: usize) -> [f64; 3] {
        let n = self.sites_per_axis as isize;
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut d = [0.0; 3];
        for ax in 0..self.dim.axes() {
            let mut x = (cb[ax] as isize - ca[ax] as isize).rem_euclid(n);
            if x > n / 2 {
                x -= n;
            }
            d[ax] = x as f64;
        }
        d
    }

    /// Minimum-image distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() * self.spacing
    }

    /// Single-particle kinetic matrix `-(1/2m) lap` with periodic wrap.
    ///
    /// Stencil legs that land on the same site (short axes) accumulate.
    pub fn hopping_matrix(&self, mass: f64, stencil: Stencil) -> DMatrix<f64> {
        let m = self.sites();
        let c = stencil.coefficients();
        let pref = -1.0 / (2.0 * mass * self.spacing * self.spacing);
        let mut t = DMatrix::zeros(m, m);
        for a in 0..m {
            for ax in 0..self.dim.axes() {
                t[(a, a)] += pref * c[0];
                for (off, &cs) in c.iter().enumerate().skip(1) {
                    for sign in [-1isize, 1] {
                        let b = self.shift(a, ax, sign * off as isize);
                        t[(a, b)] += pref * cs;
                    }
                }
            }
        }
        t
    }

    /// Eigenvalues of [`hopping_matrix`](Self::hopping_matrix) in FFT bin order.
    pub fn dispersion(&self, mass: f64, stencil: Stencil) -> Vec<f64> {
        let n = self.sites_per_axis;
        let h = self.spacing;
        let k1: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / (n as f64 * h)).collect();
        (0..self.sites())
            .map(|s| {
                let c = self.coords(s);
                let lap: f64 = (0..self.dim.axes()).map(|ax| stencil.symbol(k1[c[ax]], h)).sum();
                -lap / (2.0 * mass)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn site_cap_is_enforced() {
        assert_eq!(Lattice::new(Dim::Three, 8, 1.0).unwrap_err(), LatticeError::TooManySites { sites: 512, cap: 64 });
        assert!(Lattice::with_site_cap(Dim::Three, 8, 1.0, 512).is_ok());
        assert_eq!(Lattice::new(Dim::One, 0, 1.0).unwrap_err(), LatticeError::Empty);
    }

    #[test]
    fn minimum_image_distance() {
        let l = Lattice::new(Dim::One, 6, 0.5).unwrap();
        assert_eq!(l.distance(0, 5), 0.5);
        assert_eq!(l.distance(0, 3), 1.5);
        let l3 = Lattice::new(Dim::Three, 4, 1.0).unwrap();
        let far = l3.site([3, 3, 3]);
        assert!((l3.distance(0, far) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hopping_rows_sum_to_zero_and_matrix_is_symmetric() {
        for stencil in [Stencil::NearestNeighbor, Stencil::FourthOrder] {
            for (dim, n) in [(Dim::One, 2), (Dim::One, 4), (Dim::One, 7), (Dim::Three, 3)] {
                let l = Lattice::new(dim, n, 0.7).unwrap();
                let t = l.hopping_matrix(1.3, stencil);
                assert_eq!(t, t.transpose());
                for r in 0..l.sites() {
                    assert!(t.row(r).sum().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dispersion_matches_hopping_spectrum() {
        for stencil in [Stencil::NearestNeighbor, Stencil::FourthOrder] {
            let l = Lattice::new(Dim::Three, 3, 0.5).unwrap();
            let mut want = SymmetricEigen::new(l.hopping_matrix(2.0, stencil)).eigenvalues.as_slice().to_vec();
            let mut got = l.dispersion(2.0, stencil);
            want.sort_by(f64::total_cmp);
            got.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    /// The default stencil stays within 2% of k^2/2m up to a quarter of k_max;
    /// the three-point stencil is only good to about 5% there.
    #[test]
    fn continuum_dispersion_spot_check() {
        let (n, h, mass) = (32, 0.25, 1.0);
        let l = Lattice::new(Dim::One, n, h).unwrap();
        let kmax = PI / h;
        for (stencil, tol) in [(Stencil::FourthOrder, 0.02), (Stencil::NearestNeighbor, 0.06)] {
            let disp = l.dispersion(mass, stencil);
            for (i, e) in disp.iter().enumerate().skip(1) {
                let k = 2.0 * PI * i as f64 / (n as f64 * h);
                if k > kmax / 4.0 {
                    continue;
                }
                let free = k * k / (2.0 * mass);
                assert!((e - free).abs() <= tol * free, "{stencil:?} k={k}: {e} vs {free}");
            }
        }
    }
}
