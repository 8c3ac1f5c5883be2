//! Uniform periodic grids and the FFT machinery shared by the continuum solvers.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("unsupported dimension {0}; only 1 and 3 are supported")]
    Dimension(usize),
    #[error("points per axis must be a power of two >= 2, got {0}")]
    Points(usize),
    #[error("spacing must be finite and positive, got {0}")]
    Spacing(f64),
}

/// Spatial dimension of a grid or lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    One,
    Three,
}

impl Dim {
    pub fn axes(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Three => 3,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = GridError;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Dim::One),
            3 => Ok(Dim::Three),
            other => Err(GridError::Dimension(other)),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.axes()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D", self.axes())
    }
}

/// A uniform periodic grid with `points` samples per axis.
///
/// Sample `i` along an axis sits at `x_i = (i - points/2) * spacing`, so the
/// origin is the centre index `points/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: Dim,
    points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(dim: Dim, points: usize, spacing: f64) -> Result<Self, GridError> {
        if points < 2 || !points.is_power_of_two() {
            return Err(GridError::Points(points));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::Spacing(spacing));
        }
        Ok(Self { dim, points, spacing })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Side length of the periodic box.
    pub fn length(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim.axes() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim.axes() as i32)
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim.axes()]
    }

    /// Largest resolved wavenumber, `pi / spacing`.
    pub fn k_max(&self) -> f64 {
        PI / self.spacing
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.spacing
    }

    /// Axis indices of a flat (row-major) index; unused axes are zero.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let n = self.points;
        match self.dim {
            Dim::One => [flat, 0, 0],
            Dim::Three => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let n = self.points;
        match self.dim {
            Dim::One => idx[0],
            Dim::Three => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Cartesian position of a flat index; unused components are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut r = [0.0; 3];
        for (a, slot) in r.iter_mut().enumerate().take(self.dim.axes()) {
            *slot = self.coordinate(idx[a]);
        }
        r
    }

    /// Signed wavenumber of FFT bin `i` (standard FFT ordering).
    pub fn wavenumber(&self, i: usize) -> f64 {
        let n = self.points as i64;
        let i = i as i64;
        let j = if i < n / 2 { i } else { i - n };
        2.0 * PI * j as f64 / self.length()
    }

    /// `|k|^2` for every FFT bin, in the same flat order as the data.
    pub fn k_squared(&self) -> Vec<f64> {
        let ks: Vec<f64> = (0..self.points).map(|i| self.wavenumber(i)).collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.unravel(flat);
                (0..self.dim.axes()).map(|a| ks[idx[a]] * ks[idx[a]]).sum()
            })
            .collect()
    }

    /// Samples `f(r)` at each point's distance from the origin.
    pub fn radial_field(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|flat| {
                let r = self.position(flat);
                f((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt())
            })
            .collect()
    }
}

/// Row-major shape padded to three axes with leading ones.
fn shape3(shape: &[usize]) -> [usize; 3] {
    match *shape {
        [c] => [1, 1, c],
        [b, c] => [1, b, c],
        [a, b, c] => [a, b, c],
        _ => panic!("FFT shape must have 1 to 3 axes"),
    }
}

/// Multi-dimensional complex FFT over a row-major array.
///
/// The pruned variants skip lines that are known to be zero on input or
/// unneeded on output, which is what the zero-padded Poisson solver relies on.
pub struct FftNd {
    shape: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl fmt::Debug for FftNd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftNd").field("shape", &self.shape).finish()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let shape = shape3(shape);
        let mut planner = FftPlanner::new();
        let forward = shape.map(|n| planner.plan_fft_forward(n));
        let inverse = shape.map(|n| planner.plan_fft_inverse(n));
        Self { shape, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        let [a, b, c] = self.shape;
        self.pass2(data, Direction::Forward, a, b);
        self.pass1(data, Direction::Forward, a, c);
        self.pass0(data, Direction::Forward, b, c);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let [a, b, c] = self.shape;
        self.pass0(data, Direction::Inverse, b, c);
        self.pass1(data, Direction::Inverse, a, c);
        self.pass2(data, Direction::Inverse, a, b);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Forward transform of data that is nonzero only in the leading
    /// `[a/2, b/2, c/2]` octant (3D) or leading half (1D).
    pub fn forward_padded(&self, data: &mut [Complex64]) {
        let [a, b, c] = self.shape;
        let (ha, hb) = (a.div_ceil(2), b.div_ceil(2));
        self.pass2(data, Direction::Forward, ha, hb);
        self.pass1(data, Direction::Forward, ha, c);
        self.pass0(data, Direction::Forward, b, c);
    }

    /// Inverse transform that is exact only on the leading octant; entries
    /// outside it are left in an unspecified state.
    pub fn inverse_padded(&self, data: &mut [Complex64]) {
        let [a, b, c] = self.shape;
        let (ha, hb) = (a.div_ceil(2), b.div_ceil(2));
        self.pass0(data, Direction::Inverse, b, c);
        self.pass1(data, Direction::Inverse, ha, c);
        self.pass2(data, Direction::Inverse, ha, hb);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn plan(&self, axis: usize, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.forward[axis],
            Direction::Inverse => &self.inverse[axis],
        }
    }

    /// Along the contiguous last axis, for slabs `i < ilim`, rows `j < jlim`.
    fn pass2(&self, data: &mut [Complex64], dir: Direction, ilim: usize, jlim: usize) {
        let [_, b, c] = self.shape;
        if c == 1 {
            return;
        }
        let plan = self.plan(2, dir);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for i in 0..ilim {
            let start = i * b * c;
            plan.process_with_scratch(&mut data[start..start + jlim * c], &mut scratch);
        }
    }

    /// Along the middle axis, for slabs `i < ilim` and columns `k < klim`.
    fn pass1(&self, data: &mut [Complex64], dir: Direction, ilim: usize, klim: usize) {
        let [_, b, c] = self.shape;
        if b == 1 {
            return;
        }
        let plan = self.plan(1, dir);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); b * klim];
        for i in 0..ilim {
            let slab = &mut data[i * b * c..(i + 1) * b * c];
            for j in 0..b {
                for k in 0..klim {
                    buf[k * b + j] = slab[j * c + k];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..b {
                for k in 0..klim {
                    slab[j * c + k] = buf[k * b + j];
                }
            }
        }
    }

    /// Along the outermost axis, for rows `j < jlim` and columns `k < klim`.
    fn pass0(&self, data: &mut [Complex64], dir: Direction, jlim: usize, klim: usize) {
        let [a, b, c] = self.shape;
        if a == 1 {
            return;
        }
        let plan = self.plan(0, dir);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); a * klim];
        for j in 0..jlim {
            for i in 0..a {
                let row = (i * b + j) * c;
                for k in 0..klim {
                    buf[k * a + i] = data[row + k];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..a {
                let row = (i * b + j) * c;
                for k in 0..klim {
                    data[row + k] = buf[k * a + i];
                }
            }
        }
    }
}
