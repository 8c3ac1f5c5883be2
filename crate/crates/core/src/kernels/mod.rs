//! Interaction kernels: Gaussian smearing, the regularized pair potential
//! `F_sigma(r) = erf(r / 2 sigma) / r`, self-energy counterterms, and the
//! Poisson solver for Newtonian potentials.

mod poisson;
mod smearing;

pub use poisson::{BoundaryCondition, PoissonSolver, CELL_AVERAGE_INVERSE_DISTANCE};
pub use smearing::{gaussian_smearing, gaussian_value, SmearingKernel};

use std::f64::consts::PI;

use libm::erf;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("smearing width must be positive and finite, got {0}")]
    Sigma(f64),
    #[error("coupling strength must be finite and non-negative, got {0}")]
    Strength(f64),
    #[error("mass must be positive and finite, got {0}")]
    Mass(f64),
    #[error("the self-energy counterterm diverges at sigma = 0")]
    DivergentCounterterm,
    #[error("{0:?} couples distinct particles and has no self-energy")]
    NoSelfEnergy(InteractionKind),
    #[error("density contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("isolated boundaries need the 3D free-space kernel; 1D runs must use periodic-zero-mean")]
    IsolatedNeeds3d,
    #[error("density has {got} samples, grid has {want}")]
    Shape { got: usize, want: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which physical pair interaction a coupling describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    /// Newtonian attraction between identical particles, `-G m^2 / r`.
    GravityAttractive,
    /// Coulomb repulsion between like charges, `+e^2 / (4 pi r)`.
    CoulombRepulsive,
    /// Attraction to a distinct, oppositely charged particle (the proton).
    CoulombExternalAttractive,
}

impl InteractionKind {
    /// Sign of the pair energy.
    pub fn sign(self) -> f64 {
        match self {
            InteractionKind::GravityAttractive | InteractionKind::CoulombExternalAttractive => -1.0,
            InteractionKind::CoulombRepulsive => 1.0,
        }
    }
}

/// An interaction kind with its `1/r` coefficient, smearing width and the
/// particle mass.
///
/// `strength` is always the magnitude (`G m^2` for gravity, `e^2 / 4 pi` for
/// Coulomb); the sign comes from `kind`. A zero strength switches the
/// interaction off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub kind: InteractionKind,
    pub strength: f64,
    pub sigma: f64,
    pub mass: f64,
}

impl CouplingSpec {
    pub fn new(kind: InteractionKind, strength: f64, sigma: f64, mass: f64) -> Result<Self, KernelError> {
        let spec = Self { kind, strength, sigma, mass };
        spec.validate()?;
        Ok(spec)
    }

    /// Newtonian gravity between particles of mass `mass`; strength `G m^2`.
    pub fn gravity(g_newton: f64, mass: f64, sigma: f64) -> Result<Self, KernelError> {
        Self::new(InteractionKind::GravityAttractive, g_newton * mass * mass, sigma, mass)
    }

    /// Coulomb repulsion with coefficient `e^2 / 4 pi`.
    pub fn coulomb(e2_over_4pi: f64, mass: f64, sigma: f64) -> Result<Self, KernelError> {
        Self::new(InteractionKind::CoulombRepulsive, e2_over_4pi, sigma, mass)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(KernelError::Strength(self.strength));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(KernelError::Sigma(self.sigma));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(KernelError::Mass(self.mass));
        }
        Ok(())
    }

    /// Pair-energy coefficient including its sign.
    pub fn signed_strength(&self) -> f64 {
        self.kind.sign() * self.strength
    }

    pub fn with_strength(self, strength: f64) -> Self {
        Self { strength, ..self }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }

    /// Signed regularized pair energy at separation `r`.
    pub fn pair_energy(&self, r: f64) -> f64 {
        self.signed_strength() * f_sigma(r, self.sigma)
    }
}

const SERIES_CUTOFF: f64 = 1e-3;

/// Regularized Newton kernel `erf(r / 2 sigma) / r`.
///
/// Finite at the origin, where it equals `1 / (sigma sqrt(pi))`. `sigma = 0`
/// gives the bare `1/r`.
pub fn f_sigma(r: f64, sigma: f64) -> f64 {
    debug_assert!(r >= 0.0 && sigma >= 0.0);
    if sigma == 0.0 {
        return 1.0 / r;
    }
    if r < SERIES_CUTOFF * sigma {
        // erf(x)/x = 2/sqrt(pi) (1 - x^2/3 + x^4/10 - x^6/42 + x^8/216 - ...)
        let x2 = (r / (2.0 * sigma)).powi(2);
        let series = 1.0 - x2 / 3.0 * (1.0 - 3.0 * x2 / 10.0 * (1.0 - 5.0 * x2 / 21.0 * (1.0 - 7.0 * x2 / 36.0)));
        return series / (sigma * PI.sqrt());
    }
    erf(r / (2.0 * sigma)) / r
}

/// Self-energy counterterm absorbed into the renormalized mass.
///
/// Gravity gives `-G m^2 / (sigma sqrt(pi))`, Coulomb repulsion
/// `e^2 / (4 pi^{3/2} sigma)`; both are `sign * strength * F_sigma(0)`.
pub fn delta_m(coupling: &CouplingSpec) -> Result<f64, KernelError> {
    if coupling.kind == InteractionKind::CoulombExternalAttractive {
        return Err(KernelError::NoSelfEnergy(coupling.kind));
    }
    if coupling.sigma == 0.0 {
        return Err(KernelError::DivergentCounterterm);
    }
    Ok(coupling.signed_strength() / (coupling.sigma * PI.sqrt()))
}

/// Renormalized mass `m + delta_m`.
pub fn renormalized_mass(coupling: &CouplingSpec) -> Result<f64, KernelError> {
    Ok(coupling.mass + delta_m(coupling)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erf(x) / r by composite Simpson quadrature of 2/sqrt(pi) exp(-t^2).
    fn f_sigma_quadrature(r: f64, sigma: f64) -> f64 {
        let x = r / (2.0 * sigma);
        let n = 20_000;
        let h = x / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * (-t * t).exp();
        }
        2.0 / PI.sqrt() * acc * h / 3.0 / r
    }

    #[test]
    fn f_sigma_small_sigma_saturates() {
        let v = f_sigma(1.0, 0.01);
        assert!((1.0 - 1e-12..=1.0).contains(&v), "{v}");
    }

    #[test]
    fn f_sigma_origin_value() {
        for sigma in [0.1, 1.0, 3.7] {
            let want = 1.0 / (sigma * PI.sqrt());
            assert!((f_sigma(0.0, sigma) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn f_sigma_matches_quadrature_across_series_cutoff() {
        let sigma = 0.8;
        for r in [1e-6, 5e-4, 7.9e-4, 8.1e-4, 1e-3, 0.01, 0.3, 1.0, 2.5, 10.0] {
            let got = f_sigma(r, sigma);
            let want = f_sigma_quadrature(r, sigma);
            assert!((got - want).abs() < 1e-11 * want, "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn f_sigma_is_bounded_by_coulomb_and_monotone() {
        let sigma = 1.0;
        let mut prev = f_sigma(0.0, sigma);
        for i in 1..=10_000 {
            let r = 100.0 * i as f64 / 10_000.0;
            let v = f_sigma(r, sigma);
            assert!(v > 0.0 && v <= 1.0 / r, "r={r}");
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((f_sigma(100.0, sigma) * 100.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_m_signs_and_scaling() {
        let g = CouplingSpec::gravity(0.5, 2.0, 0.4).unwrap();
        let c = CouplingSpec::coulomb(0.3, 1.0, 0.4).unwrap();
        let dg = delta_m(&g).unwrap();
        let dc = delta_m(&c).unwrap();
        assert!(dg < 0.0 && dc > 0.0);
        assert!((dg + 0.5 * 4.0 / (0.4 * PI.sqrt())).abs() < 1e-14);
        // e^2/(4 pi^{3/2} sigma) with e^2 = 4 pi * 0.3
        let e2 = 4.0 * PI * 0.3;
        assert!((dc - e2 / (4.0 * PI.powf(1.5) * 0.4)).abs() < 1e-14);
        let half = delta_m(&g.with_sigma(0.2)).unwrap();
        assert!((half / dg - 2.0).abs() < 1e-14);
    }

    #[test]
    fn delta_m_errors() {
        let g = CouplingSpec::gravity(1.0, 1.0, 0.0).unwrap();
        assert_eq!(delta_m(&g), Err(KernelError::DivergentCounterterm));
        let ext = CouplingSpec::new(InteractionKind::CoulombExternalAttractive, 1.0, 0.1, 1.0).unwrap();
        assert!(matches!(delta_m(&ext), Err(KernelError::NoSelfEnergy(_))));
    }

    /// The counterterm is the doubly smeared self-energy
    /// `sign * strength * int d^3r (s * s)(r) / r`; check it by radial quadrature.
    #[test]
    fn delta_m_equals_smeared_self_energy_quadrature() {
        let sigma = 0.7;
        let coupling = CouplingSpec::gravity(1.3, 0.9, sigma).unwrap();
        // s * s is a Gaussian of width sigma * sqrt(2).
        let w2 = 2.0 * sigma * sigma;
        let norm = (2.0 * PI * w2).powf(-1.5);
        let n = 200_000;
        let rmax = 20.0 * sigma;
        let h = rmax / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                4.0 * PI * r * norm * (-r * r / (2.0 * w2)).exp() * h
            })
            .sum();
        let want = -coupling.strength * integral;
        let got = delta_m(&coupling).unwrap();
        assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn coupling_validation() {
        assert!(CouplingSpec::gravity(1.0, -1.0, 0.1).is_err());
        assert!(CouplingSpec::coulomb(-1.0, 1.0, 0.1).is_err());
        assert!(CouplingSpec::coulomb(1.0, 1.0, f64::NAN).is_err());
        let g = CouplingSpec::gravity(2.0, 3.0, 0.1).unwrap();
        assert_eq!(g.strength, 18.0);
        assert_eq!(g.signed_strength(), -18.0);
    }
}
