use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{evolve, EvolutionParams, NseError, Scheme, WaveField};
use crate::grid::{Dim, Grid};
use crate::kernels::{BoundaryCondition, CouplingSpec};

/// `|| U(a psi1 + b psi2) - (a U psi1 + b U psi2) ||` with both sides normalized,
/// where `U` is the nonlinear flow over `params.total_time()`.
pub fn linearity_violation(
    psi1: &WaveField,
    psi2: &WaveField,
    a: Complex64,
    b: Complex64,
    coupling: &CouplingSpec,
    params: &EvolutionParams,
) -> Result<f64, NseError> {
    let joint = psi1.superpose(a, psi2, b)?;
    if joint.norm_squared() == 0.0 {
        return Err(NseError::Params("superposition vanishes".into()));
    }
    let joint = evolve(&joint.normalized(), coupling, params)?.final_state;
    let u1 = evolve(psi1, coupling, params)?.final_state;
    let separate = if b == Complex64::default() {
        u1.superpose(a, &u1, Complex64::default())?
    } else {
        let u2 = evolve(psi2, coupling, params)?.final_state;
        u1.superpose(a, &u2, b)?
    };
    if separate.norm_squared() == 0.0 {
        return Err(NseError::Params("evolved superposition vanishes".into()));
    }
    Ok(joint.l2_distance(&separate.normalized()))
}

/// Two displaced Gaussian lumps in an isolated 3D box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLumpScenario {
    pub points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub g_newton: f64,
    pub sigma: f64,
    /// Lumps sit at `x = +-separation / 2`.
    pub separation: f64,
    pub width: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Default for TwoLumpScenario {
    fn default() -> Self {
        Self {
            points: 32,
            spacing: 0.5,
            mass: 1.0,
            g_newton: 1.0,
            sigma: 0.0,
            separation: 4.0,
            width: 1.0,
            dt: 0.05,
            steps: 40,
        }
    }
}

impl TwoLumpScenario {
    pub fn grid(&self) -> Result<Grid, NseError> {
        Ok(Grid::new(Dim::Three, self.points, self.spacing)?)
    }

    pub fn coupling(&self) -> Result<CouplingSpec, NseError> {
        Ok(CouplingSpec::gravity(self.g_newton, self.mass, self.sigma)?)
    }

    pub fn params(&self) -> EvolutionParams {
        EvolutionParams {
            dt: self.dt,
            steps: self.steps,
            scheme: Scheme::StrangSplit,
            bc: BoundaryCondition::Isolated,
            record_every: self.steps,
            snapshots: false,
        }
    }

    pub fn lumps(&self) -> Result<(WaveField, WaveField), NseError> {
        let g = self.grid()?;
        let x = 0.5 * self.separation;
        let a = WaveField::gaussian(g.clone(), self.mass, [-x, 0.0, 0.0], self.width, [0.0; 3])?;
        let b = WaveField::gaussian(g, self.mass, [x, 0.0, 0.0], self.width, [0.0; 3])?;
        Ok((a, b))
    }

    /// Violation for the equal-weight superposition at `g_newton`.
    pub fn violation(&self) -> Result<f64, NseError> {
        let (a, b) = self.lumps()?;
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        linearity_violation(&a, &b, w, w, &self.coupling()?, &self.params())
    }
}

/// Normalized `a psi1 + b psi2`.
pub fn two_lump_superposition(
    psi1: &WaveField,
    psi2: &WaveField,
    a: Complex64,
    b: Complex64,
) -> Result<WaveField, NseError> {
    Ok(psi1.superpose(a, psi2, b)?.normalized())
}
