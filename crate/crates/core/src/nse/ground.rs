use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NseError, WaveField};
use crate::grid::FftNd;
use crate::kernels::{BoundaryCondition, CouplingSpec, InteractionKind, PoissonSolver};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    /// Tolerance on both the relative energy change and the residual.
    pub itol: f64,
    pub max_iter: usize,
    /// Step `tau = tau_factor / max(|mu|, |V_min|, (2 pi / L)^2 / 2m)`; below 1 for stability.
    pub tau_factor: f64,
    pub bc: BoundaryCondition,
}

impl Default for GroundStateParams {
    fn default() -> Self {
        Self { itol: 1e-10, max_iter: 20_000, tau_factor: 0.5, bc: BoundaryCondition::Isolated }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub psi: WaveField,
    /// `E = <T> + <V>/2`.
    pub energy: f64,
    /// `mu = <T> + <V>`, the eigenvalue of the stationary equation.
    pub chemical_potential: f64,
    /// `||H psi - mu psi|| / ||psi||`.
    pub residual: f64,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
}

/// Lowest stationary state of the Newton-Schrodinger equation at the norm of `psi0`.
///
/// Normalized gradient flow preconditioned by the kinetic operator,
/// `psi <- (1 + tau T)^-1 (1 + tau (mu - V[psi])) psi`, renormalized after
/// each update. Its fixed points solve `H[psi] psi = mu psi`.
pub fn ground_state(
    psi0: &WaveField,
    coupling: &CouplingSpec,
    params: &GroundStateParams,
) -> Result<GroundState, NseError> {
    coupling.validate()?;
    if coupling.kind != InteractionKind::GravityAttractive {
        return Err(NseError::WrongKind {
            operation: "ground_state",
            expected: InteractionKind::GravityAttractive,
            got: coupling.kind,
        });
    }
    if !(params.itol > 0.0 && params.tau_factor > 0.0 && params.tau_factor < 1.0) {
        return Err(NseError::Params("itol must be positive and tau_factor in (0, 1)".into()));
    }
    let target = psi0.norm_squared();
    if !(target > 0.0) {
        return Err(NseError::Params("initial field is zero".into()));
    }
    if psi0.mass() != coupling.mass {
        return Err(NseError::Params("field mass differs from coupling mass".into()));
    }

    let grid = psi0.grid().clone();
    let n = grid.len();
    let dv = grid.cell_volume();
    let mass = coupling.mass;
    let fft = FftNd::new(&grid.shape());
    let kinetic: Vec<f64> = grid.k_squared().into_iter().map(|k2| k2 / (2.0 * mass)).collect();
    let k_low = (2.0 * std::f64::consts::PI / grid.length()).powi(2) / (2.0 * mass);
    let source = coupling.strength;
    let poisson = if source != 0.0 { Some(PoissonSolver::new(&grid, params.bc)?) } else { None };

    let mut psi = psi0.clone();
    let mut density = vec![0.0; n];
    let mut potential = vec![0.0; n];
    let mut scratch = Vec::new();
    let mut work = vec![Complex64::default(); n];
    let mut h_psi = vec![Complex64::default(); n];
    let mut history = Vec::new();
    let mut previous: Option<f64> = None;
    let mut last = (f64::INFINITY, f64::INFINITY);

    for iteration in 0..=params.max_iter {
        if let Some(solver) = &poisson {
            for (d, z) in density.iter_mut().zip(psi.amplitude()) {
                *d = z.norm_sqr();
            }
            solver.solve_into(&density, source, &mut potential, &mut scratch)?;
        }
        work.copy_from_slice(psi.amplitude());
        fft.forward(&mut work);
        let t_expect = work.iter().zip(&kinetic).map(|(z, t)| z.norm_sqr() * t).sum::<f64>() * dv / n as f64;
        work.iter_mut().zip(&kinetic).for_each(|(z, t)| *z *= t);
        fft.inverse(&mut work);
        let amp = psi.amplitude();
        let mut v_expect = 0.0;
        for i in 0..n {
            h_psi[i] = work[i] + amp[i] * potential[i];
            v_expect += amp[i].norm_sqr() * potential[i];
        }
        let v_expect = v_expect * dv;
        let norm2 = target;
        let mu = (t_expect + v_expect) / norm2;
        let energy = t_expect + 0.5 * v_expect;
        let residual = (h_psi.iter().zip(amp).map(|(h, z)| (h - z * mu).norm_sqr()).sum::<f64>() * dv / norm2).sqrt();
        history.push(energy);
        if !energy.is_finite() {
            return Err(NseError::NonFinite { step: iteration });
        }
        let scale = energy.abs().max(k_low);
        let change = previous.map_or(f64::INFINITY, |p| (energy - p).abs() / scale);
        last = (residual, change);
        if iteration % 500 == 0 {
            log::debug!(
                "ground state iteration {iteration}: E = {energy:.15e}, mu = {mu:.15e}, residual = {residual:.3e}"
            );
        }
        if change <= params.itol && residual <= params.itol {
            return Ok(GroundState {
                psi,
                energy,
                chemical_potential: mu,
                residual,
                iterations: iteration,
                energy_history: history,
            });
        }
        if iteration == params.max_iter {
            break;
        }
        previous = Some(energy);

        let v_min = potential.iter().cloned().fold(0.0, f64::min);
        let tau = params.tau_factor / mu.abs().max(v_min.abs()).max(k_low);
        let amp = psi.amplitude_mut();
        for i in 0..n {
            work[i] = amp[i] * (1.0 + tau * (mu - potential[i]));
        }
        fft.forward(&mut work);
        work.iter_mut().zip(&kinetic).for_each(|(z, t)| *z /= 1.0 + tau * t);
        fft.inverse(&mut work);
        amp.copy_from_slice(&work);
        psi.normalize_to(target);
    }
    Err(NseError::NotConverged { iterations: params.max_iter, residual: last.0, energy_change: last.1 })
}
