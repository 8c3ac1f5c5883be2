use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NseError, Observables, WaveField};
use crate::grid::{FftNd, Grid};
use crate::kernels::{BoundaryCondition, CouplingSpec, InteractionKind, PoissonSolver};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Half kick, spectral drift, half kick.
    #[default]
    StrangSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub scheme: Scheme,
    pub bc: BoundaryCondition,
    pub record_every: usize,
    /// Keep a copy of the field at every recorded step.
    #[serde(default)]
    pub snapshots: bool,
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<(), NseError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(NseError::Params(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(NseError::Params("steps must be positive".into()));
        }
        if self.record_every == 0 || self.record_every > self.steps {
            return Err(NseError::Params(format!(
                "record_every must lie in 1..={}, got {}",
                self.steps, self.record_every
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Largest step of the default stability rule, `dt = 0.5 m h^2`.
pub fn default_dt(mass: f64, spacing: f64) -> f64 {
    0.5 * mass * spacing * spacing
}

/// Strang split-step propagator for a fixed grid, coupling and step size.
///
/// The self-consistent potential is cached between steps: the closing half
/// kick of one step and the opening half kick of the next see the same
/// density, so each step costs one Poisson solve.
#[derive(Debug)]
pub struct Propagator {
    grid: Grid,
    mass: f64,
    /// `g` in `V = -g int rho / |r - r'|`.
    source: f64,
    dt: f64,
    fft: FftNd,
    poisson: Option<PoissonSolver>,
    drift: Vec<Complex64>,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
    potential_valid: bool,
    density: Vec<f64>,
    scratch: Vec<Complex64>,
    steps_taken: usize,
}

impl Propagator {
    pub fn new(grid: &Grid, coupling: &CouplingSpec, dt: f64, bc: BoundaryCondition) -> Result<Self, NseError> {
        coupling.validate()?;
        if coupling.kind == InteractionKind::CoulombExternalAttractive {
            return Err(NseError::Params("a self-consistent field cannot use an external coupling".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(NseError::Params(format!("dt must be positive, got {dt}")));
        }
        let mass = coupling.mass;
        let kinetic: Vec<f64> = grid.k_squared().into_iter().map(|k2| k2 / (2.0 * mass)).collect();
        let drift = kinetic.iter().map(|&t| Complex64::from_polar(1.0, -t * dt)).collect();
        let source = -coupling.signed_strength();
        let poisson = if source != 0.0 { Some(PoissonSolver::new(grid, bc)?) } else { None };
        Ok(Self {
            grid: grid.clone(),
            mass,
            source,
            dt,
            fft: FftNd::new(&grid.shape()),
            poisson,
            drift,
            kinetic,
            potential: vec![0.0; grid.len()],
            potential_valid: false,
            density: vec![0.0; grid.len()],
            scratch: Vec::new(),
            steps_taken: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    fn check(&self, psi: &WaveField) -> Result<(), NseError> {
        if psi.grid() != &self.grid {
            return Err(NseError::Shape { got: psi.grid().len(), want: self.grid.len() });
        }
        if psi.mass() != self.mass {
            return Err(NseError::Params(format!(
                "field mass {} differs from coupling mass {}",
                psi.mass(),
                self.mass
            )));
        }
        Ok(())
    }

    fn refresh_potential(&mut self, psi: &WaveField) -> Result<(), NseError> {
        match &self.poisson {
            Some(solver) => {
                for (d, z) in self.density.iter_mut().zip(psi.amplitude()) {
                    *d = z.norm_sqr();
                }
                solver.solve_into(&self.density, self.source, &mut self.potential, &mut self.scratch)?;
            }
            None => self.potential.iter_mut().for_each(|v| *v = 0.0),
        }
        self.potential_valid = true;
        Ok(())
    }

    /// The potential `V[psi]` of the field as of the last step.
    pub fn potential(&mut self, psi: &WaveField) -> Result<&[f64], NseError> {
        self.check(psi)?;
        if !self.potential_valid {
            self.refresh_potential(psi)?;
        }
        Ok(&self.potential)
    }

    /// Forget the cached potential (needed if the field was modified outside
    /// [`step`](Self::step)).
    pub fn invalidate(&mut self) {
        self.potential_valid = false;
    }

    fn kick(&self, psi: &mut WaveField) {
        let h = 0.5 * self.dt;
        for (z, &v) in psi.amplitude_mut().iter_mut().zip(&self.potential) {
            *z *= Complex64::from_polar(1.0, -v * h);
        }
    }

    /// One Strang step in place.
    pub fn step(&mut self, psi: &mut WaveField) -> Result<(), NseError> {
        self.check(psi)?;
        if !self.potential_valid {
            self.refresh_potential(psi)?;
        }
        self.kick(psi);
        let amp = psi.amplitude_mut();
        self.fft.forward(amp);
        for (z, d) in amp.iter_mut().zip(&self.drift) {
            *z *= d;
        }
        self.fft.inverse(amp);
        self.steps_taken += 1;
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            self.potential_valid = false;
            return Err(NseError::NonFinite { step: self.steps_taken });
        }
        self.refresh_potential(psi)?;
        self.kick(psi);
        Ok(())
    }

    /// `<T>` by Parseval.
    pub fn kinetic_energy(&mut self, psi: &WaveField) -> f64 {
        self.scratch.clear();
        self.scratch.extend_from_slice(psi.amplitude());
        self.fft.forward(&mut self.scratch);
        let n = self.grid.len() as f64;
        self.scratch.iter().zip(&self.kinetic).map(|(z, t)| z.norm_sqr() * t).sum::<f64>() * self.grid.cell_volume() / n
    }

    /// `E = <T> + <V>/2`.
    pub fn energy(&mut self, psi: &WaveField) -> Result<f64, NseError> {
        self.check(psi)?;
        let kinetic = self.kinetic_energy(psi);
        if !self.potential_valid {
            self.refresh_potential(psi)?;
        }
        let dv = self.grid.cell_volume();
        let interaction: f64 =
            psi.amplitude().iter().zip(&self.potential).map(|(z, v)| z.norm_sqr() * v).sum::<f64>() * dv;
        Ok(kinetic + 0.5 * interaction)
    }
}

fn require_kind(operation: &'static str, coupling: &CouplingSpec, expected: InteractionKind) -> Result<(), NseError> {
    if coupling.kind != expected {
        return Err(NseError::WrongKind { operation, expected, got: coupling.kind });
    }
    Ok(())
}

/// One Strang step of the Newton-Schrodinger equation.
pub fn nse_step(
    psi: &WaveField,
    coupling: &CouplingSpec,
    dt: f64,
    bc: BoundaryCondition,
) -> Result<WaveField, NseError> {
    require_kind("nse_step", coupling, InteractionKind::GravityAttractive)?;
    let mut out = psi.clone();
    Propagator::new(psi.grid(), coupling, dt, bc)?.step(&mut out)?;
    Ok(out)
}

/// One Strang step of the repulsive Hartree equation.
pub fn hartree_step(
    chi: &WaveField,
    coupling: &CouplingSpec,
    dt: f64,
    bc: BoundaryCondition,
) -> Result<WaveField, NseError> {
    require_kind("hartree_step", coupling, InteractionKind::CoulombRepulsive)?;
    let mut out = chi.clone();
    Propagator::new(chi.grid(), coupling, dt, bc)?.step(&mut out)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub observables: Vec<Observables>,
    /// `(time, field)` at each recorded step when requested.
    pub snapshots: Vec<(f64, WaveField)>,
    pub final_state: WaveField,
    /// `max |E(t) - E(0)| / |E(0)|` over recorded steps (absolute when `E(0) = 0`).
    pub energy_drift: f64,
}

/// Runs `params.steps` Strang steps, recording observables at step 0 and
/// every `record_every` steps after it.
pub fn evolve(psi0: &WaveField, coupling: &CouplingSpec, params: &EvolutionParams) -> Result<Trajectory, NseError> {
    params.validate()?;
    let mut prop = Propagator::new(psi0.grid(), coupling, params.dt, params.bc)?;
    let mut psi = psi0.clone();
    let mut observables = Vec::with_capacity(params.steps / params.record_every + 2);
    let mut snapshots = Vec::new();
    let e0 = prop.energy(&psi)?;
    observables.push(Observables::measure(&psi, 0.0, e0));
    if params.snapshots {
        snapshots.push((0.0, psi.clone()));
    }
    let mut drift = 0.0f64;
    for n in 1..=params.steps {
        prop.step(&mut psi)?;
        if n % params.record_every == 0 || n == params.steps {
            let t = n as f64 * params.dt;
            let e = prop.energy(&psi)?;
            let d = if e0 != 0.0 { ((e - e0) / e0).abs() } else { (e - e0).abs() };
            drift = drift.max(d);
            observables.push(Observables::measure(&psi, t, e));
            if params.snapshots {
                snapshots.push((t, psi.clone()));
            }
        }
    }
    Ok(Trajectory { observables, snapshots, final_state: psi, energy_drift: drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dim;

    fn free(mass: f64) -> CouplingSpec {
        CouplingSpec::gravity(0.0, mass, 0.0).unwrap()
    }

    #[test]
    fn free_gaussian_spreads_as_predicted() {
        let g = Grid::new(Dim::One, 512, 0.1).unwrap();
        let (m, w0) = (1.3, 0.8);
        let psi = WaveField::gaussian(g, m, [0.0; 3], w0, [0.0; 3]).unwrap();
        let params = EvolutionParams {
            dt: 0.01,
            steps: 200,
            scheme: Scheme::StrangSplit,
            bc: BoundaryCondition::PeriodicZeroMean,
            record_every: 50,
            snapshots: false,
        };
        let traj = evolve(&psi, &free(m), &params).unwrap();
        for obs in &traj.observables {
            let want = w0 * (1.0 + (obs.time / (2.0 * m * w0 * w0)).powi(2)).sqrt();
            assert!((obs.rms_width - want).abs() < 1e-10, "t={} {} vs {}", obs.time, obs.rms_width, want);
        }
        assert!(traj.energy_drift < 1e-12);
    }

    #[test]
    fn wrong_kinds_are_rejected() {
        let g = Grid::new(Dim::One, 16, 0.5).unwrap();
        let psi = WaveField::gaussian(g, 1.0, [0.0; 3], 1.0, [0.0; 3]).unwrap();
        let coulomb = CouplingSpec::coulomb(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            nse_step(&psi, &coulomb, 0.1, BoundaryCondition::PeriodicZeroMean),
            Err(NseError::WrongKind { .. })
        ));
        let gravity = CouplingSpec::gravity(1.0, 1.0, 0.0).unwrap();
        assert!(hartree_step(&psi, &gravity, 0.1, BoundaryCondition::PeriodicZeroMean).is_err());
    }

    #[test]
    fn step_preserves_norm_in_three_dimensions() {
        let g = Grid::new(Dim::Three, 16, 0.5).unwrap();
        let psi = WaveField::gaussian(g, 1.0, [0.0; 3], 1.0, [0.3, 0.0, -0.2]).unwrap();
        let c = CouplingSpec::gravity(2.0, 1.0, 0.0).unwrap();
        let mut prop = Propagator::new(psi.grid(), &c, 0.05, BoundaryCondition::Isolated).unwrap();
        let mut cur = psi.clone();
        for _ in 0..5 {
            let before = cur.norm_squared();
            prop.step(&mut cur).unwrap();
            assert!((cur.norm_squared() - before).abs() < 1e-13);
        }
    }

    #[test]
    fn non_finite_field_names_the_step() {
        let g = Grid::new(Dim::One, 16, 0.5).unwrap();
        let mut psi = WaveField::gaussian(g, 1.0, [0.0; 3], 1.0, [0.0; 3]).unwrap();
        psi.amplitude_mut()[3] = Complex64::new(f64::NAN, 0.0);
        let mut prop = Propagator::new(psi.grid(), &free(1.0), 0.1, BoundaryCondition::PeriodicZeroMean).unwrap();
        assert_eq!(prop.step(&mut psi).unwrap_err(), NseError::NonFinite { step: 1 });
    }

    #[test]
    fn params_are_validated() {
        let mut p = EvolutionParams {
            dt: 0.1,
            steps: 10,
            scheme: Scheme::StrangSplit,
            bc: BoundaryCondition::Isolated,
            record_every: 11,
            snapshots: false,
        };
        assert!(p.validate().is_err());
        p.record_every = 5;
        assert!(p.validate().is_ok());
        assert!((p.total_time() - 1.0).abs() < 1e-15);
        assert_eq!(default_dt(2.0, 0.5), 0.25);
    }
}
