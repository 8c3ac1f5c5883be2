//! Physical properties of the Newton-Schrodinger solvers on small grids.

use nslab::grid::{Dim, Grid};
use nslab::kernels::{BoundaryCondition, CouplingSpec};
use nslab::nse::{evolve, ground_state, EvolutionParams, GroundState, GroundStateParams, Scheme, WaveField};

fn params(dt: f64, steps: usize, record_every: usize) -> EvolutionParams {
    EvolutionParams {
        dt,
        steps,
        scheme: Scheme::StrangSplit,
        bc: BoundaryCondition::Isolated,
        record_every,
        snapshots: false,
    }
}

#[test]
fn self_gravitating_lump_moves_at_its_group_velocity() {
    let grid = Grid::new(Dim::Three, 32, 0.5).unwrap();
    let (mass, p) = (1.5, 0.6);
    let coupling = CouplingSpec::gravity(2.0, mass, 0.0).unwrap();
    let psi = WaveField::gaussian(grid, mass, [-1.0, 0.0, 0.0], 1.0, [p, 0.0, 0.0]).unwrap();
    let traj = evolve(&psi, &coupling, &params(0.01, 100, 20)).unwrap();
    for o in &traj.observables {
        let expected = -1.0 + p / mass * o.time;
        assert!((o.center_of_mass[0] - expected).abs() < 1e-6, "t = {}: {} vs {expected}", o.time, o.center_of_mass[0]);
        assert!(o.center_of_mass[1].abs() < 1e-10 && o.center_of_mass[2].abs() < 1e-10);
    }
}

#[test]
fn boost_leaves_the_width_unchanged() {
    let grid = Grid::new(Dim::Three, 32, 0.5).unwrap();
    let coupling = CouplingSpec::gravity(2.0, 1.0, 0.0).unwrap();
    let rest = WaveField::gaussian(grid.clone(), 1.0, [0.0; 3], 1.0, [0.0; 3]).unwrap();
    let moving = WaveField::gaussian(grid, 1.0, [0.0; 3], 1.0, [0.0, 0.0, 0.4]).unwrap();
    let a = evolve(&rest, &coupling, &params(0.01, 100, 25)).unwrap();
    let b = evolve(&moving, &coupling, &params(0.01, 100, 25)).unwrap();
    for (x, y) in a.observables.iter().zip(&b.observables) {
        assert!((x.rms_width - y.rms_width).abs() < 1e-5, "{} vs {}", x.rms_width, y.rms_width);
    }
}

#[test]
fn attraction_slows_spreading_and_repulsion_speeds_it() {
    let grid = Grid::new(Dim::Three, 32, 0.5).unwrap();
    let psi = WaveField::gaussian(grid, 1.0, [0.0; 3], 1.0, [0.0; 3]).unwrap();
    let width =
        |c: CouplingSpec| evolve(&psi, &c, &params(0.02, 50, 50)).unwrap().observables.last().unwrap().rms_width;
    let free = width(CouplingSpec::gravity(0.0, 1.0, 0.0).unwrap());
    let attractive = width(CouplingSpec::gravity(2.0, 1.0, 0.0).unwrap());
    let repulsive = width(CouplingSpec::coulomb(2.0, 1.0, 0.0).unwrap());
    assert!(attractive < free && free < repulsive, "{attractive} {free} {repulsive}");
}

fn ground(mass: f64, g: f64) -> GroundState {
    let grid = Grid::new(Dim::Three, 16, 0.5).unwrap();
    let psi0 = WaveField::gaussian(grid, mass, [0.0; 3], 1.0, [0.0; 3]).unwrap();
    let coupling = CouplingSpec::gravity(g, mass, 0.0).unwrap();
    ground_state(&psi0, &coupling, &GroundStateParams { itol: 1e-8, ..Default::default() }).unwrap()
}

#[test]
fn ground_state_scales_with_mass() {
    // m -> lambda m with G -> G / lambda^3 multiplies the stationary equation
    // by 1 / lambda: same field, energies divided by lambda.
    let lambda = 2.0;
    let a = ground(1.0, 8.0);
    let b = ground(lambda, 8.0 / lambda.powi(3));
    assert!(a.psi.density_distance(&b.psi) < 1e-6, "{}", a.psi.density_distance(&b.psi));
    assert!((a.chemical_potential / lambda - b.chemical_potential).abs() < 1e-6 * a.chemical_potential.abs());
    assert!((a.energy / lambda - b.energy).abs() < 1e-6 * a.energy.abs());
}

#[test]
fn ground_state_energy_is_below_the_trial_lump() {
    let gs = ground(1.0, 8.0);
    let history = &gs.energy_history;
    assert!(history.last().unwrap() < history.first().unwrap());
    assert!(gs.energy < 0.0 && gs.chemical_potential < gs.energy);
}
