//! Self-gravitating ground state on an isolated 3D grid, then a check that
//! it stays put under real-time evolution.
//!
//! Usage: `cargo run --release --example nse_ground_state -- [points] [spacing] [G]`

use std::time::Instant;

use nslab::grid::{Dim, Grid};
use nslab::kernels::{BoundaryCondition, CouplingSpec};
use nslab::nse::{ground_state, GroundStateParams, Propagator, WaveField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let points: usize = args.first().map_or(Ok(32), |s| s.parse())?;
    let spacing: f64 = args.get(1).map_or(Ok(0.5), |s| s.parse())?;
    let g_newton: f64 = args.get(2).map_or(Ok(1.0), |s| s.parse())?;

    let grid = Grid::new(Dim::Three, points, spacing)?;
    let coupling = CouplingSpec::gravity(g_newton, 1.0, 0.0)?;
    let psi0 = WaveField::gaussian(grid.clone(), 1.0, [0.0; 3], 2.0, [0.0; 3])?;

    let start = Instant::now();
    let gs = ground_state(&psi0, &coupling, &GroundStateParams::default())?;
    println!(
        "ground state: E = {:.12}  mu = {:.12}  residual = {:.2e}  iterations = {}  ({:.1} s)",
        gs.energy,
        gs.chemical_potential,
        gs.residual,
        gs.iterations,
        start.elapsed().as_secs_f64()
    );

    let dt = 0.002;
    let mut prop = Propagator::new(&grid, &coupling, dt, BoundaryCondition::Isolated)?;
    let mut psi = gs.psi.clone();
    let start = Instant::now();
    for _ in 0..100 {
        prop.step(&mut psi)?;
    }
    println!(
        "100 steps at dt = {dt}: density drift = {:.3e}, norm drift = {:.3e}  ({:.2} s/step)",
        psi.density_distance(&gs.psi),
        (psi.norm_squared() - 1.0).abs(),
        start.elapsed().as_secs_f64() / 100.0
    );
    Ok(())
}
