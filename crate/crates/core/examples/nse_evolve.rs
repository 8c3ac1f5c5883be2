//! A Gaussian lump collapsing and breathing under its own gravity.
//!
//! Usage: `cargo run --release --example nse_evolve -- [points] [spacing] [G] [dt] [steps] [width]`

use std::time::Instant;

use nslab::grid::{Dim, Grid};
use nslab::kernels::{BoundaryCondition, CouplingSpec};
use nslab::nse::{default_dt, evolve, EvolutionParams, Scheme, WaveField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| -> Result<f64, std::num::ParseFloatError> {
        args.get(i).map_or(Ok(default), |s| s.parse())
    };
    let points = arg(0, 32.0)? as usize;
    let spacing = arg(1, 0.5)?;
    let g_newton = arg(2, 3.0)?;
    let dt = arg(3, default_dt(1.0, spacing))?;
    let steps = arg(4, 200.0)? as usize;
    let width = arg(5, 1.0)?;

    let grid = Grid::new(Dim::Three, points, spacing)?;
    let coupling = CouplingSpec::gravity(g_newton, 1.0, 0.0)?;
    let psi0 = WaveField::gaussian(grid, 1.0, [0.0; 3], width, [0.0; 3])?;
    let params = EvolutionParams {
        dt,
        steps,
        scheme: Scheme::StrangSplit,
        bc: BoundaryCondition::Isolated,
        record_every: (steps / 10).max(1),
        snapshots: false,
    };
    let start = Instant::now();
    let traj = evolve(&psi0, &coupling, &params)?;
    println!("{:>10} {:>12} {:>20} {:>12} {:>12}", "t", "norm", "energy", "rms_width", "peak");
    for o in &traj.observables {
        println!(
            "{:>10.4} {:>12.9} {:>20.14} {:>12.6} {:>12.6}",
            o.time, o.norm, o.energy, o.rms_width, o.peak_density
        );
    }
    println!(
        "dt = {dt}, relative energy drift = {:.3e}  ({:.3} s/step)",
        traj.energy_drift,
        start.elapsed().as_secs_f64() / steps as f64
    );
    Ok(())
}
