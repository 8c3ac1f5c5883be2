//! A charged lump spreading under its own Coulomb repulsion, next to the
//! same lump spreading freely.

use nslab::grid::{Dim, Grid};
use nslab::kernels::{BoundaryCondition, CouplingSpec};
use nslab::nse::{evolve, EvolutionParams, Scheme, WaveField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(Dim::Three, 32, 0.5)?;
    let coulomb = CouplingSpec::coulomb(2.0, 1.0, 0.0)?;
    let psi0 = WaveField::gaussian(grid, 1.0, [0.0; 3], 1.0, [0.0; 3])?;
    let params = EvolutionParams {
        dt: 0.01,
        steps: 100,
        scheme: Scheme::StrangSplit,
        bc: BoundaryCondition::Isolated,
        record_every: 10,
        snapshots: false,
    };
    let with = evolve(&psi0, &coulomb, &params)?;
    let without = evolve(&psi0, &coulomb.with_strength(0.0), &params)?;
    println!("{:>6} {:>12} {:>12}", "t", "rms_free", "rms_hartree");
    for (a, b) in with.observables.iter().zip(&without.observables) {
        println!("{:>6.2} {:>12.8} {:>12.8}", a.time, b.rms_width, a.rms_width);
    }
    Ok(())
}
