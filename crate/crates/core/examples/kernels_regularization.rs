//! The regularized pair kernel, its self-energy constant, and the isolated
//! Poisson solver on a point source.

use nslab::grid::{Dim, Grid};
use nslab::kernels::{delta_m, f_sigma, BoundaryCondition, CouplingSpec, PoissonSolver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigmas = [1.0, 0.1, 0.01];
    println!("{:>8} {:>12} {}", "r", "1/r", sigmas.map(|s| format!("{:>14}", format!("F(sigma={s})"))).join(""));
    for r in [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let cols: String = sigmas.iter().map(|&s| format!("{:>14.8}", f_sigma(r, s))).collect();
        println!("{r:>8} {:>12.6} {cols}", 1.0 / r);
    }
    for s in sigmas {
        let c = CouplingSpec::gravity(1.0, 1.0, s)?;
        println!("delta_m(gravity, sigma = {s}) = {:.10}", delta_m(&c)?);
    }

    let grid = Grid::new(Dim::Three, 32, 1.0)?;
    let solver = PoissonSolver::new(&grid, BoundaryCondition::Isolated)?;
    let c = 16;
    let mut rho = vec![0.0; grid.len()];
    rho[grid.flat_index([c, c, c])] = 1.0;
    let v = solver.solve(&rho, 1.0)?;
    println!("\npoint source, G = 1:");
    for k in [1, 2, 4, 8] {
        println!("  R = {k:>2}: V = {:+.12}  (-G/R = {:+.12})", v[grid.flat_index([c + k, c, c])], -1.0 / k as f64);
    }
    Ok(())
}
