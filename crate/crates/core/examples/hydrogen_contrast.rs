//! Hydrogen from the linear two-body equation against the variant in which
//! the electron also repels its own charge cloud.

use nslab::kernels::CouplingSpec;
use nslab::nse::{radial_ground_state, RadialProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = RadialProblem::hydrogen(1.0, 1.0);
    let linear = radial_ground_state(&problem)?;
    let mut wrong = problem.clone();
    wrong.self_interaction = Some(CouplingSpec::coulomb(1.0, 1.0, 0.0)?);
    let wrong = radial_ground_state(&wrong)?;
    let exact = problem.coulomb_energy();
    println!("-mu alpha^2 / 2     = {exact:.12}");
    println!(
        "linear equation     = {:.12}  (relative error {:.2e})",
        linear.energy,
        ((linear.energy - exact) / exact).abs()
    );
    println!(
        "with self-repulsion = {:.12}  (deviation {:.1}%, {} iterations)",
        wrong.energy,
        100.0 * ((wrong.energy - exact) / exact).abs(),
        wrong.iterations
    );
    Ok(())
}
