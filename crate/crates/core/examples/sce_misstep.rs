//! A lump whose potential is re-sourced from its own density against the
//! same lump under the linear one-particle field Hamiltonian.

use nslab::grid::Dim;
use nslab::kernels::CouplingSpec;
use nslab::lattice::Lattice;
use nslab::sce::{misstep_compare, MisstepParams};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lattice = Lattice::new(Dim::One, 24, 1.0)?;
    let coupling = CouplingSpec::gravity(4.0, 1.0, 2.0)?;
    let orbital: Vec<Complex64> =
        (0..24).map(|a| Complex64::new((-0.5 * ((a as f64 - 8.0) / 1.2).powi(2)).exp(), 0.0)).collect();
    let params = MisstepParams { dt: 0.01, steps: 500, record_every: 50, ..Default::default() };
    let report = misstep_compare(&lattice, &orbital, &coupling, &params)?;
    println!("{:>6} {:>14} {:>16}", "t", "l2_distance", "density_overlap");
    for r in &report.records {
        println!("{:>6.2} {:>14.6e} {:>16.12}", r.t, r.l2_distance, r.density_overlap);
    }
    println!("distance first exceeds 0.01 at t = {:?}", report.first_exceeding(0.01));
    Ok(())
}
