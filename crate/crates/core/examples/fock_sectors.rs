//! One- and two-particle sectors of the lattice field Hamiltonian: the
//! self-interaction is a constant shift and the evolution is linear.

use nslab::fock::{
    build_basis, build_hamiltonian, linearity_check, one_particle_matrix, FockVector, HamiltonianOptions, Lattice,
};
use nslab::grid::Dim;
use nslab::kernels::{delta_m, CouplingSpec};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lattice = Lattice::new(Dim::One, 4, 1.0)?;
    let coupling = CouplingSpec::gravity(1.0, 1.0, 2.0)?;
    let interaction = HamiltonianOptions { include_kinetic: false, ..Default::default() };

    let b1 = build_basis(&lattice, 1)?;
    let v1 = one_particle_matrix(&build_hamiltonian(&b1, &coupling, interaction)?)?;
    println!("N = 1 interaction block (delta_m = {:.12}):\n{v1:.12}", delta_m(&coupling)?);

    let b2 = build_basis(&lattice, 2)?;
    let h2 = build_hamiltonian(&b2, &coupling, HamiltonianOptions::default())?;
    println!("N = 2 sector: dimension {}, {} nonzeros", h2.dimension(), h2.nnz());
    for (i, occ) in b2.states().enumerate() {
        println!("  {occ:?}  diagonal {:+.12}", h2.get(i, i));
    }

    let a = FockVector::basis_state(b2.clone(), &[2, 0, 0, 0])?;
    let b = FockVector::basis_state(b2, &[0, 1, 0, 1])?;
    let defect = linearity_check(&h2, &a, &b, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), 2.0)?;
    println!("linearity defect of a superposition at t = 2: {defect:.3e}");
    Ok(())
}
