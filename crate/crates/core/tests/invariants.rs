//! Randomized invariants across the modules.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use nslab::fock::{build_basis, build_hamiltonian, evolve_exact, FockVector, HamiltonianOptions, Lattice};
use nslab::grid::{Dim, Grid};
use nslab::kernels::{delta_m, f_sigma, BoundaryCondition, CouplingSpec, InteractionKind, PoissonSolver};
use nslab::meanfield::{hermitian_eigenvalues, one_body_rdm, product_embed, spearman, trace_distance, LogLogFit};
use nslab::output::{fmt_float, CsvTable};
use nslab::sce::{aligned_distance, density_overlap};
use nslab::scenario::{ScenarioConfig, ScenarioKind};

fn orbital(max_sites: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..=max_sites)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn kind() -> impl Strategy<Value = InteractionKind> {
    prop_oneof![Just(InteractionKind::GravityAttractive), Just(InteractionKind::CoulombRepulsive)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_bounded_and_decreasing(r in 1e-6..50.0f64, dr in 1e-6..5.0f64, sigma in 1e-3..5.0f64) {
        let f = f_sigma(r, sigma);
        prop_assert!(f > 0.0);
        prop_assert!(f <= 1.0 / r);
        prop_assert!(f <= f_sigma(0.0, sigma) * (1.0 + 1e-15));
        prop_assert!(f_sigma(r + dr, sigma) <= f);
    }

    #[test]
    fn counterterm_is_the_signed_origin_value(k in kind(), s in 0.0..10.0f64, sigma in 1e-3..5.0f64, m in 0.1..3.0f64) {
        let c = CouplingSpec::new(k, s, sigma, m).unwrap();
        let dm = delta_m(&c).unwrap();
        prop_assert!((dm - k.sign() * s / (sigma * PI.sqrt())).abs() <= 1e-14 * dm.abs().max(1e-300));
        prop_assert!((dm - c.pair_energy(0.0)).abs() <= 4.0 * f64::EPSILON * dm.abs());
    }

    #[test]
    fn product_state_is_normalized_with_rank_one_rdm(chi in orbital(4), n in 1usize..=4) {
        let lattice = Lattice::new(Dim::One, chi.len(), 1.0).unwrap();
        let basis = build_basis(&lattice, n).unwrap();
        let v = product_embed(&chi, &basis).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let rho = one_body_rdm(&v).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(trace_distance(&rho, &chi).unwrap() < 1e-7);
        let eig = hermitian_eigenvalues(&rho);
        let top = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((top - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rdm_of_any_state_is_a_density_matrix(seed in prop::collection::vec(-1.0..1.0f64, 20), n in 1usize..=3) {
        let lattice = Lattice::new(Dim::One, 3, 1.0).unwrap();
        let basis = build_basis(&lattice, n).unwrap();
        let amps: Vec<Complex64> = (0..basis.dimension()).map(|i| Complex64::new(seed[2 * i % 20], seed[(2 * i + 1) % 20])).collect();
        prop_assume!(amps.iter().any(|z| z.norm() > 1e-3));
        let v = FockVector::new(basis, amps).unwrap().normalized();
        let rho = one_body_rdm(&v).unwrap();
        prop_assert!((&rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-14));
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        for e in hermitian_eigenvalues(&rho) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
        }
    }

    #[test]
    fn basis_lookup_inverts_enumeration(m in 1usize..=6, n in 0usize..=4) {
        let lattice = Lattice::new(Dim::One, m, 1.0).unwrap();
        let basis = build_basis(&lattice, n).unwrap();
        for (i, occ) in basis.states().enumerate() {
            prop_assert_eq!(occ.iter().map(|&k| k as usize).sum::<usize>(), n);
            prop_assert_eq!(basis.index_of(occ), Some(i));
        }
    }

    #[test]
    fn field_evolution_is_unitary(
        k in kind(), s in 0.0..5.0f64, sigma in 2.0..4.0f64, t in 0.0..10.0f64, seed in prop::collection::vec(-1.0..1.0f64, 20)
    ) {
        let lattice = Lattice::new(Dim::One, 4, 1.0).unwrap();
        let basis = build_basis(&lattice, 2).unwrap();
        let h = build_hamiltonian(&basis, &CouplingSpec::new(k, s, sigma, 1.0).unwrap(), HamiltonianOptions::default()).unwrap();
        prop_assert!(h.hermiticity_defect() < 1e-14);
        let amps: Vec<Complex64> = (0..basis.dimension()).map(|i| Complex64::new(seed[i], seed[i + 10])).collect();
        prop_assume!(amps.iter().any(|z| z.norm() > 1e-3));
        let v = FockVector::new(basis, amps).unwrap().normalized();
        let u = evolve_exact(&h, &v, t).unwrap();
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
        prop_assert!((h.expectation(&u) - h.expectation(&v)).abs() < 1e-10 * (1.0 + h.expectation(&v).abs()));
    }

    #[test]
    fn poisson_solution_is_linear_in_the_source(a in -3.0..3.0f64, g in 0.1..3.0f64, seed in prop::collection::vec(0.0..1.0f64, 8)) {
        let grid = Grid::new(Dim::Three, 8, 1.0).unwrap();
        let solver = PoissonSolver::new(&grid, BoundaryCondition::Isolated).unwrap();
        let rho1: Vec<f64> = (0..grid.len()).map(|i| seed[i % 8] * ((i * 7) % 5) as f64).collect();
        let rho2: Vec<f64> = (0..grid.len()).map(|i| seed[(i + 3) % 8]).collect();
        let joint: Vec<f64> = rho1.iter().zip(&rho2).map(|(x, y)| a * x + y).collect();
        let (v1, v2, vj) = (solver.solve(&rho1, g).unwrap(), solver.solve(&rho2, g).unwrap(), solver.solve(&joint, g).unwrap());
        let scale = vj.iter().chain(&v1).map(|x| x.abs()).fold(1.0, f64::max);
        for i in 0..grid.len() {
            prop_assert!((vj[i] - (a * v1[i] + v2[i])).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn misstep_measures_ignore_global_phase(chi in orbital(8), phase in 0.0..(2.0 * PI), scale in 0.1..10.0f64) {
        let rotated: Vec<Complex64> = chi.iter().map(|z| z * Complex64::from_polar(scale, phase)).collect();
        prop_assert!(aligned_distance(&chi, &rotated) < 1e-7);
        prop_assert!((density_overlap(&chi, &rotated) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floats_survive_the_csv_format(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        let mut t = CsvTable::new(["x"]);
        t.push_floats(&[x]);
        prop_assert_eq!(CsvTable::parse(&t.to_csv()).unwrap().column("x").unwrap()[0].to_bits(), x.to_bits());
    }

    #[test]
    fn rank_correlation_is_odd_and_fit_is_exact(
        ys in prop::collection::vec(0.01..100.0f64, 3..8), slope in -3.0..3.0f64, c in 0.1..10.0f64
    ) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 + 1.0).collect();
        let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
        let rho = spearman(&xs, &ys);
        prop_assume!(rho.is_finite());
        prop_assert!((rho + spearman(&xs, &neg)).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&rho));
        let power: Vec<f64> = xs.iter().map(|x| c * x.powf(slope)).collect();
        let fit = LogLogFit::fit(&xs, &power).unwrap();
        prop_assert!((fit.exponent - slope).abs() < 1e-9);
    }

    #[test]
    fn canonical_config_round_trips(steps in 1usize..500, dt in 1e-4..0.1f64, g in 0.0..10.0f64, seed in 0..=i64::MAX as u64) {
        let mut c = ScenarioConfig::default_for(ScenarioKind::NseEvolve);
        c.seed = seed;
        let p = c.nse_evolve.as_mut().unwrap();
        p.steps = steps;
        p.record_every = 1.max(steps / 3);
        p.dt = dt;
        p.g_newton = g;
        let back = ScenarioConfig::parse(&c.to_toml()).unwrap();
        prop_assert_eq!(back.content_hash(), c.content_hash());
        prop_assert_eq!(back, c);
    }

    #[test]
    fn seeds_beyond_toml_integers_are_rejected(seed in (i64::MAX as u64 + 1)..=u64::MAX) {
        let mut c = ScenarioConfig::default_for(ScenarioKind::FockSectors);
        c.seed = seed;
        prop_assert!(c.validate().unwrap_err().message.contains("seed"));
    }
}
