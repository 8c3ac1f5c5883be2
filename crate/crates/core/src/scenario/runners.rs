use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::*;
use super::{Assertion, PlotSpec, RunError, ScenarioOutput, Table};
use crate::fock::{
    build_basis, build_hamiltonian, linearity_check, one_particle_matrix, two_particle_matrix, FockVector,
    HamiltonianOptions,
};
use crate::grid::{Dim, Grid};
use crate::kernels::{delta_m, f_sigma, BoundaryCondition, CouplingSpec, InteractionKind, PoissonSolver};
use crate::lattice::Lattice;
use crate::meanfield::{convergence_experiment, ConvergenceReport, LogLogFit};
use crate::nse::{
    evolve, ground_state, radial_ground_state, EvolutionParams, GroundStateParams, LatticeNse, NseError, PairKernel,
    Propagator, RadialProblem, Scheme, WaveField,
};
use crate::output::{fmt_float, CsvTable};
use crate::sce::{misstep_compare, semiclassical_trajectory, MisstepParams, SceMode};

fn observables_table(traj: &crate::nse::Trajectory) -> CsvTable {
    let mut t = CsvTable::new(["t", "norm", "energy", "rms_width", "peak_density", "com_x", "com_y", "com_z"]);
    for o in &traj.observables {
        let c = o.center_of_mass;
        t.push_floats(&[o.time, o.norm, o.energy, o.rms_width, o.peak_density, c[0], c[1], c[2]]);
    }
    t
}

/// Density along the first axis through the grid centre.
fn axis_slice(psi: &WaveField) -> Vec<(f64, f64)> {
    let g = psi.grid();
    let c = g.points() / 2;
    (0..g.points())
        .map(|i| {
            let idx = match g.dim() {
                Dim::One => [i, 0, 0],
                Dim::Three => [i, c, c],
            };
            (g.coordinate(i), psi.amplitude()[g.flat_index(idx)].norm_sqr())
        })
        .collect()
}

pub(super) fn nse_evolve(p: &NseEvolveParams) -> Result<ScenarioOutput, RunError> {
    let grid = Grid::new(Dim::Three, p.points, p.spacing)?;
    let coupling = CouplingSpec::gravity(p.g_newton, p.mass, 0.0)?;
    let psi0 = WaveField::gaussian(grid, p.mass, [0.0; 3], p.width, p.momentum)?;
    let params = EvolutionParams {
        dt: p.dt,
        steps: p.steps,
        scheme: Scheme::StrangSplit,
        bc: p.boundary,
        record_every: p.record_every,
        snapshots: false,
    };
    let traj = evolve(&psi0, &coupling, &params)?;
    let norm_drift = traj.observables.iter().map(|o| (o.norm - 1.0).abs()).fold(0.0, f64::max);

    let mut slice = CsvTable::new(["x", "initial", "final"]);
    for ((x, a), (_, b)) in axis_slice(&psi0).into_iter().zip(axis_slice(&traj.final_state)) {
        slice.push_floats(&[x, a, b]);
    }
    Ok(ScenarioOutput {
        tables: vec![
            Table::new("observables.csv", observables_table(&traj)).plot(PlotSpec::lines(
                "rms width and peak density",
                "t",
                &["rms_width", "peak_density"],
            )),
            Table::new("density_slice.csv", slice).plot(PlotSpec::lines("density along x", "x", &["initial", "final"])),
        ],
        assertions: vec![
            Assertion::below("norm_conserved", norm_drift, 1e-10),
            Assertion::below("energy_drift", traj.energy_drift, 1e-4),
        ],
        summary: json!({ "energy_drift": traj.energy_drift, "max_norm_drift": norm_drift }),
    })
}

pub(super) fn nse_ground(p: &NseGroundParams) -> Result<ScenarioOutput, RunError> {
    let grid = Grid::new(Dim::Three, p.points, p.spacing)?;
    let coupling = CouplingSpec::gravity(p.g_newton, p.mass, 0.0)?;
    let psi0 = WaveField::gaussian(grid.clone(), p.mass, [0.0; 3], p.width, [0.0; 3])?;
    let params = GroundStateParams { itol: p.itol, max_iter: p.max_iter, ..Default::default() };
    let gs = match ground_state(&psi0, &coupling, &params) {
        Ok(gs) => gs,
        Err(NseError::NotConverged { iterations, residual, energy_change }) => {
            return Ok(ScenarioOutput {
                tables: Vec::new(),
                assertions: vec![Assertion::failed(
                    "converged",
                    format!("{iterations} iterations, residual {residual:e}, energy change {energy_change:e}"),
                )],
                summary: json!({}),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut prop = Propagator::new(&grid, &coupling, p.check_dt, BoundaryCondition::Isolated)?;
    let mut psi = gs.psi.clone();
    for _ in 0..p.check_steps {
        prop.step(&mut psi)?;
    }
    let drift = psi.density_distance(&gs.psi);
    let virial = gs.energy / gs.chemical_potential;

    let mut history = CsvTable::new(["iteration", "energy"]);
    for (i, e) in gs.energy_history.iter().enumerate() {
        history.push(vec![i.to_string(), fmt_float(*e)]);
    }
    let mut profile = CsvTable::new(["x", "ground_state", "evolved"]);
    for ((x, a), (_, b)) in axis_slice(&gs.psi).into_iter().zip(axis_slice(&psi)) {
        profile.push_floats(&[x, a, b]);
    }
    Ok(ScenarioOutput {
        tables: vec![
            Table::new("energy_history.csv", history).plot(PlotSpec::lines(
                "energy during the flow",
                "iteration",
                &["energy"],
            )),
            Table::new("profile.csv", profile).plot(PlotSpec::lines(
                "ground-state density along x",
                "x",
                &["ground_state", "evolved"],
            )),
        ],
        assertions: vec![
            Assertion::below("converged", gs.residual, p.itol),
            Assertion::below("virial_ratio", (virial - 1.0 / 3.0).abs(), p.virial_tolerance),
            Assertion::below("stationary", drift, 1e-6),
        ],
        summary: json!({
            "energy": gs.energy,
            "chemical_potential": gs.chemical_potential,
            "residual": gs.residual,
            "iterations": gs.iterations,
            "virial_ratio": virial,
            "stationarity_drift": drift,
        }),
    })
}

pub(super) fn hartree_coulomb(p: &HartreeCoulombParams) -> Result<ScenarioOutput, RunError> {
    let grid = Grid::new(Dim::Three, p.points, p.spacing)?;
    let coulomb = CouplingSpec::coulomb(p.e2_over_4pi, p.mass, 0.0)?;
    let free = coulomb.with_strength(0.0);
    let psi0 = WaveField::gaussian(grid, p.mass, [0.0; 3], p.width, [0.0; 3])?;
    let params = EvolutionParams {
        dt: p.dt,
        steps: p.steps,
        scheme: Scheme::StrangSplit,
        bc: BoundaryCondition::Isolated,
        record_every: p.record_every,
        snapshots: false,
    };
    let with = evolve(&psi0, &coulomb, &params)?;
    let without = evolve(&psi0, &free, &params)?;
    let mut table = CsvTable::new(["t", "rms_free", "rms_hartree", "energy_hartree"]);
    let mut wider = true;
    let mut monotone = true;
    let mut prev = 0.0;
    for (a, b) in with.observables.iter().zip(&without.observables) {
        table.push_floats(&[a.time, b.rms_width, a.rms_width, a.energy]);
        if a.time > 0.0 && a.rms_width <= b.rms_width {
            wider = false;
        }
        if a.rms_width < prev {
            monotone = false;
        }
        prev = a.rms_width;
    }
    Ok(ScenarioOutput {
        tables: vec![Table::new("widths.csv", table).plot(PlotSpec::lines(
            "rms width",
            "t",
            &["rms_free", "rms_hartree"],
        ))],
        assertions: vec![
            Assertion::check("repulsion_spreads_faster", wider, "Hartree rms width exceeds the free width for t > 0"),
            Assertion::check("rms_monotone", monotone, "Hartree rms width never decreases"),
            Assertion::below("energy_drift", with.energy_drift, 1e-4),
        ],
        summary: json!({ "energy_drift": with.energy_drift }),
    })
}

fn dense_table(m: &nalgebra::DMatrix<f64>) -> CsvTable {
    let mut t = CsvTable::new((0..m.ncols()).map(|j| format!("c{j}")));
    for i in 0..m.nrows() {
        t.push_floats(&m.row(i).iter().cloned().collect::<Vec<_>>());
    }
    t
}

fn random_state(basis: &std::sync::Arc<crate::fock::FockBasis>, rng: &mut ChaCha8Rng) -> Result<FockVector, RunError> {
    let amps =
        (0..basis.dimension()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Ok(FockVector::new(basis.clone(), amps)?.normalized())
}

pub(super) fn fock_sectors(p: &FockSectorsParams, seed: u64) -> Result<ScenarioOutput, RunError> {
    let lattice = Lattice::new(p.dim, p.sites_per_axis, p.spacing)?;
    let coupling = CouplingSpec::new(p.kind, p.strength, p.sigma, p.mass)?;
    let dm = delta_m(&coupling)?;
    let interaction_only = HamiltonianOptions { include_kinetic: false, stencil: p.stencil, ..Default::default() };
    let full = HamiltonianOptions { stencil: p.stencil, ..Default::default() };
    let mut tables = Vec::new();
    let mut assertions = Vec::new();
    let mut hermitian = 0.0_f64;

    for n in 1..=p.max_particles {
        let basis = build_basis(&lattice, n)?;
        let h = build_hamiltonian(&basis, &coupling, full)?;
        let v = build_hamiltonian(&basis, &coupling, interaction_only)?;
        hermitian = hermitian.max(h.hermiticity_defect());
        tables.push(Table::new(format!("hamiltonian_n{n}.csv"), dense_table(&h.to_dense())));
        tables.push(Table::new(format!("interaction_n{n}.csv"), dense_table(&v.to_dense())));
        let dense = v.to_dense();
        match n {
            1 => {
                let dense = one_particle_matrix(&v)?;
                let off = (0..dense.nrows())
                    .flat_map(|i| (0..dense.ncols()).map(move |j| (i, j)))
                    .filter(|(i, j)| i != j)
                    .map(|(i, j)| dense[(i, j)].abs())
                    .fold(0.0, f64::max);
                let diag = (0..dense.nrows()).map(|i| ((dense[(i, i)] - dm) / dm).abs()).fold(0.0, f64::max);
                assertions.push(Assertion::check(
                    "n1_interaction_is_delta_m_identity",
                    off == 0.0 && diag <= 1e-12,
                    format!("max off-diagonal {off:e}, max relative diagonal error {diag:e}"),
                ));
            }
            2 => {
                let _ = two_particle_matrix(&h)?;
                let s = coupling.signed_strength();
                let mut worst = 0.0_f64;
                for (i, occ) in basis.states().enumerate() {
                    let sites: Vec<usize> =
                        (0..occ.len()).flat_map(|a| std::iter::repeat_n(a, occ[a] as usize)).collect();
                    let pair = s * f_sigma(lattice.distance(sites[0], sites[1]), p.sigma);
                    let got = dense[(i, i)] - 2.0 * dm;
                    worst = worst.max(((got - pair) / pair).abs());
                }
                assertions.push(Assertion::below("n2_pair_elements", worst, 1e-12));
            }
            _ => {}
        }
    }
    assertions.push(Assertion::below("hermitian", hermitian, 1e-12));

    let basis = build_basis(&lattice, 2)?;
    let h = build_hamiltonian(&basis, &coupling, full)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lin = CsvTable::new(["trial", "a_re", "a_im", "b_re", "b_im", "defect"]);
    let mut worst = 0.0_f64;
    for trial in 0..p.superpositions {
        let v1 = random_state(&basis, &mut rng)?;
        let v2 = random_state(&basis, &mut rng)?;
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let d = linearity_check(&h, &v1, &v2, a, b, p.t)?;
        worst = worst.max(d);
        let mut row = vec![trial.to_string()];
        row.extend([a.re, a.im, b.re, b.im, d].map(fmt_float));
        lin.push(row);
    }
    tables.push(Table::new("linearity.csv", lin).plot(PlotSpec::lines("linearity defect", "trial", &["defect"])));
    assertions.push(Assertion::below("linearity", worst, 1e-10));
    Ok(ScenarioOutput { tables, assertions, summary: json!({ "delta_m": dm, "max_linearity_defect": worst }) })
}

pub(super) fn meanfield_converge(p: &crate::meanfield::ConvergenceParams) -> Result<ScenarioOutput, RunError> {
    let report: ConvergenceReport = convergence_experiment(p)?;
    let initial = report.rows.iter().filter(|r| r.t == 0.0).map(|r| r.trace_distance).fold(0.0, f64::max);
    let mut by_n = CsvTable::new(["N", "trace_distance", "fitted"]);
    for &(n, d) in &report.final_distances {
        let fitted = report.fit.map_or(f64::NAN, |f: LogLogFit| f.eval(n as f64));
        by_n.push(vec![n.to_string(), fmt_float(d), fmt_float(fitted)]);
    }
    let exponent = report.fit.map_or(f64::NAN, |f| f.exponent);
    let mut summary = report.summary_json();
    // Wall times go to the index only through the report's own field.
    summary.as_object_mut().expect("summary is an object").remove("wall_ms");
    Ok(ScenarioOutput {
        tables: vec![
            Table::new("convergence.csv", report.to_csv())
                .plot(PlotSpec::lines("trace distance against time", "t", &["trace_distance"]).grouped("N")),
            Table::new("distance_vs_n.csv", by_n)
                .plot(PlotSpec::lines("final trace distance against N", "N", &["trace_distance", "fitted"]).log_log()),
        ],
        assertions: vec![
            Assertion::below("initial_distance_zero", initial, 1e-12),
            Assertion::below("spearman_negative", report.spearman, 0.0),
            Assertion::below("fitted_exponent_negative", exponent, 0.0),
        ],
        summary,
    })
}

pub(super) fn sce_misstep(p: &SceMisstepParams) -> Result<ScenarioOutput, RunError> {
    let lattice = Lattice::new(Dim::One, p.sites, p.spacing)?;
    let coupling = CouplingSpec::gravity(p.g_newton, p.mass, p.sigma)?;
    let orbital: Vec<Complex64> = (0..p.sites)
        .map(|a| {
            let x = a as f64 * p.spacing - p.centre;
            Complex64::from_polar((-0.5 * (x / p.width).powi(2)).exp(), p.momentum * x)
        })
        .collect();
    let params = MisstepParams {
        dt: p.dt,
        steps: p.steps,
        record_every: p.record_every,
        frozen_source: p.frozen_source,
        ..Default::default()
    };
    let report = misstep_compare(&lattice, &orbital, &coupling, &params)?;

    let mut assertions = vec![Assertion::above("exceeds_threshold", report.max_distance(), p.threshold)];
    if !p.frozen_source {
        let kernel = PairKernel::smeared_newton(&lattice, &coupling)?;
        let mut nse = LatticeNse::new(&lattice, p.mass, params.stencil, &kernel, p.dt)?;
        let reference = nse.trajectory(&report.mean_field[0], p.steps)?;
        let cross = report
            .mean_field
            .iter()
            .zip(&reference)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assertions.push(Assertion::below("matches_lattice_nse", cross, 1e-10));
    }
    let free =
        semiclassical_trajectory(&lattice, &orbital, &coupling.with_strength(0.0), SceMode::ExactField, &params)?;
    let density_gap = report
        .exact
        .iter()
        .zip(&free)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs()))
        .fold(0.0, f64::max);
    assertions.push(Assertion::below("field_density_coupling_independent", density_gap, 1e-12));

    Ok(ScenarioOutput {
        tables: vec![Table::new("misstep.csv", report.to_csv()).plot(PlotSpec::lines(
            "distance between the two evolutions",
            "t",
            &["l2_distance", "density_overlap"],
        ))],
        assertions,
        summary: json!({
            "max_distance": report.max_distance(),
            "first_exceeding": report.first_exceeding(p.threshold),
        }),
    })
}

pub(super) fn hydrogen_wrong_nse(p: &HydrogenParams) -> Result<ScenarioOutput, RunError> {
    let mut problem = RadialProblem::hydrogen(p.reduced_mass, p.alpha);
    problem.r_max = p.r_max;
    problem.n_points = p.n_points;
    let linear = radial_ground_state(&problem)?;
    let mut wrong_problem = problem.clone();
    wrong_problem.self_interaction = Some(CouplingSpec::coulomb(p.alpha, p.reduced_mass, 0.0)?);
    let wrong = radial_ground_state(&wrong_problem)?;
    let exact = problem.coulomb_energy();
    let err = ((linear.energy - exact) / exact).abs();
    let dev = ((wrong.energy - exact) / exact).abs();

    let stride = (linear.u.len() / p.output_points).max(1);
    let mut radial = CsvTable::new(["r", "u_linear", "u_wrong"]);
    for i in (0..linear.u.len()).step_by(stride) {
        radial.push_floats(&[i as f64 * linear.spacing, linear.u[i], wrong.u[i]]);
    }
    Ok(ScenarioOutput {
        tables: vec![Table::new("radial.csv", radial).plot(PlotSpec::lines(
            "radial functions",
            "r",
            &["u_linear", "u_wrong"],
        ))],
        assertions: vec![
            Assertion::below("hydrogen_energy", err, 1e-3),
            Assertion::above("wrong_nse_deviates", dev, 0.1),
        ],
        summary: json!({
            "exact_energy": exact,
            "linear_energy": linear.energy,
            "wrong_nse_energy": wrong.energy,
            "wrong_nse_iterations": wrong.iterations,
        }),
    })
}

pub(super) fn kernel_verify(p: &KernelVerifyParams) -> Result<ScenarioOutput, RunError> {
    let mut columns = vec!["r".to_string(), "inverse_r".to_string()];
    columns.extend((0..p.sigmas.len()).map(|i| format!("f_sigma{i}")));
    let mut table = CsvTable::new(columns.clone());
    let ratio = (p.r_max / p.r_min).powf(1.0 / (p.samples - 1) as f64);
    let mut bounded = true;
    for i in 0..p.samples {
        let r = p.r_min * ratio.powi(i as i32);
        let mut row = vec![r, 1.0 / r];
        for &s in &p.sigmas {
            let f = f_sigma(r, s);
            bounded &= f <= 1.0 / r;
            row.push(f);
        }
        table.push_floats(&row);
    }
    let sigma_min = p.sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    // Far outside the smearing, erf has saturated and the kernel is 1/r.
    let limit = (0..p.samples)
        .map(|i| p.r_min * ratio.powi(i as i32))
        .filter(|&r| r >= 12.0 * sigma_min)
        .map(|r| (f_sigma(r, sigma_min) * r - 1.0).abs())
        .fold(0.0, f64::max);
    let origin =
        p.sigmas.iter().map(|&s| (f_sigma(0.0, s) * s * std::f64::consts::PI.sqrt() - 1.0).abs()).fold(0.0, f64::max);

    let grid = Grid::new(Dim::Three, p.poisson_points, p.poisson_spacing)?;
    let solver = PoissonSolver::new(&grid, BoundaryCondition::Isolated)?;
    let c = p.poisson_points / 2;
    let centre = grid.flat_index([c, c, c]);
    let mut rho = vec![0.0; grid.len()];
    rho[centre] = 1.0 / grid.cell_volume();
    let v = solver.solve(&rho, p.g_newton)?;
    let mut poisson = CsvTable::new(["R", "numeric", "exact", "relative_error"]);
    let mut worst = 0.0_f64;
    let h = p.poisson_spacing;
    let quarter = grid.length() / 4.0;
    for k in 1..c {
        let r = k as f64 * h;
        let numeric = v[grid.flat_index([c + k, c, c])];
        let exact = -p.g_newton / r;
        let rel = ((numeric - exact) / exact).abs();
        poisson.push_floats(&[r, numeric, exact, rel]);
        if r >= 4.0 * h && r <= quarter {
            worst = worst.max(rel);
        }
    }
    let f_plot: Vec<&str> = columns.iter().skip(1).map(String::as_str).collect();
    Ok(ScenarioOutput {
        tables: vec![
            Table::new("f_sigma.csv", table).plot(PlotSpec::lines("regularized kernel", "r", &f_plot).log_log()),
            Table::new("poisson.csv", poisson).plot(PlotSpec::lines(
                "point-source potential",
                "R",
                &["numeric", "exact"],
            )),
        ],
        assertions: vec![
            Assertion::below("sigma_to_zero_limit", limit, 1e-12),
            Assertion::below("origin_value", origin, 1e-10),
            Assertion::check("bounded_by_inverse_r", bounded, "F_sigma(r) <= 1/r on every sample"),
            Assertion::below("poisson_point_source", worst, 0.01),
        ],
        summary: json!({
            "sigmas": p.sigmas,
            "delta_m_gravity": p.sigmas.iter().map(|&s| delta_m(&CouplingSpec {
                kind: InteractionKind::GravityAttractive, strength: p.g_newton, sigma: s, mass: 1.0,
            }).unwrap_or(f64::NAN)).collect::<Vec<_>>(),
        }),
    })
}
