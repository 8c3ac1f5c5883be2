use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normalized, one_body_rdm, product_embed, trace_distance, MeanFieldError};
use crate::fock::{
    build_basis, build_hamiltonian, evolve_exact, HamiltonianOptions, SpectralPropagator, DENSE_THRESHOLD,
};
use crate::grid::Dim;
use crate::kernels::{delta_m, CouplingSpec, InteractionKind};
use crate::lattice::{Lattice, Stencil};
use crate::nse::{LatticeNse, PairKernel};
use crate::output::CsvTable;

/// Exact `N`-body dynamics against the Hartree orbital at fixed total
/// interaction: the per-pair strength is `g_total / (N - 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceParams {
    /// Sites of the periodic 1D lattice.
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub kind: InteractionKind,
    pub g_total: f64,
    pub sigma: f64,
    pub n_values: Vec<usize>,
    pub t: f64,
    pub dt: f64,
    /// Rows recorded per `N`, evenly spaced in time and including `t`.
    pub samples: usize,
    pub stencil: Stencil,
    /// Width (in spacings) of the initial Gaussian lump on site 0.
    pub lump_width: f64,
    /// Phase gradient of the initial lump, radians per site.
    pub lump_phase: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            sites: 4,
            spacing: 1.0,
            mass: 1.0,
            kind: InteractionKind::GravityAttractive,
            g_total: 50.0,
            sigma: 2.0,
            n_values: vec![2, 3, 4, 5, 6],
            t: 3.0,
            dt: 1e-3,
            samples: 10,
            stencil: Stencil::FourthOrder,
            lump_width: 0.7,
            lump_phase: 0.5,
        }
    }
}

impl ConvergenceParams {
    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let bad = |msg: &str| Err(MeanFieldError::Params(msg.into()));
        if self.sites < 2 {
            return bad("sites must be at least 2");
        }
        if !(self.spacing > 0.0 && self.mass > 0.0 && self.sigma > 0.0) {
            return bad("spacing, mass and sigma must be positive");
        }
        if !(self.g_total.is_finite() && self.g_total >= 0.0) {
            return bad("g_total must be finite and non-negative");
        }
        if self.kind == InteractionKind::CoulombExternalAttractive {
            return bad("the experiment needs a pair interaction, not an external field");
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return bad("n_values must be non-empty with every N >= 2");
        }
        if !(self.t.is_finite() && self.t >= 0.0 && self.dt > 0.0) {
            return bad("t must be non-negative and dt positive");
        }
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if !(self.lump_width > 0.0 && self.lump_phase.is_finite()) {
            return bad("lump_width must be positive");
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice, MeanFieldError> {
        Ok(Lattice::new(Dim::One, self.sites, self.spacing).map_err(crate::fock::FockError::from)?)
    }

    /// Normalized Gaussian lump on site 0 with a linear phase.
    pub fn initial_orbital(&self) -> Vec<Complex64> {
        let m = self.sites as isize;
        let raw: Vec<Complex64> = (0..m)
            .map(|a| {
                let d = if a > m / 2 { a - m } else { a } as f64;
                Complex64::from_polar((-0.5 * (d / self.lump_width).powi(2)).exp(), self.lump_phase * d)
            })
            .collect();
        normalized(&raw).expect("a Gaussian lump is never zero")
    }

    /// Per-pair coupling for `n` particles.
    pub fn pair_coupling(&self, n: usize) -> Result<CouplingSpec, MeanFieldError> {
        let c = CouplingSpec::new(self.kind, self.g_total / (n - 1) as f64, self.sigma, self.mass)
            .map_err(crate::nse::NseError::from)?;
        Ok(c)
    }

    fn steps(&self) -> usize {
        (self.t / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t: f64,
    pub trace_distance: f64,
    pub fidelity: f64,
    pub energy_exact: f64,
    pub energy_hartree: f64,
}

/// `ln d = exponent * ln N + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub exponent: f64,
    pub intercept: f64,
}

impl LogLogFit {
    /// Least squares on `(ln x, ln y)`; `None` with fewer than two points or
    /// a non-positive value.
    pub fn fit(x: &[f64], y: &[f64]) -> Option<Self> {
        if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
            return None;
        }
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let exponent = sxy / sxx;
        Some(Self { exponent, intercept: my - exponent * mx })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.intercept + self.exponent * x.ln()).exp()
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; `NaN` when either
/// series is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "series lengths differ");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Trace distance at the final time, one entry per `N` in request order.
    pub final_distances: Vec<(usize, f64)>,
    pub fit: Option<LogLogFit>,
    pub spearman: f64,
    /// Per-`N` wall time; kept out of the CSV so that it stays reproducible.
    pub wall_ms: Vec<(usize, f64)>,
}

impl ConvergenceReport {
    pub const COLUMNS: [&'static str; 6] = ["N", "t", "trace_distance", "fidelity", "energy_exact", "energy_hartree"];

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(Self::COLUMNS);
        for r in &self.rows {
            let mut row = vec![r.n.to_string()];
            row.extend(
                [r.t, r.trace_distance, r.fidelity, r.energy_exact, r.energy_hartree].map(crate::output::fmt_float),
            );
            table.push(row);
        }
        table
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "fit_exponent": self.fit.map(|f| f.exponent),
            "fit_intercept": self.fit.map(|f| f.intercept),
            "spearman": self.spearman,
            "final_distances": self.final_distances,
            "wall_ms": self.wall_ms,
        })
    }
}

fn run_one(
    params: &ConvergenceParams,
    lattice: &Lattice,
    chi0: &[Complex64],
    n: usize,
) -> Result<Vec<ConvergenceRow>, MeanFieldError> {
    let coupling = params.pair_coupling(n)?;
    let basis = build_basis(lattice, n)?;
    let options = HamiltonianOptions { stencil: params.stencil, ..Default::default() };
    let h = build_hamiltonian(&basis, &coupling, options)?;
    let psi0 = product_embed(chi0, &basis)?;
    let dense = (h.dimension() < DENSE_THRESHOLD).then(|| SpectralPropagator::new(&h));

    let steps = params.steps();
    let dt = if steps == 0 { 0.0 } else { params.t / steps as f64 };
    let kernel = PairKernel::regularized(lattice, &coupling, (n - 1) as f64)?;
    let mut nse = LatticeNse::new(lattice, params.mass, params.stencil, &kernel, dt.max(f64::MIN_POSITIVE))?;
    let self_energy = n as f64 * delta_m(&coupling).map_err(crate::nse::NseError::from)?;
    let stride = (steps / params.samples).max(1);

    let mut chi = chi0.to_vec();
    let mut rows = Vec::new();
    for step in 0..=steps {
        if step > 0 {
            nse.step(&mut chi)?;
        }
        if step % stride != 0 && step != steps {
            continue;
        }
        let t = step as f64 * dt;
        let exact = match &dense {
            Some(p) => crate::fock::FockVector::new(basis.clone(), p.propagate(psi0.amplitudes(), t))?,
            None => evolve_exact(&h, &psi0, t)?,
        };
        let rho = one_body_rdm(&exact)?;
        let product = product_embed(&chi, &basis)?;
        rows.push(ConvergenceRow {
            n,
            t,
            trace_distance: trace_distance(&rho, &chi)?,
            fidelity: exact.inner(&product).norm_sqr(),
            energy_exact: h.expectation(&exact),
            energy_hartree: n as f64 * nse.energy(&chi)? + self_energy,
        });
    }
    Ok(rows)
}

/// Runs every `N` as an independent job and assembles the report in request
/// order.
pub fn convergence_experiment(params: &ConvergenceParams) -> Result<ConvergenceReport, MeanFieldError> {
    params.validate()?;
    let lattice = params.lattice()?;
    let chi0 = params.initial_orbital();
    let results: Vec<(Vec<ConvergenceRow>, f64)> = params
        .n_values
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let rows = run_one(params, &lattice, &chi0, n)?;
            Ok((rows, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_, MeanFieldError>>()?;

    let mut rows = Vec::new();
    let mut final_distances = Vec::new();
    let mut wall_ms = Vec::new();
    for (&n, (r, ms)) in params.n_values.iter().zip(results) {
        final_distances.push((n, r.last().map_or(0.0, |x| x.trace_distance)));
        wall_ms.push((n, ms));
        rows.extend(r);
    }
    let ns: Vec<f64> = final_distances.iter().map(|&(n, _)| n as f64).collect();
    let ds: Vec<f64> = final_distances.iter().map(|&(_, d)| d).collect();
    Ok(ConvergenceReport {
        rows,
        fit: LogLogFit::fit(&ns, &ds),
        spearman: spearman(&ns, &ds),
        final_distances,
        wall_ms,
    })
}
