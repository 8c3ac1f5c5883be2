//! s-wave radial eigenproblems by Numerov shooting.
//!
//! Solves `-(1/2 mu) u'' + [-alpha / r + V_self[u](r)] u = E u` on
//! `[0, r_max]` with `u(0) = u(r_max) = 0`. The optional self term is the
//! Hartree potential of the particle's own normalized density, built from
//! the shell theorem and iterated to self-consistency.

use serde::{Deserialize, Serialize};

use super::NseError;
use crate::kernels::CouplingSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialProblem {
    pub reduced_mass: f64,
    /// `alpha` in the external potential `-alpha / r`.
    pub external_coulomb_strength: f64,
    /// Self-interaction of the particle's own density (sigma is not used:
    /// the shells are point-like).
    #[serde(default)]
    pub self_interaction: Option<CouplingSpec>,
    pub r_max: f64,
    pub n_points: usize,
}

impl RadialProblem {
    pub fn hydrogen(reduced_mass: f64, alpha: f64) -> Self {
        Self { reduced_mass, external_coulomb_strength: alpha, self_interaction: None, r_max: 60.0, n_points: 60_000 }
    }

    pub fn validate(&self) -> Result<(), NseError> {
        if !(self.reduced_mass.is_finite() && self.reduced_mass > 0.0) {
            return Err(NseError::Params(format!("reduced mass must be positive, got {}", self.reduced_mass)));
        }
        if !(self.external_coulomb_strength.is_finite() && self.external_coulomb_strength >= 0.0) {
            return Err(NseError::Params("external Coulomb strength must be non-negative".into()));
        }
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(NseError::Params(format!("r_max must be positive, got {}", self.r_max)));
        }
        if self.n_points < 1000 {
            return Err(NseError::Params(format!("n_points must be at least 1000, got {}", self.n_points)));
        }
        if let Some(c) = &self.self_interaction {
            c.validate()?;
        }
        Ok(())
    }

    /// Exact Coulomb ground energy `-mu alpha^2 / 2`.
    pub fn coulomb_energy(&self) -> f64 {
        -0.5 * self.reduced_mass * self.external_coulomb_strength.powi(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub energy: f64,
    pub spacing: f64,
    /// `u(r_i)` at `r_i = i * spacing`, normalized so that `int u^2 dr = 1`.
    pub u: Vec<f64>,
    /// Self-consistency iterations (1 without a self term).
    pub iterations: usize,
}

const RESCALE: f64 = 1e100;

struct Shooter<'a> {
    mu: f64,
    alpha: f64,
    h: f64,
    /// `V(r_i)` for `i >= 1`; entry 0 is unused.
    potential: &'a [f64],
}

impl Shooter<'_> {
    fn f(&self, i: usize, e: f64) -> f64 {
        2.0 * self.mu * (self.potential[i] - e)
    }

    /// Outward Numerov integration. Returns the number of sign changes of `u`
    /// on `(0, r_max]`, filling `out` when given.
    fn outward(&self, e: f64, mut out: Option<&mut Vec<f64>>) -> usize {
        let n = self.potential.len() - 1;
        let h2 = self.h * self.h;
        // u ~ r - mu alpha r^2 near the origin, where f u -> -2 mu alpha.
        let mut y_prev = h2 * 2.0 * self.mu * self.alpha / 12.0;
        let mut u = self.h - self.mu * self.alpha * h2;
        let mut y = u * (1.0 - h2 * self.f(1, e) / 12.0);
        if let Some(o) = out.as_deref_mut() {
            o.clear();
            o.push(0.0);
            o.push(u);
        }
        let mut nodes = 0;
        for i in 1..n {
            let y_next = 2.0 * y - y_prev + h2 * self.f(i, e) * u;
            let u_next = y_next / (1.0 - h2 * self.f(i + 1, e) / 12.0);
            if (u_next < 0.0) != (u < 0.0) && u_next != 0.0 {
                nodes += 1;
            }
            y_prev = y;
            u = u_next;
            y = y_next;
            if let Some(o) = out.as_deref_mut() {
                o.push(u);
            }
            if u.abs() > RESCALE {
                u /= RESCALE;
                y /= RESCALE;
                y_prev /= RESCALE;
                if let Some(o) = out.as_deref_mut() {
                    o.iter_mut().for_each(|x| *x /= RESCALE);
                }
            }
        }
        nodes
    }

    /// Inward integration from `u(r_max) = 0` down to index `stop`.
    fn inward(&self, e: f64, stop: usize) -> Vec<f64> {
        let n = self.potential.len() - 1;
        let h2 = self.h * self.h;
        let mut u = vec![0.0; n + 1];
        u[n - 1] = 1e-30;
        let mut y_next = 0.0;
        let mut y = u[n - 1] * (1.0 - h2 * self.f(n - 1, e) / 12.0);
        for i in (stop..n - 1).rev() {
            let y_prev = 2.0 * y - y_next + h2 * self.f(i + 1, e) * u[i + 1];
            u[i] = y_prev / (1.0 - h2 * self.f(i, e) / 12.0);
            y_next = y;
            y = y_prev;
            if u[i].abs() > RESCALE {
                u[i..].iter_mut().for_each(|x| *x /= RESCALE);
                y /= RESCALE;
                y_next /= RESCALE;
            }
        }
        u
    }

    fn lowest(&self) -> Result<f64, NseError> {
        if self.outward(0.0, None) == 0 {
            return Err(NseError::NoBoundState);
        }
        let mut lo = self.potential[1..].iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
        let mut hi = 0.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.outward(mid, None) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * lo.abs().max(1e-300) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Normalized eigenfunction at energy `e`, joined at the outer turning point.
    fn eigenfunction(&self, e: f64) -> Vec<f64> {
        let n = self.potential.len() - 1;
        let mut out = Vec::with_capacity(n + 1);
        self.outward(e, Some(&mut out));
        let turning = (1..n).rev().find(|&i| self.potential[i] < e).unwrap_or(n / 2);
        let join = turning.clamp(n / 20, n - 10);
        let inner = self.inward(e, join);
        let scale = if inner[join] != 0.0 { out[join] / inner[join] } else { 0.0 };
        let mut u: Vec<f64> = out[..join].to_vec();
        u.extend(inner[join..].iter().map(|x| x * scale));
        let norm: f64 = trapezoid(&u.iter().map(|x| x * x).collect::<Vec<_>>(), self.h);
        let s = norm.sqrt();
        let sign = if u.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a }) < 0.0 {
            -1.0
        } else {
            1.0
        };
        u.iter_mut().for_each(|x| *x *= sign / s);
        u
    }
}

fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
}

/// Shell-theorem potential `q [Q(r) / r + int_r^inf u^2 / r' dr']` of a
/// normalized radial density, `Q(r) = int_0^r u^2`.
fn shell_potential(u: &[f64], h: f64, q: f64) -> Vec<f64> {
    let n = u.len();
    let mut enclosed = vec![0.0; n];
    for i in 1..n {
        enclosed[i] = enclosed[i - 1] + 0.5 * h * (u[i - 1].powi(2) + u[i].powi(2));
    }
    // u^2 / r at r = 0 is zero since u ~ r.
    let weight = |i: usize| if i == 0 { 0.0 } else { u[i].powi(2) / (i as f64 * h) };
    let mut outer = vec![0.0; n];
    for i in (0..n - 1).rev() {
        outer[i] = outer[i + 1] + 0.5 * h * (weight(i) + weight(i + 1));
    }
    (0..n)
        .map(|i| {
            let inside = if i == 0 { 0.0 } else { enclosed[i] / (i as f64 * h) };
            q * (inside + outer[i])
        })
        .collect()
}

/// Lowest s-wave eigenvalue, self-consistent when a self term is present.
pub fn radial_ground_state(problem: &RadialProblem) -> Result<RadialSolution, NseError> {
    problem.validate()?;
    let n = problem.n_points;
    let h = problem.r_max / n as f64;
    let alpha = problem.external_coulomb_strength;
    let external: Vec<f64> = (0..=n).map(|i| if i == 0 { 0.0 } else { -alpha / (i as f64 * h) }).collect();
    let solve = |potential: &[f64]| -> Result<(f64, Vec<f64>), NseError> {
        let shooter = Shooter { mu: problem.reduced_mass, alpha, h, potential };
        let e = shooter.lowest()?;
        Ok((e, shooter.eigenfunction(e)))
    };
    let (mut energy, mut u) = solve(&external)?;
    let Some(coupling) = &problem.self_interaction else {
        return Ok(RadialSolution { energy, spacing: h, u, iterations: 1 });
    };
    let q = coupling.signed_strength();
    // Mixing starts from V_self = 0: the full self term at once can cancel the
    // external tail before the orbital has adjusted.
    let mut v_self: Vec<f64> = shell_potential(&u, h, q).into_iter().map(|v| 0.5 * v).collect();
    for iteration in 2..=500 {
        let total: Vec<f64> = external.iter().zip(&v_self).map(|(a, b)| a + b).collect();
        let (e, new_u) = solve(&total)?;
        let change = (e - energy).abs();
        energy = e;
        u = new_u;
        if change <= 1e-11 * energy.abs().max(1e-12) {
            return Ok(RadialSolution { energy, spacing: h, u, iterations: iteration });
        }
        let fresh = shell_potential(&u, h, q);
        v_self.iter_mut().zip(&fresh).for_each(|(v, f)| *v = 0.5 * *v + 0.5 * f);
    }
    Err(NseError::NotConverged { iterations: 500, residual: f64::NAN, energy_change: f64::NAN })
}
