//! Preconditioned nonlinear conjugate gradients with an exact-then-Armijo
//! line search.

use super::{DirichletProblem, InitialIterate, SolverConfig, SolverReport};
use crate::orlicz::{luxemburg_norm, luxemburg_norm_masked, ConjugatePhi};
use crate::phi::R_MIN;
use crate::spectral::{GridField, VectorGridField};
use crate::{Error, Result};

/// `u + t d` in gradient space: `D^s u + t D^s d`.
struct Ray<'a> {
    prob: &'a DirichletProblem,
    du: &'a VectorGridField,
    dd: &'a VectorGridField,
    /// `⟨F, d⟩`.
    load_d: f64,
    vol: f64,
}

impl Ray<'_> {
    fn point(&self, x: usize, t: f64) -> (f64, f64, f64) {
        let mut m2 = 0.0;
        let mut m0 = 0.0;
        let mut dot = 0.0;
        for (cu, cd) in self.du.components().iter().zip(self.dd.components()) {
            let v = cu[x] + t * cd[x];
            m2 += v * v;
            m0 += cu[x] * cu[x];
            dot += v * cd[x];
        }
        (m2.sqrt(), m0.sqrt(), dot)
    }

    /// `φ(t) − φ(0)`, summed cell by cell to limit cancellation.
    fn delta(&self, t: f64) -> f64 {
        let n = self.du.grid().len();
        let phi = self.prob.phi();
        let mut acc = 0.0;
        for x in 0..n {
            let (m, m0, _) = self.point(x, t);
            acc += phi.value(x, m) - phi.value(x, m0);
        }
        acc * self.vol - t * self.load_d
    }

    /// `φ'(t)`.
    fn slope(&self, t: f64) -> f64 {
        let n = self.du.grid().len();
        let phi = self.prob.phi();
        let mut acc = 0.0;
        for x in 0..n {
            let (m, _, dot) = self.point(x, t);
            acc += phi.density(x, m.max(R_MIN)) * dot;
        }
        acc * self.vol - self.load_d
    }

    /// Root of the increasing `φ'` on `(0, ∞)`, starting from a guess.
    fn minimizer(&self, guess: f64, slope0: f64) -> Option<f64> {
        let (mut lo, mut slo) = (0.0, slope0);
        let mut hi = guess;
        let mut shi = self.slope(hi);
        let mut k = 0;
        while shi < 0.0 {
            lo = hi;
            slo = shi;
            hi *= 4.0;
            shi = self.slope(hi);
            k += 1;
            if k > 60 || !shi.is_finite() {
                return None;
            }
        }
        let mut side = 0i8;
        for _ in 0..100 {
            let c = (lo * shi - hi * slo) / (shi - slo);
            let c = if c > lo && c < hi { c } else { 0.5 * (lo + hi) };
            let sc = self.slope(c);
            if sc == 0.0 || hi - lo <= 1e-13 * hi {
                return Some(c);
            }
            if sc < 0.0 {
                lo = c;
                slo = sc;
                if side == -1 {
                    shi *= 0.5;
                }
                side = -1;
            } else {
                hi = c;
                shi = sc;
                if side == 1 {
                    slo *= 0.5;
                }
                side = 1;
            }
            if sc.abs() <= 1e-12 * slope0.abs() {
                return Some(c);
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Preconditioner `Π F^{-1}[(|ξ|^{2s} + κ)^{-1}] Π` with `κ = (2π/L)^{2s}`.
fn precondition(prob: &DirichletProblem, g: &GridField) -> Result<GridField> {
    let s = prob.s();
    let kappa = (2.0 * std::f64::consts::PI / g.grid().length()).powf(2.0 * s);
    let z = prob.spectral().filter(g, |r| 1.0 / (r.powf(2.0 * s) + kappa))?;
    prob.project(&z)
}

/// Minimizes the energy over admissible fields.
///
/// Returns the minimizer and a report; hitting `max_iter` gives
/// `converged = false`, a line search that cannot lower the energy while
/// the residual is still above tolerance is a [`Error::SolverStall`].
pub fn solve(prob: &DirichletProblem, config: &SolverConfig) -> Result<(GridField, SolverReport)> {
    config.validate()?;
    let grid = *prob.mask().grid();
    let vol = grid.cell_volume();
    let mut u = match &config.initial {
        InitialIterate::Zero => GridField::zeros(grid),
        InitialIterate::Supplied(u0) => {
            grid.check_same(u0.grid())?;
            prob.project(u0)?
        }
    };
    let mut du = prob.grad(&u)?;
    let mut energy = prob.energy(&u)?;
    let mut g = prob.gradient_from(&du)?;
    let mut residual = g.l2_norm();
    let mut z = precondition(prob, &g)?;
    let mut gz = g.dot(&z);
    let mut d = z.scaled(-1.0);

    let mut report = SolverReport {
        iterations: 0,
        energy_history: vec![energy],
        residual_history: vec![residual],
        step_history: Vec::new(),
        energy,
        residual,
        dual_residual: 0.0,
        norm_u: 0.0,
        norm_grad_u: 0.0,
        converged: false,
    };
    let mut last_decrease = f64::INFINITY;
    let mut step_guess = 1.0;
    let mut since_restart = 0;

    while report.iterations < config.max_iter {
        if residual <= config.residual_tol && last_decrease <= config.energy_tol {
            report.converged = true;
            break;
        }
        let mut slope0 = g.dot(&d);
        if !(slope0 < 0.0) {
            d = z.scaled(-1.0);
            slope0 = -gz;
            since_restart = 0;
        }
        if slope0 == 0.0 {
            report.converged = residual <= config.residual_tol;
            break;
        }
        let dd = prob.grad(&d)?;
        let ray = Ray { prob, du: &du, dd: &dd, load_d: prob.load.dot(&d), vol };
        let mut t = ray.minimizer(step_guess, slope0).unwrap_or(step_guess);
        let mut delta = ray.delta(t);
        let mut tries = 0;
        while !(delta <= config.armijo * t * slope0 && delta < 0.0) {
            t *= config.backtrack;
            delta = ray.delta(t);
            tries += 1;
            if tries > 60 {
                break;
            }
        }
        if !(delta < 0.0) {
            // No representable decrease left along d.
            if residual <= config.residual_tol {
                report.converged = true;
                break;
            }
            if since_restart > 0 {
                d = z.scaled(-1.0);
                since_restart = 0;
                continue;
            }
            finish(prob, &u, &du, &g, &mut report)?;
            return Err(Error::SolverStall(Box::new(report)));
        }

        u.axpy(t, &d);
        u = prob.project(&u)?;
        du = prob.grad(&u)?;
        energy += delta;
        last_decrease = -delta;
        step_guess = t;
        report.iterations += 1;
        report.energy_history.push(energy);
        report.step_history.push(t);

        let g_new = prob.gradient_from(&du)?;
        residual = g_new.l2_norm();
        report.residual_history.push(residual);
        let z_new = precondition(prob, &g_new)?;
        let gz_new = g_new.dot(&z_new);
        since_restart += 1;
        let beta = if since_restart >= config.restart_every {
            since_restart = 0;
            0.0
        } else {
            (g_new.dot(&z_new.sub(&z)) / gz).max(0.0)
        };
        d = z_new.scaled(-1.0).add_scaled(beta, &d);
        g = g_new;
        z = z_new;
        gz = gz_new;
    }
    if residual <= config.residual_tol && last_decrease <= config.energy_tol {
        report.converged = true;
    }
    // The history is a running sum of exact decreases; the final value is
    // re-evaluated from scratch.
    report.energy = prob.energy(&u)?;
    finish(prob, &u, &du, &g, &mut report)?;
    Ok((u, report))
}

fn finish(prob: &DirichletProblem, u: &GridField, du: &VectorGridField, g: &GridField, report: &mut SolverReport) -> Result<()> {
    report.residual = g.l2_norm();
    report.dual_residual = luxemburg_norm(g, &ConjugatePhi(prob.phi()))?;
    report.norm_u = luxemburg_norm_masked(u, prob.phi(), Some(prob.mask()))?;
    report.norm_grad_u = luxemburg_norm(du, prob.phi())?;
    Ok(())
}
