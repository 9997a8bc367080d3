//! Continuous dependence of solutions on the fractional order.

use serde::{Deserialize, Serialize};

use super::{solve, DirichletProblem, InitialIterate, SolverConfig};
use crate::mask::DomainMask;
use crate::orlicz::{luxemburg_norm, luxemburg_norm_masked, ConjugatePhi, DualPairRHS};
use crate::phi::PhiFunction;
use crate::spectral::{Grid, GridField, VectorGridField};
use crate::{Error, Result};

/// Five smooth vector test fields for the weak-convergence proxies:
/// Gaussians of increasing width spread across the central part of the box,
/// pointing along alternating axes in 2D.
pub fn default_probes(grid: &Grid) -> Vec<VectorGridField> {
    let l = grid.length();
    let d = grid.dim();
    (0..5)
        .map(|k| {
            let c = [(k as f64 - 2.0) * l / 16.0, (2.0 - k as f64) * l / 32.0];
            let w = l / 32.0 * (1.0 + 0.5 * k as f64);
            let profile = GridField::from_fn(*grid, |x| {
                let r2: f64 = (0..d).map(|j| (x[j] - c[j]).powi(2)).sum();
                (-r2 / (2.0 * w * w)).exp()
            });
            let comps = (0..d)
                .map(|j| if d == 1 || j == k % 2 { profile.data().to_vec() } else { profile.scaled(0.5).into_data() })
                .collect();
            VectorGridField::new(*grid, comps).expect("finite probe")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceRow {
    pub n: usize,
    pub s_n: f64,
    /// `‖u_n − u_σ‖_{L^A(Ω)}`.
    pub e_n: f64,
    /// `max_ψ |⟨D^{s_n} u_n − D^σ u_σ, ψ⟩|`.
    pub w_n_max: f64,
    pub iterations: usize,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub sigma: f64,
    /// `‖u_σ‖_{L^A(Ω)}`.
    pub norm_u_sigma: f64,
    pub rows: Vec<DependenceRow>,
    /// `‖f_n − f‖_{L^{A'}} + ‖𝒇_n − 𝒇‖_{L^{A'}}`.
    pub rhs_distance: Vec<f64>,
    /// `‖D^{s_n} u_n‖_{L^A} / (‖𝒇_n‖_{L^{A'}} + 1)`.
    pub coercivity: Vec<f64>,
    /// Disagreement of two solves of the limit problem from different starts.
    pub e_floor: f64,
    pub w_floor: f64,
    pub e_strictly_decreasing: bool,
    /// `w_{n+1} ≤ w_n + w_floor`.
    pub w_decreasing: bool,
    pub final_relative_error: f64,
    pub epsilon_dep: Option<f64>,
    /// Every `e_n` and `w_n` with `|s_n − σ| ≤ 1e-2` is at most `epsilon_dep`.
    pub within_baseline: bool,
    pub pass: bool,
}

/// Solves for each `(s_n, f_n)` and for `(σ, f)` and measures `u_n → u_σ`.
#[derive(Clone, Debug)]
pub struct DependenceExperiment {
    pub sigma: f64,
    pub s_values: Vec<f64>,
    /// Limit data `(f, 𝒇)`; its order is replaced by `σ`.
    pub rhs: DualPairRHS,
    /// `(f_n, 𝒇_n)`, one per order; empty means `f_n = f`.
    pub rhs_sequence: Vec<DualPairRHS>,
    /// Test fields `ψ`; empty means [`default_probes`].
    pub probes: Vec<VectorGridField>,
    pub epsilon_dep: Option<f64>,
}

impl DependenceExperiment {
    pub fn new(sigma: f64, s_values: Vec<f64>, rhs: DualPairRHS) -> Self {
        Self { sigma, s_values, rhs, rhs_sequence: Vec::new(), probes: Vec::new(), epsilon_dep: None }
    }

    /// `σ + 2^{-n}` for `n = 1..=count`.
    pub fn dyadic(sigma: f64, count: usize, rhs: DualPairRHS) -> Self {
        Self::new(sigma, (1..=count).map(|n| sigma + (-(n as f64)).exp2()).collect(), rhs)
    }

    pub fn run(&self, phi: &PhiFunction, mask: &DomainMask, config: &SolverConfig) -> Result<DependenceReport> {
        let sigma = self.sigma;
        if !(sigma > 0.0 && sigma <= 1.0) || self.s_values.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::Domain("orders must lie in (0, 1]".into()));
        }
        if !self.rhs_sequence.is_empty() && self.rhs_sequence.len() != self.s_values.len() {
            return Err(Error::Config("one right-hand side per order is required".into()));
        }
        let grid = *mask.grid();
        let probes = if self.probes.is_empty() { default_probes(&grid) } else { self.probes.clone() };
        let mut report = DependenceReport { sigma, epsilon_dep: self.epsilon_dep, ..Default::default() };

        let limit = DirichletProblem::new(phi.clone(), self.rhs.with_s(sigma), mask.clone())?;
        let (u_sigma, rep) = solve(&limit, config)?;
        if !rep.converged {
            return Err(abort(format!("limit solve at sigma={sigma} did not converge"), report));
        }
        let du_sigma = limit.grad(&u_sigma)?;
        report.norm_u_sigma = luxemburg_norm_masked(&u_sigma, phi, Some(mask))?;
        let pairings = |dv: &VectorGridField| -> f64 {
            probes.iter().map(|p| dv.dot(p).abs()).fold(0.0, f64::max)
        };

        // Solver noise: the limit problem again from a different start.
        let start = limit.project(&probes[0].component(0).scaled(report.norm_u_sigma.max(1.0)))?;
        let alt = SolverConfig { initial: InitialIterate::Supplied(start), ..config.clone() };
        let (u_alt, rep_alt) = solve(&limit, &alt)?;
        if !rep_alt.converged {
            return Err(abort("second limit solve did not converge".into(), report));
        }
        report.e_floor = luxemburg_norm_masked(&u_alt.sub(&u_sigma), phi, Some(mask))?;
        report.w_floor = 2.0 * pairings(&limit.grad(&u_alt)?.sub(&du_sigma));

        let conj = ConjugatePhi(phi);
        for (i, &s_n) in self.s_values.iter().enumerate() {
            let rhs_n = match self.rhs_sequence.get(i) {
                Some(r) => r.with_s(s_n),
                None => self.rhs.with_s(s_n),
            };
            let dist = luxemburg_norm(&rhs_n.f().sub(self.rhs.f()), &conj)?
                + luxemburg_norm(&rhs_n.fvec().sub(self.rhs.fvec()), &conj)?;
            report.rhs_distance.push(dist);
            let prob = DirichletProblem::new(phi.clone(), rhs_n, mask.clone())?;
            let (u_n, rep_n) = match solve(&prob, config) {
                Ok(v) => v,
                Err(Error::SolverStall(r)) => {
                    return Err(abort(format!("solve at s={s_n} stalled after {} iterations", r.iterations), report))
                }
                Err(e) => return Err(e),
            };
            if !rep_n.converged {
                return Err(abort(format!("solve at s={s_n} did not converge"), report));
            }
            let du_n = prob.grad(&u_n)?;
            let e_n = luxemburg_norm_masked(&u_n.sub(&u_sigma), phi, Some(mask))?;
            let w_n_max = pairings(&du_n.sub(&du_sigma));
            let fvec_norm = luxemburg_norm(prob.rhs().fvec(), &conj)?;
            report.coercivity.push(rep_n.norm_grad_u / (fvec_norm + 1.0));
            report.rows.push(DependenceRow {
                n: i + 1,
                s_n,
                e_n,
                w_n_max,
                iterations: rep_n.iterations,
                energy: rep_n.energy,
                residual: rep_n.residual,
            });
        }
        finalize(&mut report);
        Ok(report)
    }
}

fn abort(reason: String, partial: DependenceReport) -> Error {
    Error::ExperimentAborted { reason, partial: Box::new(partial) }
}

fn finalize(report: &mut DependenceReport) {
    let sigma = report.sigma;
    let mut rows: Vec<&DependenceRow> = report.rows.iter().collect();
    rows.sort_by(|a, b| (b.s_n - sigma).abs().total_cmp(&(a.s_n - sigma).abs()));
    report.e_strictly_decreasing = rows.windows(2).all(|w| w[1].e_n < w[0].e_n);
    report.w_decreasing = rows.windows(2).all(|w| w[1].w_n_max <= w[0].w_n_max + report.w_floor);
    report.final_relative_error = rows.last().map_or(0.0, |r| r.e_n / report.norm_u_sigma.max(f64::MIN_POSITIVE));
    report.within_baseline = report.epsilon_dep.is_none_or(|eps| {
        rows.iter()
            .filter(|r| (r.s_n - sigma).abs() <= 1e-2)
            .all(|r| r.e_n <= eps && r.w_n_max <= eps)
    });
    report.pass = report.e_strictly_decreasing && report.w_decreasing && report.within_baseline;
}
