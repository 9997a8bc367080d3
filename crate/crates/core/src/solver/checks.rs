//! Runtime checks of strict monotonicity and of the dual bounds on the flux.

use serde::{Deserialize, Serialize};

use super::DirichletProblem;
use crate::orlicz::{luxemburg_norm, ConjugatePhi};
use crate::phi::{conjugate_phi, default_ladder, PhiFunction, Witness, R_MIN};
use crate::spectral::{GridField, VectorGridField};
use crate::Result;

/// `M(u, v) = ∫ (a(|D^s u|) D^s u − a(|D^s v|) D^s v) · (D^s u − D^s v)`.
pub fn monotonicity_check(u: &GridField, v: &GridField, prob: &DirichletProblem) -> Result<f64> {
    prob.check_admissible(u)?;
    prob.check_admissible(v)?;
    let du = prob.grad(u)?;
    let dv = prob.grad(v)?;
    let flux = prob.flux(&du).sub(&prob.flux(&dv));
    Ok(flux.dot(&du.sub(&dv)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualBoundReport {
    /// `A'(x, a(x, r) r) ≤ (q − 1) A(x, r)` on every sampled `(x, r)`.
    pub pointwise_pass: bool,
    /// Worst relative excess of the pointwise bound.
    pub pointwise_witness: Option<Witness>,
    /// `‖ξ_n‖_{L^A}`.
    pub norms: Vec<f64>,
    /// `‖a(x, |ξ_n|) ξ_n‖_{L^{A'}}`.
    pub dual_norms: Vec<f64>,
    pub max_dual_norm: f64,
    pub baseline: Option<f64>,
    pub pass: bool,
}

/// Relative slack on the pointwise bound, which is an equality for powers.
const POINTWISE_TOL: f64 = 1e-9;

/// Checks the conjugate-derivative estimate pointwise on the standard ladder
/// and sizes the fluxes of a bounded sequence in `L^{A'}`; with a baseline
/// the largest dual norm must stay within 5% of it.
pub fn dual_bound_checks(
    xi_sequence: &[VectorGridField],
    phi: &PhiFunction,
    x_samples: &[usize],
    baseline: Option<f64>,
) -> Result<DualBoundReport> {
    let q = phi.growth().q();
    let mut witness: Option<Witness> = None;
    for &x in x_samples {
        for r in default_ladder() {
            let lhs = conjugate_phi(phi, x, phi.derivative(x, r))?;
            let rhs = (q - 1.0) * phi.value(x, r);
            let excess = (lhs - rhs) / rhs;
            if witness.is_none_or(|w| excess > w.violation) {
                witness = Some(Witness { x, at: r, violation: excess });
            }
        }
    }
    let pointwise_pass = witness.is_none_or(|w| w.violation <= POINTWISE_TOL);

    let mut norms = Vec::with_capacity(xi_sequence.len());
    let mut dual_norms = Vec::with_capacity(xi_sequence.len());
    for xi in xi_sequence {
        norms.push(luxemburg_norm(xi, phi)?);
        let comps = xi
            .components()
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(x, &v)| phi.density(x, xi.magnitude(x).max(R_MIN)) * v)
                    .collect()
            })
            .collect();
        let flux = VectorGridField::new(*xi.grid(), comps)?;
        dual_norms.push(luxemburg_norm(&flux, &ConjugatePhi(phi))?);
    }
    let max_dual_norm = dual_norms.iter().copied().fold(0.0, f64::max);
    let bounded = baseline.is_none_or(|b| max_dual_norm <= b * (1.0 + crate::lab::BASELINE_SLACK));
    Ok(DualBoundReport {
        pointwise_pass,
        pointwise_witness: if pointwise_pass { None } else { witness },
        norms,
        dual_norms,
        max_dual_norm,
        baseline,
        pass: pointwise_pass && bounded,
    })
}
