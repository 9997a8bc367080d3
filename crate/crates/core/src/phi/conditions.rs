//! Sampled audits of the growth and regularity hypotheses.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{left_inverse, PhiFunction};
use crate::spectral::Grid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", content = "exponent", rename_all = "kebab-case")]
pub enum ConditionId {
    /// `ℓ ↦ A(x, ℓ) / ℓ^p` nondecreasing.
    Inc(f64),
    /// `ℓ ↦ A(x, ℓ) / ℓ^q` nonincreasing.
    Dec(f64),
    A0,
    A1,
    A2,
    HypothesisOnA,
    PointwiseBounds,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::Inc(p) => write!(f, "(Inc)_{p}"),
            ConditionId::Dec(q) => write!(f, "(Dec)_{q}"),
            ConditionId::A0 => f.write_str("(A0)"),
            ConditionId::A1 => f.write_str("(A1)"),
            ConditionId::A2 => f.write_str("(A2)"),
            ConditionId::HypothesisOnA => f.write_str("hypothesis-on-a"),
            ConditionId::PointwiseBounds => f.write_str("pointwise-bounds"),
        }
    }
}

/// Ball `B(center, radius)` in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBall {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Declared data for the `(A2)` spot check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2Plan {
    pub sigma: f64,
    pub beta: f64,
    /// `h(x)` per grid cell, or a single constant value.
    pub h: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
}

impl A2Plan {
    fn h(&self, x: usize) -> f64 {
        if self.h.len() == 1 {
            self.h[0]
        } else {
            self.h[x]
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPlan {
    pub x_samples: Vec<usize>,
    pub ladder: Vec<f64>,
    pub tolerance: f64,
    /// `(a₋, a₊)`; defaults to `(p − 1, q − 1)` of the declared growth.
    pub a_bounds: Option<(f64, f64)>,
    /// Grid locating the cells of the `(A1)` balls.
    pub grid: Option<Grid>,
    pub balls: Vec<SampleBall>,
    /// Declared `β` for `(A1)`.
    pub a1_beta: f64,
    pub a2: Option<A2Plan>,
}

/// `{2^k : k = −20..=20}`.
pub fn default_ladder() -> Vec<f64> {
    (-20..=20).map(|k| (k as f64).exp2()).collect()
}

impl SamplingPlan {
    pub fn new(x_samples: Vec<usize>) -> Self {
        Self {
            x_samples,
            ladder: default_ladder(),
            tolerance: 1e-12,
            a_bounds: None,
            grid: None,
            balls: Vec::new(),
            a1_beta: 0.5,
            a2: None,
        }
    }

    /// Every cell of a homogeneous function is the same; one sample suffices.
    pub fn for_phi(phi: &PhiFunction) -> Self {
        Self::new((0..phi.cells().unwrap_or(1)).collect())
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_ladder(mut self, ladder: Vec<f64>) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn with_a_bounds(mut self, a_minus: f64, a_plus: f64) -> Self {
        self.a_bounds = Some((a_minus, a_plus));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: usize,
    /// `ℓ` or `r` at which the worst case occurs.
    pub at: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub pass: bool,
    /// Worst sampled point; present whenever the check failed.
    pub witness: Option<Witness>,
    pub samples: usize,
    /// True for `(A1)`/`(A2)`, which are spot checks rather than proofs.
    pub sampled: bool,
    /// Largest admissible `β` for `(A0)`, smallest observed ratio for `(A1)`/`(A2)`.
    pub beta: Option<f64>,
}

/// Running worst case over samples.
struct Worst {
    witness: Option<Witness>,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Self { witness: None, samples: 0 }
    }

    fn record(&mut self, x: usize, at: f64, violation: f64) {
        self.samples += 1;
        let worse = match self.witness {
            None => true,
            Some(w) => violation > w.violation || violation.is_nan(),
        };
        if worse {
            self.witness = Some(Witness { x, at, violation });
        }
    }

    fn finish(self, condition: ConditionId, tol: f64, sampled: bool, beta: Option<f64>) -> ConditionReport {
        let pass = self.witness.is_none_or(|w| w.violation <= tol);
        ConditionReport {
            condition,
            pass,
            witness: if pass { None } else { self.witness },
            samples: self.samples,
            sampled,
            beta,
        }
    }
}

/// Audit one condition on the cells and ladder of `plan`.
pub fn check_condition(phi: &PhiFunction, id: ConditionId, plan: &SamplingPlan) -> Result<ConditionReport> {
    if plan.x_samples.is_empty() {
        return Err(Error::Config("sampling plan has no x samples".into()));
    }
    let needs_ladder = !matches!(id, ConditionId::A0);
    if needs_ladder && plan.ladder.is_empty() {
        return Err(Error::Config("sampling plan has an empty ladder".into()));
    }
    if plan.ladder.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Config("ladder values must be positive and finite".into()));
    }
    for &x in &plan.x_samples {
        phi.check_x(x)?;
    }
    let tol = plan.tolerance;
    match id {
        ConditionId::Inc(p) | ConditionId::Dec(p) => {
            let increasing = matches!(id, ConditionId::Inc(_));
            let mut ladder = plan.ladder.clone();
            ladder.sort_by(f64::total_cmp);
            let mut worst = Worst::new();
            for &x in &plan.x_samples {
                let ratio = |l: f64| phi.value(x, l) / l.powf(p);
                for w in ladder.windows(2) {
                    let (r0, r1) = (ratio(w[0]), ratio(w[1]));
                    let drop = if increasing { (r0 - r1) / r0 } else { (r1 - r0) / r0 };
                    worst.record(x, w[1], drop);
                }
            }
            Ok(worst.finish(id, tol, false, None))
        }
        ConditionId::A0 => check_a0(phi, plan),
        ConditionId::HypothesisOnA => {
            let (am, ap) = a_bounds(phi, plan);
            let h: f64 = 1e-4;
            let mut worst = Worst::new();
            for &x in &plan.x_samples {
                for &r in &plan.ladder {
                    let hi = phi.density(x, r * h.exp()).ln();
                    let lo = phi.density(x, r * (-h).exp()).ln();
                    let e = (hi - lo) / (2.0 * h) + 1.0;
                    worst.record(x, r, (am - e).max(e - ap));
                }
            }
            Ok(worst.finish(id, tol.max(1e-6), false, None))
        }
        ConditionId::PointwiseBounds => {
            let (am, ap) = a_bounds(phi, plan);
            let mut worst = Worst::new();
            for &x in &plan.x_samples {
                for &l in &plan.ladder {
                    let a_val = phi.value(x, l);
                    let mid = l * l * phi.density(x, l);
                    let v = ((am + 1.0) * a_val - mid).max(mid - (ap + 1.0) * a_val) / a_val;
                    worst.record(x, l, v);
                }
            }
            Ok(worst.finish(id, tol, false, None))
        }
        ConditionId::A1 => check_a1(phi, plan),
        ConditionId::A2 => check_a2(phi, plan),
    }
}

fn a_bounds(phi: &PhiFunction, plan: &SamplingPlan) -> (f64, f64) {
    plan.a_bounds.unwrap_or_else(|| {
        let g = phi.growth();
        (g.p() - 1.0, g.q() - 1.0)
    })
}

/// Largest `β ∈ (0, 1]` with `A(x, β) ≤ 1 ≤ A(x, 1/β)` on every sampled cell,
/// found by bisection on the predicate; the binding cell is the witness.
fn check_a0(phi: &PhiFunction, plan: &SamplingPlan) -> Result<ConditionReport> {
    let holds = |b: f64| plan.x_samples.iter().all(|&x| phi.value(x, b) <= 1.0 && phi.value(x, 1.0 / b) >= 1.0);
    let samples = plan.x_samples.len();
    let beta = if holds(1.0) {
        Some(1.0)
    } else {
        let mut lo = 0.5;
        let mut k = 1;
        while !holds(lo) && k < 60 {
            lo *= 0.5;
            k += 1;
        }
        if holds(lo) {
            let mut hi = lo * 2.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if holds(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        } else {
            None
        }
    };
    match beta {
        Some(b) => Ok(ConditionReport {
            condition: ConditionId::A0,
            pass: true,
            witness: None,
            samples,
            sampled: false,
            beta: Some(b),
        }),
        None => {
            let b = (-60f64).exp2();
            let (x, at, violation) = plan
                .x_samples
                .iter()
                .map(|&x| {
                    let lower = phi.value(x, b) - 1.0;
                    let upper = 1.0 - phi.value(x, 1.0 / b);
                    if lower >= upper { (x, b, lower) } else { (x, 1.0 / b, upper) }
                })
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .expect("nonempty samples");
            Ok(ConditionReport {
                condition: ConditionId::A0,
                pass: false,
                witness: Some(Witness { x, at, violation }),
                samples,
                sampled: false,
                beta: None,
            })
        }
    }
}

/// `β A^{-1}(x, ℓ) ≤ A^{-1}(y, ℓ)` for `1 ≤ ℓ ≤ 1/|B|` and `x, y` in each ball.
fn check_a1(phi: &PhiFunction, plan: &SamplingPlan) -> Result<ConditionReport> {
    let grid = plan.grid.as_ref().ok_or_else(|| Error::Config("(A1) needs a grid to locate balls".into()))?;
    if plan.balls.is_empty() {
        return Err(Error::Config("(A1) needs at least one sample ball".into()));
    }
    let mut worst = Worst::new();
    let mut min_ratio = f64::INFINITY;
    for ball in &plan.balls {
        let volume = match grid.dim() {
            1 => 2.0 * ball.radius,
            _ => std::f64::consts::PI * ball.radius * ball.radius,
        };
        if !(volume > 0.0 && volume <= 1.0) {
            return Err(Error::Config(format!("(A1) balls need 0 < |B| <= 1, got {volume}")));
        }
        let cells: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let pt = grid.point(i);
                let d2: f64 = (0..grid.dim()).map(|j| (pt[j] - ball.center[j]).powi(2)).sum();
                d2 <= ball.radius * ball.radius
            })
            .collect();
        let levels: Vec<f64> = plan.ladder.iter().copied().filter(|&l| l >= 1.0 && l <= 1.0 / volume).collect();
        for &l in &levels {
            let inv: Vec<(usize, f64)> = cells
                .iter()
                .map(|&x| Ok((x, left_inverse(phi, x, l)?)))
                .collect::<Result<_>>()?;
            let Some(&(x_max, hi)) = inv.iter().max_by(|a, b| a.1.total_cmp(&b.1)) else { continue };
            let &(_, lo) = inv.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
            min_ratio = min_ratio.min(lo / hi);
            worst.record(x_max, l, plan.a1_beta * hi - lo);
        }
    }
    let beta = min_ratio.is_finite().then_some(min_ratio.min(1.0));
    Ok(worst.finish(ConditionId::A1, plan.tolerance, true, beta))
}

/// `β A^{-1}(x, ℓ) ≤ A^{-1}(y, ℓ + h(x) + h(y))` for `0 ≤ ℓ ≤ σ` on declared pairs.
fn check_a2(phi: &PhiFunction, plan: &SamplingPlan) -> Result<ConditionReport> {
    let a2 = plan.a2.as_ref().ok_or_else(|| Error::Config("(A2) needs declared sigma, beta, h and pairs".into()))?;
    if a2.pairs.is_empty() {
        return Err(Error::Config("(A2) needs at least one sample pair".into()));
    }
    if a2.h.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::Config("(A2) weight h must be finite and nonnegative".into()));
    }
    let mut levels: Vec<f64> = plan.ladder.iter().copied().filter(|&l| l <= a2.sigma).collect();
    levels.push(0.0);
    let mut worst = Worst::new();
    let mut min_ratio = f64::INFINITY;
    for &(x, y) in &a2.pairs {
        phi.check_x(x)?;
        phi.check_x(y)?;
        for &l in &levels {
            let lhs = left_inverse(phi, x, l)?;
            let rhs = left_inverse(phi, y, l + a2.h(x) + a2.h(y))?;
            if lhs > 0.0 {
                min_ratio = min_ratio.min(rhs / lhs);
            }
            worst.record(x, l, a2.beta * lhs - rhs);
        }
    }
    let beta = min_ratio.is_finite().then_some(min_ratio.min(1.0));
    Ok(worst.finish(ConditionId::A2, plan.tolerance, true, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::SpatialParam;

    #[test]
    fn cubic_is_inc2_not_dec2() {
        let phi = PhiFunction::power(3.0, 1.0).unwrap();
        let plan = SamplingPlan::new(vec![0]);
        assert!(check_condition(&phi, ConditionId::Inc(2.0), &plan).unwrap().pass);
        let dec = check_condition(&phi, ConditionId::Dec(2.0), &plan).unwrap();
        assert!(!dec.pass);
        let w = dec.witness.unwrap();
        assert!(w.violation > 0.0 && w.x == 0);
    }

    #[test]
    fn a0_double_phase_beta() {
        let phi = PhiFunction::double_phase(2.0, 4.0, SpatialParam::field(vec![0.0, 0.5, 1.0])).unwrap();
        let rep = check_condition(&phi, ConditionId::A0, &SamplingPlan::for_phi(&phi)).unwrap();
        assert!(rep.pass);
        // binding cell α = 1: β² + β⁴ = 1
        let expected = ((5f64.sqrt() - 1.0) / 2.0).sqrt();
        assert!((rep.beta.unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn empty_plan_is_config_error() {
        let phi = PhiFunction::power(2.0, 1.0).unwrap();
        let plan = SamplingPlan::new(vec![]);
        assert!(matches!(check_condition(&phi, ConditionId::A0, &plan), Err(Error::Config(_))));
        let plan = SamplingPlan::new(vec![0]).with_ladder(vec![]);
        assert!(matches!(check_condition(&phi, ConditionId::Inc(2.0), &plan), Err(Error::Config(_))));
    }

    #[test]
    fn hypothesis_and_pointwise_bounds() {
        let phi = PhiFunction::log_perturbed(SpatialParam::field(vec![1.2, 2.0, 3.5])).unwrap();
        let plan = SamplingPlan::for_phi(&phi);
        for id in [ConditionId::HypothesisOnA, ConditionId::PointwiseBounds] {
            let rep = check_condition(&phi, id, &plan).unwrap();
            assert!(rep.pass, "{id}: {:?}", rep.witness);
        }
        let tight = plan.clone().with_a_bounds(0.2, 1.0);
        assert!(!check_condition(&phi, ConditionId::PointwiseBounds, &tight).unwrap().pass);
    }

    #[test]
    fn a1_a2_are_flagged_sampled() {
        let grid = Grid::new(1, 16, 4.0).unwrap();
        let alpha: Vec<f64> = (0..16).map(|i| 1.0 + 0.1 * (i as f64 * 0.4).sin()).collect();
        let phi = PhiFunction::variable_exponent(SpatialParam::field(alpha), SpatialParam::Constant(2.0)).unwrap();
        let mut plan = SamplingPlan::for_phi(&phi);
        plan.grid = Some(grid);
        plan.balls = vec![SampleBall { center: [0.0, 0.0], radius: 0.5 }];
        plan.a2 = Some(A2Plan { sigma: 4.0, beta: 0.5, h: vec![0.0], pairs: vec![(0, 7), (3, 12)] });
        for id in [ConditionId::A1, ConditionId::A2] {
            let rep = check_condition(&phi, id, &plan).unwrap();
            assert!(rep.pass && rep.sampled, "{id}");
            assert!(rep.beta.unwrap() > 0.5);
        }
    }
}
