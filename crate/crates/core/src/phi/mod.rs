//! Generalized Φ-functions `A(x, ℓ)` and their calculus.
//!
//! A Φ-function is evaluated at a cell index `x` of the grid its parameter
//! fields live on; spatially homogeneous families accept any index.
//! Where a family is generated by a density, `A(x, ℓ) = ∫₀^ℓ a(x, r) r dr`.

mod calculus;
mod companion;
mod conditions;

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quad::Composite;
use crate::{Error, Result};

pub use calculus::{conjugate_maximizer, conjugate_phi, left_inverse, legendre_transform};
pub use companion::{build_sobolev_companion, Companion};
pub use conditions::{
    check_condition, default_ladder, A2Plan, ConditionId, ConditionReport, SampleBall, SamplingPlan,
    Witness,
};

/// Smallest magnitude at which densities are evaluated.
pub const R_MIN: f64 = 1e-12;

/// Gap between `p⁺` and the declared `(Dec)` exponent of the log-perturbed
/// family. `ℓ ∂_ℓ A / A − p(x)` peaks at `≈ 0.3178` and `r ∂_r a / a + 1 − (p(x) − 1)`
/// stays below `≈ 0.3421` for every `p(x) > 1`.
pub const LOG_PERTURBED_DEC_MARGIN: f64 = 0.35;

/// `1 < p ≤ q < ∞`: `A/ℓ^p` nondecreasing and `A/ℓ^q` nonincreasing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthExponents {
    p: f64,
    q: f64,
}

impl GrowthExponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p <= q && q.is_finite()) {
            return Err(Error::Domain(format!("growth exponents need 1 < p <= q < inf, got ({p}, {q})")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Exponents of the conjugate function, `(q', p')`.
    pub fn conjugate(&self) -> Self {
        Self { p: self.q / (self.q - 1.0), q: self.p / (self.p - 1.0) }
    }
}

/// A coefficient that is either constant or sampled per grid cell.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialParam {
    Constant(f64),
    Field(Arc<[f64]>),
}

impl SpatialParam {
    pub fn field(values: Vec<f64>) -> Self {
        SpatialParam::Field(values.into())
    }

    #[inline]
    pub fn at(&self, x: usize) -> f64 {
        match self {
            SpatialParam::Constant(v) => *v,
            SpatialParam::Field(v) => v[x],
        }
    }

    pub fn cells(&self) -> Option<usize> {
        match self {
            SpatialParam::Constant(_) => None,
            SpatialParam::Field(v) => Some(v.len()),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            SpatialParam::Constant(v) => *v,
            SpatialParam::Field(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            SpatialParam::Constant(v) => *v,
            SpatialParam::Field(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// User-supplied Φ-function given by its value and density.
pub trait CustomPhi: Send + Sync + fmt::Debug {
    fn value(&self, x: usize, ell: f64) -> f64;
    fn density(&self, x: usize, r: f64) -> f64;
    fn cells(&self) -> Option<usize> {
        None
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    /// `scale · ℓ^p`.
    Power { p: f64, scale: f64 },
    /// `α(x) ℓ^{p(x)}`.
    VariableExponent { alpha: SpatialParam, exponent: SpatialParam },
    /// `ℓ^{p(x)} log(e + ℓ)`.
    LogPerturbed { exponent: SpatialParam },
    /// `ℓ^p + α(x) ℓ^q`.
    DoublePhase { p: f64, q: f64, alpha: SpatialParam },
    /// Tabulated function, e.g. a Sobolev companion.
    Tabulated(Arc<Companion>),
    Custom(Arc<dyn CustomPhi>),
}

#[derive(Clone, Debug)]
pub struct PhiFunction {
    family: Family,
    growth: GrowthExponents,
    label: String,
}

impl PhiFunction {
    pub fn new(family: Family, growth: GrowthExponents, label: impl Into<String>) -> Self {
        Self { family, growth, label: label.into() }
    }

    /// `scale · ℓ^p`.
    pub fn power(p: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("power family scale must be positive, got {scale}")));
        }
        let growth = GrowthExponents::new(p, p)?;
        Ok(Self::new(Family::Power { p, scale }, growth, format!("power(p={p},scale={scale})")))
    }

    /// `α(x) ℓ^{p(x)}` with `α` bounded away from 0 and ∞.
    pub fn variable_exponent(alpha: SpatialParam, exponent: SpatialParam) -> Result<Self> {
        if !(alpha.min() > 0.0 && alpha.max().is_finite()) {
            return Err(Error::Domain("variable-exponent weight must lie in [1/c, c]".into()));
        }
        check_same_cells(&[&alpha, &exponent])?;
        let growth = GrowthExponents::new(exponent.min(), exponent.max())?;
        Ok(Self::new(
            Family::VariableExponent { alpha, exponent },
            growth,
            format!("variable-exponent(p-={},p+={})", growth.p, growth.q),
        ))
    }

    /// `ℓ^{p(x)} log(e + ℓ)`; declared `(Dec)` exponent is `p⁺ + 0.35`.
    pub fn log_perturbed(exponent: SpatialParam) -> Result<Self> {
        let growth = GrowthExponents::new(exponent.min(), exponent.max() + LOG_PERTURBED_DEC_MARGIN)?;
        Ok(Self::new(
            Family::LogPerturbed { exponent: exponent.clone() },
            growth,
            format!("log-perturbed(p-={},p+={})", exponent.min(), exponent.max()),
        ))
    }

    /// `ℓ^p + α(x) ℓ^q` with `1 < p < q` and bounded `α ≥ 0`.
    pub fn double_phase(p: f64, q: f64, alpha: SpatialParam) -> Result<Self> {
        if !(p < q) {
            return Err(Error::Domain(format!("double phase needs p < q, got ({p}, {q})")));
        }
        if !(alpha.min() >= 0.0 && alpha.max().is_finite()) {
            return Err(Error::Domain("double-phase coefficient must be bounded and nonnegative".into()));
        }
        let growth = GrowthExponents::new(p, q)?;
        Ok(Self::new(
            Family::DoublePhase { p, q, alpha },
            growth,
            format!("double-phase(p={p},q={q})"),
        ))
    }

    pub fn custom(model: Arc<dyn CustomPhi>, growth: GrowthExponents, label: impl Into<String>) -> Self {
        Self::new(Family::Custom(model), growth, label)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn growth(&self) -> GrowthExponents {
        self.growth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of cells the parameter fields cover; `None` when homogeneous.
    pub fn cells(&self) -> Option<usize> {
        match &self.family {
            Family::Power { .. } => None,
            Family::VariableExponent { alpha, exponent } => alpha.cells().or(exponent.cells()),
            Family::LogPerturbed { exponent } => exponent.cells(),
            Family::DoublePhase { alpha, .. } => alpha.cells(),
            Family::Tabulated(t) => t.cells(),
            Family::Custom(c) => c.cells(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.cells().is_none()
    }

    fn check_x(&self, x: usize) -> Result<()> {
        match self.cells() {
            Some(n) if x >= n => Err(Error::Domain(format!("cell {x} outside the {n}-cell grid"))),
            _ => Ok(()),
        }
    }

    /// `A(x, ℓ)`.
    pub fn eval(&self, x: usize, ell: f64) -> Result<f64> {
        self.check_x(x)?;
        if !(ell >= 0.0) {
            return Err(Error::Domain(format!("Φ-function argument must be >= 0, got {ell}")));
        }
        Ok(self.value(x, ell))
    }

    /// `a(x, r)` for `r > 0`.
    pub fn eval_density(&self, x: usize, r: f64) -> Result<f64> {
        self.check_x(x)?;
        if !(r > 0.0) {
            return Err(Error::Domain(format!("density argument must be > 0, got {r}")));
        }
        Ok(self.density(x, r))
    }

    /// Unchecked `A(x, ℓ)`; `ℓ ≥ 0` and `x` in range are the caller's job.
    #[inline]
    pub(crate) fn value(&self, x: usize, ell: f64) -> f64 {
        if ell == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p, scale } => scale * ell.powf(*p),
            Family::VariableExponent { alpha, exponent } => alpha.at(x) * ell.powf(exponent.at(x)),
            Family::LogPerturbed { exponent } => ell.powf(exponent.at(x)) * (E + ell).ln(),
            Family::DoublePhase { p, q, alpha } => ell.powf(*p) + alpha.at(x) * ell.powf(*q),
            Family::Tabulated(t) => t.value(x, ell),
            Family::Custom(c) => c.value(x, ell),
        }
    }

    /// Unchecked `a(x, r)`, `r > 0`.
    #[inline]
    pub(crate) fn density(&self, x: usize, r: f64) -> f64 {
        match &self.family {
            Family::Power { p, scale } => scale * p * r.powf(p - 2.0),
            Family::VariableExponent { alpha, exponent } => {
                let p = exponent.at(x);
                alpha.at(x) * p * r.powf(p - 2.0)
            }
            Family::LogPerturbed { exponent } => {
                let p = exponent.at(x);
                p * r.powf(p - 2.0) * (E + r).ln() + r.powf(p - 1.0) / (E + r)
            }
            Family::DoublePhase { p, q, alpha } => p * r.powf(p - 2.0) + q * alpha.at(x) * r.powf(q - 2.0),
            Family::Tabulated(t) => t.density(x, r),
            Family::Custom(c) => c.density(x, r),
        }
    }

    /// `∂_ℓ A(x, ℓ) = a(x, ℓ) ℓ`, continuous at 0.
    #[inline]
    pub(crate) fn derivative(&self, x: usize, ell: f64) -> f64 {
        if ell <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p, scale } => scale * p * ell.powf(p - 1.0),
            Family::DoublePhase { p, q, alpha } => p * ell.powf(p - 1.0) + q * alpha.at(x) * ell.powf(q - 1.0),
            _ => self.density(x, ell) * ell,
        }
    }

    /// `∫₀^ℓ a(x, r) r dr` by composite Gauss–Legendre in `log r` over
    /// `[R_MIN, ℓ]`; the cell `[0, R_MIN]` is closed with the `(Inc)_p`
    /// profile `A(R_MIN) ≈ R_MIN² a(R_MIN) / p`.
    pub fn density_integral(&self, x: usize, ell: f64) -> Result<f64> {
        self.check_x(x)?;
        if !(ell >= 0.0) {
            return Err(Error::Domain(format!("integration bound must be >= 0, got {ell}")));
        }
        if ell <= R_MIN {
            return Ok(ell * ell * self.density(x, ell.max(f64::MIN_POSITIVE)) / self.growth.p);
        }
        let head = R_MIN * R_MIN * self.density(x, R_MIN) / self.growth.p;
        let (lo, hi) = (R_MIN.ln(), ell.ln());
        let panels = ((hi - lo) / 0.25).ceil().max(1.0) as usize;
        let rule = Composite::new(10);
        let body = rule.integrate(lo, hi, panels, |t| {
            let r = t.exp();
            self.density(x, r) * r * r
        });
        Ok(head + body)
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn check_same_cells(params: &[&SpatialParam]) -> Result<()> {
    let sizes: Vec<usize> = params.iter().filter_map(|p| p.cells()).collect();
    if sizes.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::GridMismatch("parameter fields have different sizes".into()));
    }
    Ok(())
}
