//! Modulars, Luxemburg norms and dual pairings over grid fields.
//!
//! Integrals are cell-volume-weighted sums over the grid.

use serde::{Deserialize, Serialize};

use crate::mask::DomainMask;
use crate::phi::{conjugate_phi, GrowthExponents, PhiFunction};
use crate::spectral::{Grid, GridField, Spectral, VectorGridField};
use crate::{Error, Result};

/// A Young function `A(x, ℓ)` with declared growth exponents.
pub trait YoungFunction {
    fn label(&self) -> String;
    /// Number of grid cells its parameters cover, `None` if homogeneous.
    fn cells(&self) -> Option<usize>;
    fn growth(&self) -> GrowthExponents;
    /// `A(x, ℓ)` for `ℓ ≥ 0`; may be `+∞` when the value is not representable.
    fn young(&self, x: usize, ell: f64) -> f64;
}

impl YoungFunction for PhiFunction {
    fn label(&self) -> String {
        PhiFunction::label(self).to_string()
    }

    fn cells(&self) -> Option<usize> {
        PhiFunction::cells(self)
    }

    fn growth(&self) -> GrowthExponents {
        PhiFunction::growth(self)
    }

    fn young(&self, x: usize, ell: f64) -> f64 {
        self.value(x, ell)
    }
}

/// The conjugate `A'` of a Φ-function, evaluated pointwise by [`conjugate_phi`].
#[derive(Clone, Debug)]
pub struct ConjugatePhi<'a>(pub &'a PhiFunction);

impl YoungFunction for ConjugatePhi<'_> {
    fn label(&self) -> String {
        format!("conjugate of {}", self.0.label())
    }

    fn cells(&self) -> Option<usize> {
        self.0.cells()
    }

    fn growth(&self) -> GrowthExponents {
        self.0.growth().conjugate()
    }

    fn young(&self, x: usize, ell: f64) -> f64 {
        conjugate_phi(self.0, x, ell).unwrap_or(f64::INFINITY)
    }
}

/// Scalar or vector grid samples; vectors contribute their Euclidean magnitude.
pub trait OrliczField {
    fn grid(&self) -> &Grid;
    fn magnitudes(&self) -> Vec<f64>;
}

impl OrliczField for GridField {
    fn grid(&self) -> &Grid {
        GridField::grid(self)
    }

    fn magnitudes(&self) -> Vec<f64> {
        GridField::magnitudes(self)
    }
}

impl OrliczField for VectorGridField {
    fn grid(&self) -> &Grid {
        VectorGridField::grid(self)
    }

    fn magnitudes(&self) -> Vec<f64> {
        VectorGridField::magnitudes(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularValue {
    pub value: f64,
    pub phi: String,
    pub field: String,
}

fn check_cells<A: YoungFunction + ?Sized>(phi: &A, grid: &Grid) -> Result<()> {
    match phi.cells() {
        Some(n) if n != grid.len() => Err(Error::GridMismatch(format!(
            "{} has parameters on {n} cells, field has {}",
            phi.label(),
            grid.len()
        ))),
        _ => Ok(()),
    }
}

/// Magnitudes on `Ω`, zero outside.
fn masked_magnitudes(u: &impl OrliczField, mask: Option<&DomainMask>) -> Result<Vec<f64>> {
    let mut m = u.magnitudes();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("field has non-finite samples".into()));
    }
    if let Some(mask) = mask {
        if mask.grid() != u.grid() {
            return Err(Error::GridMismatch("mask and field live on different grids".into()));
        }
        for (v, &inside) in m.iter_mut().zip(mask.cells()) {
            if !inside {
                *v = 0.0;
            }
        }
    }
    Ok(m)
}

fn modular_of(m: &[f64], phi: &(impl YoungFunction + ?Sized), scale: f64, vol: f64) -> f64 {
    m.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(x, &v)| phi.young(x, v * scale))
        .sum::<f64>()
        * vol
}

/// `J_A(u) = Σ A(x, |u(x)|) h^d`.
pub fn modular(u: &impl OrliczField, phi: &(impl YoungFunction + ?Sized)) -> Result<f64> {
    modular_masked(u, phi, None)
}

/// Modular restricted to the cells of `mask` when given.
pub fn modular_masked(
    u: &impl OrliczField,
    phi: &(impl YoungFunction + ?Sized),
    mask: Option<&DomainMask>,
) -> Result<f64> {
    check_cells(phi, u.grid())?;
    let m = masked_magnitudes(u, mask)?;
    Ok(modular_of(&m, phi, 1.0, u.grid().cell_volume()))
}

/// `‖u‖_{L^A} = inf{ρ > 0 : J_A(u/ρ) ≤ 1}`.
pub fn luxemburg_norm(u: &impl OrliczField, phi: &(impl YoungFunction + ?Sized)) -> Result<f64> {
    luxemburg_norm_masked(u, phi, None)
}

/// Luxemburg norm of `u χ_Ω` when a mask is given.
///
/// `λ ↦ ln J(u e^{-λ})` is decreasing with slope between `−q` and `−p`, so a
/// single evaluation brackets the root; a safeguarded Illinois iteration on
/// that function then converges to full precision (one step for powers).
pub fn luxemburg_norm_masked(
    u: &impl OrliczField,
    phi: &(impl YoungFunction + ?Sized),
    mask: Option<&DomainMask>,
) -> Result<f64> {
    check_cells(phi, u.grid())?;
    let m = masked_magnitudes(u, mask)?;
    let top = m.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let vol = u.grid().cell_volume();
    let g = |lambda: f64| modular_of(&m, phi, (-lambda).exp(), vol).ln();
    let growth = phi.growth();

    let l0 = top.ln();
    let g0 = g(l0);
    if g0 == 0.0 {
        return Ok(top);
    }
    // Initial bracket from the slope bounds, widened if they are violated.
    let (mut a, mut b) = if g0.is_finite() {
        let (near, far) = (l0 + g0 / growth.q(), l0 + g0 / growth.p());
        if g0 > 0.0 { (near, far) } else { (far, near) }
    } else {
        (l0, l0)
    };
    let mut ga = g(a);
    let mut gb = g(b);
    let mut k = 0;
    while !(ga > 0.0) {
        a -= std::f64::consts::LN_2 * (1 << k.min(10)) as f64;
        ga = g(a);
        k += 1;
        if k > 2000 {
            return Err(Error::Range("Luxemburg bracket expansion failed".into()));
        }
    }
    k = 0;
    while !(gb < 0.0) {
        if gb == 0.0 {
            return Ok(b.exp());
        }
        b += std::f64::consts::LN_2 * (1 << k.min(10)) as f64;
        gb = g(b);
        k += 1;
        if k > 2000 {
            return Err(Error::Range("Luxemburg bracket expansion failed".into()));
        }
    }
    // Illinois on g(a) > 0 > g(b).
    let mut side = 0i8;
    for _ in 0..200 {
        if !ga.is_finite() || !gb.is_finite() {
            let c = 0.5 * (a + b);
            let gc = g(c);
            if gc > 0.0 { (a, ga) = (c, gc) } else { (b, gb) = (c, gc) }
            continue;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let gc = g(c);
        if gc == 0.0 || (b - a) <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
            return Ok(c.exp());
        }
        if gc > 0.0 {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
        if gc.abs() <= 1e-15 {
            return Ok(c.exp());
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Both displays of the norm–modular relation and the five quantities they involve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormModularBounds {
    /// `min{J^{1/p}, J^{1/q}}`
    pub norm_lower: f64,
    /// `max{J^{1/p}, J^{1/q}}`
    pub norm_upper: f64,
    /// `J + 1`
    pub j_plus_one: f64,
    /// `½ min{‖u‖^p, ‖u‖^q}`
    pub modular_lower: f64,
    /// `2 max{‖u‖^p, ‖u‖^q}`
    pub modular_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormModularReport {
    pub phi: String,
    pub field: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub norm: f64,
    pub bounds: NormModularBounds,
    pub pass: bool,
}

/// Relative slack allowed on each comparison.
const RELATION_TOL: f64 = 1e-9;

/// Checks `min{J^{1/p}, J^{1/q}} ≤ ‖u‖ ≤ max{J^{1/p}, J^{1/q}} ≤ J + 1` and
/// `½ min{‖u‖^p, ‖u‖^q} ≤ J ≤ 2 max{‖u‖^p, ‖u‖^q}`.
pub fn verify_norm_modular(
    u: &impl OrliczField,
    phi: &(impl YoungFunction + ?Sized),
    field: &str,
) -> Result<NormModularReport> {
    let j = modular(u, phi)?;
    let norm = luxemburg_norm(u, phi)?;
    let (p, q) = (phi.growth().p(), phi.growth().q());
    let (jp, jq) = (j.powf(1.0 / p), j.powf(1.0 / q));
    let (np, nq) = (norm.powf(p), norm.powf(q));
    let bounds = NormModularBounds {
        norm_lower: jp.min(jq),
        norm_upper: jp.max(jq),
        j_plus_one: j + 1.0,
        modular_lower: 0.5 * np.min(nq),
        modular_upper: 2.0 * np.max(nq),
    };
    let le = |a: f64, b: f64| a <= b * (1.0 + RELATION_TOL) + f64::MIN_POSITIVE;
    let pass = le(bounds.norm_lower, norm)
        && le(norm, bounds.norm_upper)
        && le(bounds.norm_upper, bounds.j_plus_one)
        && le(bounds.modular_lower, j)
        && le(j, bounds.modular_upper);
    Ok(NormModularReport { phi: phi.label(), field: field.to_string(), j, norm, bounds, pass })
}

/// A functional in `Λ^{-s,A'}` represented by a pair `(f, 𝒇)`.
#[derive(Clone, Debug)]
pub struct DualPairRHS {
    f: GridField,
    fvec: VectorGridField,
    s: f64,
}

impl DualPairRHS {
    /// `f` must vanish outside `mask`; `𝒇` lives on the whole grid.
    pub fn new(f: GridField, fvec: VectorGridField, s: f64, mask: &DomainMask) -> Result<Self> {
        if f.grid() != fvec.grid() || f.grid() != mask.grid() {
            return Err(Error::GridMismatch("f, fvec and the mask must share one grid".into()));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("fractional order must lie in [0, 1], got {s}")));
        }
        if !mask.is_full_torus() {
            let outside = f
                .data()
                .iter()
                .zip(mask.cells())
                .filter(|(_, &inside)| !inside)
                .fold(0.0f64, |acc, (v, _)| acc.max(v.abs()));
            if outside > 0.0 {
                return Err(Error::Constraint(format!("f does not vanish outside the domain (max {outside:e})")));
            }
        }
        Ok(Self { f, fvec, s })
    }

    /// The zero functional.
    pub fn zero(grid: Grid, s: f64) -> Self {
        Self { f: GridField::zeros(grid), fvec: VectorGridField::zeros(grid), s }
    }

    pub fn f(&self) -> &GridField {
        &self.f
    }

    pub fn fvec(&self) -> &VectorGridField {
        &self.fvec
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    /// Same data at another fractional order.
    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }
}

/// `⟨F, g⟩ = ∫ f g + ∫ 𝒇 · D^s g`.
pub fn dual_pairing(rhs: &DualPairRHS, g: &GridField, spectral: &Spectral) -> Result<f64> {
    if g.grid() != rhs.grid() || spectral.grid() != rhs.grid() {
        return Err(Error::GridMismatch("pairing operands live on different grids".into()));
    }
    let dg = spectral.riesz_gradient(g, rhs.s)?;
    Ok(rhs.f.dot(g) + rhs.fvec.dot(&dg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueComparison {
    pub lp: f64,
    pub la: f64,
    pub lq: f64,
    /// `‖u‖_{L^p(Ω)} / ‖u‖_{L^A(Ω)}`
    pub ratio_p_a: f64,
    /// `‖u‖_{L^A(Ω)} / ‖u‖_{L^q(Ω)}`
    pub ratio_a_q: f64,
    pub finite: bool,
}

/// Discrete `L^r(Ω)` norm.
pub fn lebesgue_norm(u: &impl OrliczField, r: f64, mask: Option<&DomainMask>) -> Result<f64> {
    let m = masked_magnitudes(u, mask)?;
    let vol = u.grid().cell_volume();
    Ok((m.iter().map(|v| v.powf(r)).sum::<f64>() * vol).powf(1.0 / r))
}

/// `‖u‖_{L^p(Ω)}`, `‖u‖_{L^A(Ω)}`, `‖u‖_{L^q(Ω)}` and their ratios; ratios of
/// a zero field are reported as 0.
pub fn lebesgue_comparison_report(
    u: &impl OrliczField,
    phi: &(impl YoungFunction + ?Sized),
    mask: &DomainMask,
) -> Result<LebesgueComparison> {
    let g = phi.growth();
    let lp = lebesgue_norm(u, g.p(), Some(mask))?;
    let lq = lebesgue_norm(u, g.q(), Some(mask))?;
    let la = luxemburg_norm_masked(u, phi, Some(mask))?;
    let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let (ratio_p_a, ratio_a_q) = (ratio(lp, la), ratio(la, lq));
    let finite = [lp, la, lq, ratio_p_a, ratio_a_q].iter().all(|v| v.is_finite());
    Ok(LebesgueComparison { lp, la, lq, ratio_p_a, ratio_a_q, finite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::SpatialParam;

    fn grid() -> Grid {
        Grid::new(1, 64, 8.0).unwrap()
    }

    #[test]
    fn modular_of_indicator() {
        let g = grid();
        let u = GridField::from_fn(g, |x| if x[0].abs() < 1.0 { 3.0 } else { 0.0 });
        let m: f64 = u.data().iter().filter(|v| **v != 0.0).count() as f64 * g.cell_volume();
        let p = PhiFunction::power(2.5, 1.0).unwrap();
        assert!((modular(&u, &p).unwrap() - 3f64.powf(2.5) * m).abs() < 1e-12);
        let dp = PhiFunction::double_phase(2.0, 4.0, SpatialParam::Constant(1.0)).unwrap();
        let one = u.scaled(1.0 / 3.0);
        assert!((modular(&one, &dp).unwrap() - 2.0 * m).abs() < 1e-12);
        assert_eq!(modular(&GridField::zeros(g), &dp).unwrap(), 0.0);
    }

    #[test]
    fn power_norm_is_lp() {
        let g = grid();
        let u = GridField::from_fn(g, |x| (x[0] * 1.3).sin() + 0.2);
        for p in [1.5, 2.0, 3.7] {
            let lp = lebesgue_norm(&u, p, None).unwrap();
            let a = PhiFunction::power(p, 1.0).unwrap();
            assert!((luxemburg_norm(&u, &a).unwrap() / lp - 1.0).abs() < 1e-13);
            let b = PhiFunction::power(p, 1.0 / p).unwrap();
            let expected = lp * p.powf(-1.0 / p);
            assert!((luxemburg_norm(&u, &b).unwrap() / expected - 1.0).abs() < 1e-13);
        }
        assert_eq!(luxemburg_norm(&GridField::zeros(g), &PhiFunction::power(2.0, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn unit_ball_and_relations() {
        let g = grid();
        let u = GridField::from_fn(g, |x| 5.0 * (-(x[0] * x[0])).exp());
        let dp = PhiFunction::double_phase(2.0, 4.0, SpatialParam::Constant(0.5)).unwrap();
        let n = luxemburg_norm(&u, &dp).unwrap();
        assert!((modular(&u.scaled(1.0 / n), &dp).unwrap() - 1.0).abs() < 1e-12);
        let rep = verify_norm_modular(&u, &dp, "gaussian").unwrap();
        assert!(rep.pass, "{rep:?}");
        let json = serde_json::to_value(&rep).unwrap();
        for key in ["phi", "field", "J", "norm", "bounds", "pass"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn conjugate_norm_of_quadratic() {
        let g = grid();
        let u = GridField::from_fn(g, |x| x[0].cos());
        let a = PhiFunction::power(2.0, 0.5).unwrap();
        let direct = luxemburg_norm(&u, &a).unwrap();
        let conj = luxemburg_norm(&u, &ConjugatePhi(&a)).unwrap();
        assert!((direct / conj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let u = GridField::zeros(grid());
        let a = PhiFunction::double_phase(2.0, 3.0, SpatialParam::field(vec![1.0; 8])).unwrap();
        assert!(matches!(modular(&u, &a), Err(Error::GridMismatch(_))));
    }
}
