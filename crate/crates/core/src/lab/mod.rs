//! Empirical checks of the fractional inequalities over a test suite.
//!
//! Each inequality `lhs ≤ C · rhs` becomes a ratio `lhs / rhs` recorded per
//! field and parameter; the unknown constant `C` is replaced by a baseline,
//! the largest ratio seen on a reference run, and later runs must stay
//! within [`BASELINE_SLACK`] of it.

mod suite;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::mask::DomainMask;
use crate::orlicz::{luxemburg_norm, luxemburg_norm_masked, ConjugatePhi};
use crate::phi::{build_sobolev_companion, PhiFunction};
use crate::spectral::{GridField, Spectral};
use crate::{Error, Result};

pub use suite::{bump, TestSuite};

/// Relative headroom over a captured baseline.
pub const BASELINE_SLACK: f64 = 0.05;

pub const POINCARE: &str = "poincare";
pub const INTERPOLATION: &str = "interpolation";
pub const SPACES_DECREASE: &str = "spaces-decrease";
pub const SOBOLEV: &str = "sobolev";
pub const MULTIPLIER: &str = "multiplier";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub inequality_id: String,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub sigma: Option<f64>,
    pub field_id: String,
    pub lhs: f64,
    /// Right-hand side without the unknown constant.
    pub rhs: f64,
    pub ratio: f64,
    pub baseline: Option<f64>,
    pub pass: bool,
}

impl InequalityRecord {
    fn new(id: &str, field_id: &str, lhs: f64, rhs: f64) -> Result<Self> {
        let ratio = lhs / rhs;
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(Error::Domain(format!("{id} ratio for {field_id} is {lhs}/{rhs}")));
        }
        Ok(Self {
            inequality_id: id.to_string(),
            r: None,
            s: None,
            t: None,
            sigma: None,
            field_id: field_id.to_string(),
            lhs,
            rhs,
            ratio,
            baseline: None,
            pass: true,
        })
    }
}

/// Per-inequality constants captured from a reference run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Baselines(pub BTreeMap<String, f64>);

impl Baselines {
    /// Largest ratio per inequality id.
    pub fn capture(records: &[InequalityRecord]) -> Self {
        let mut map = BTreeMap::new();
        for rec in records {
            let e = map.entry(rec.inequality_id.clone()).or_insert(0.0f64);
            *e = e.max(rec.ratio);
        }
        Self(map)
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn insert(&mut self, id: impl Into<String>, value: f64) {
        self.0.insert(id.into(), value);
    }

    pub fn merge(&mut self, other: &Baselines) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), *v);
        }
    }

    /// Whether `value` stays within the slack over the baseline for `id`;
    /// ids without a baseline pass.
    pub fn admits(&self, id: &str, value: f64) -> bool {
        self.get(id).is_none_or(|b| value <= b * (1.0 + BASELINE_SLACK))
    }

    /// Stamps every record with its baseline and verdict.
    pub fn apply(&self, records: &mut [InequalityRecord]) {
        for rec in records {
            rec.baseline = self.get(&rec.inequality_id);
            rec.pass = rec.ratio.is_finite() && self.admits(&rec.inequality_id, rec.ratio);
        }
    }

    /// `|other/self − 1|` for every shared id.
    pub fn drift(&self, other: &Baselines) -> BTreeMap<String, f64> {
        self.0
            .iter()
            .filter_map(|(k, &v)| other.get(k).map(|w| (k.clone(), (w / v - 1.0).abs())))
            .collect()
    }
}

/// `D^{s_n} u → D^σ u` along a sequence `s_n → σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityStudy {
    pub sigma: f64,
    pub s_values: Vec<f64>,
    /// `‖D^{s_n} u − D^σ u‖_{L^A}`.
    pub errors: Vec<f64>,
    /// `‖D^σ u‖_{L^A}`.
    pub reference: f64,
    /// Errors never grow as `|s_n − σ|` shrinks.
    pub monotone: bool,
    /// Every error with `|s_n − σ| ≤ 1e-3` is at most `1e-3 · reference`.
    pub small_at_close_range: bool,
    pub pass: bool,
}

/// `σ ± 2^{-n}` for `n = 1..=12`, staying inside `[0, 1]`.
pub fn default_s_sequence(sigma: f64) -> Vec<f64> {
    (1..=12)
        .map(|n| {
            let h = (-(n as f64)).exp2();
            if sigma + h <= 1.0 { sigma + h } else { sigma - h }
        })
        .collect()
}

/// Parameter grids for a full lab run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabParameters {
    pub poincare_s: Vec<f64>,
    /// `(r, s, t)` triples.
    pub interpolation: Vec<(f64, f64, f64)>,
    /// `(σ, s)` pairs.
    pub spaces_decrease: Vec<(f64, f64)>,
    pub sobolev_s: Vec<f64>,
    /// `(s, σ)` pairs.
    pub multiplier: Vec<(f64, f64)>,
}

impl Default for LabParameters {
    fn default() -> Self {
        Self {
            poincare_s: (1..=10).map(|k| k as f64 / 10.0).collect(),
            interpolation: vec![(0.0, 0.5, 1.0), (0.25, 0.5, 0.75), (0.0, 0.25, 0.5), (0.5, 0.75, 1.0)],
            spaces_decrease: vec![(0.1, 0.9), (0.25, 0.5), (0.5, 1.0), (0.3, 0.6)],
            sobolev_s: vec![0.1, 0.2],
            multiplier: vec![(0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.75, 0.25), (1.0, 0.5), (1.0, 1.0)],
        }
    }
}

/// A Φ-function, a domain and the spectral operators on its grid.
#[derive(Debug)]
pub struct Lab {
    spectral: Spectral,
    phi: PhiFunction,
    mask: DomainMask,
    scales: Vec<f64>,
    chi_conjugate_norm: OnceLock<f64>,
}

impl Lab {
    pub fn new(phi: PhiFunction, mask: DomainMask) -> Result<Self> {
        if let Some(n) = phi.cells() {
            if n != mask.grid().len() {
                return Err(Error::GridMismatch(format!(
                    "Φ-function covers {n} cells, grid has {}",
                    mask.grid().len()
                )));
            }
        }
        Ok(Self {
            spectral: Spectral::new(*mask.grid()),
            phi,
            mask,
            scales: vec![1.0, 10.0],
            chi_conjugate_norm: OnceLock::new(),
        })
    }

    /// Amplitudes at which every record is evaluated (default `{1, 10}`).
    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn phi(&self) -> &PhiFunction {
        &self.phi
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    fn grad_norm(&self, u: &GridField, s: f64) -> Result<f64> {
        let du = self.spectral.riesz_gradient(u, s)?;
        luxemburg_norm(&du, &self.phi)
    }

    fn check_member(&self, u: &GridField) -> Result<()> {
        self.mask.check(u)?;
        if u.max_abs() == 0.0 {
            return Err(Error::Domain("the zero field has no meaningful ratio".into()));
        }
        Ok(())
    }

    /// `‖u‖_{L^A(Ω)} ≤ C/(1 − 2^{-s}) ‖D^s u‖_{L^A}`: one record per
    /// member, order and amplitude.
    pub fn poincare_sweep(&self, suite: &TestSuite, s_grid: &[f64]) -> Result<Vec<InequalityRecord>> {
        if let Some(&s) = s_grid.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::Domain(format!("Poincaré order must lie in (0, 1], got {s}")));
        }
        let mut out = Vec::new();
        for (id, u0) in suite.members() {
            for &lam in &self.scales {
                let u = u0.scaled(lam);
                self.check_member(&u)?;
                let lhs = luxemburg_norm_masked(&u, &self.phi, Some(&self.mask))?;
                for &s in s_grid {
                    let rhs = self.grad_norm(&u, s)? / (1.0 - (-s).exp2());
                    let mut rec = InequalityRecord::new(POINCARE, &scaled_id(id, lam), lhs, rhs)?;
                    rec.s = Some(s);
                    out.push(rec);
                }
            }
        }
        Ok(out)
    }

    /// `‖D^s u‖ ≤ C ‖D^r u‖^{(t−s)/(t−r)} ‖D^t u‖^{(s−r)/(t−r)}`.
    pub fn interpolation_check(&self, u: &GridField, field_id: &str, r: f64, s: f64, t: f64) -> Result<InequalityRecord> {
        if !(0.0 <= r && r <= s && s <= t && t <= 1.0) {
            return Err(Error::Domain(format!("interpolation needs 0 <= r <= s <= t <= 1, got ({r}, {s}, {t})")));
        }
        self.check_member(u)?;
        let ns = self.grad_norm(u, s)?;
        let rhs = if t == r {
            ns
        } else {
            let theta = (t - s) / (t - r);
            let nr = if r == s { ns } else { self.grad_norm(u, r)? };
            let nt = if t == s { ns } else { self.grad_norm(u, t)? };
            nr.powf(theta) * nt.powf(1.0 - theta)
        };
        let mut rec = InequalityRecord::new(INTERPOLATION, field_id, ns, rhs)?;
        (rec.r, rec.s, rec.t) = (Some(r), Some(s), Some(t));
        Ok(rec)
    }

    /// `‖χ_Ω‖_{L^{A'}}`, computed once.
    pub fn chi_conjugate_norm(&self) -> Result<f64> {
        if let Some(v) = self.chi_conjugate_norm.get() {
            return Ok(*v);
        }
        let v = luxemburg_norm(&self.mask.indicator(), &ConjugatePhi(&self.phi))?;
        Ok(*self.chi_conjugate_norm.get_or_init(|| v))
    }

    /// `(1/(d−1+σ))(1 + 1/(1−2^{-σ})) + (1/σ) ‖χ_Ω‖_{L^{A'}} / (1−2^{-σ})`.
    pub fn spaces_decrease_shape(&self, sigma: f64) -> Result<f64> {
        let d = self.mask.grid().dim() as f64;
        let k = 1.0 / (1.0 - (-sigma).exp2());
        Ok((1.0 + k) / (d - 1.0 + sigma) + self.chi_conjugate_norm()? * k / sigma)
    }

    /// `‖D^σ u‖ ≤ C · shape(σ) · ‖D^s u‖` for `0 < σ < s ≤ 1`.
    pub fn spaces_decrease_check(&self, u: &GridField, field_id: &str, sigma: f64, s: f64) -> Result<InequalityRecord> {
        if !(0.0 < sigma && sigma < s && s <= 1.0) {
            return Err(Error::Domain(format!("spaces decrease needs 0 < sigma < s <= 1, got ({sigma}, {s})")));
        }
        self.check_member(u)?;
        let lhs = self.grad_norm(u, sigma)?;
        let rhs = self.spaces_decrease_shape(sigma)? * self.grad_norm(u, s)?;
        let mut rec = InequalityRecord::new(SPACES_DECREASE, field_id, lhs, rhs)?;
        (rec.s, rec.sigma) = (Some(s), Some(sigma));
        Ok(rec)
    }

    /// Companion `B` for order `s`, i.e. with `γ = s/d`.
    pub fn sobolev_companion(&self, s: f64) -> Result<PhiFunction> {
        build_sobolev_companion(&self.phi, s / self.mask.grid().dim() as f64)
    }

    /// `‖u‖_{L^B(Ω)} ≤ C ‖D^s u‖_{L^A}` with `B` the companion of `A`.
    pub fn sobolev_check(&self, u: &GridField, field_id: &str, s: f64) -> Result<InequalityRecord> {
        let b = self.sobolev_companion(s)?;
        self.sobolev_check_with(u, field_id, s, &b)
    }

    /// As [`Lab::sobolev_check`] with a prebuilt companion.
    pub fn sobolev_check_with(&self, u: &GridField, field_id: &str, s: f64, companion: &PhiFunction) -> Result<InequalityRecord> {
        self.check_member(u)?;
        let lhs = luxemburg_norm_masked(u, companion, Some(&self.mask))?;
        let rhs = self.grad_norm(u, s)?;
        let mut rec = InequalityRecord::new(SOBOLEV, field_id, lhs, rhs)?;
        rec.s = Some(s);
        Ok(rec)
    }

    /// `‖D^{s_n} u − D^σ u‖_{L^A}` along `s_values`.
    pub fn s_continuity_study(&self, u: &GridField, sigma: f64, s_values: &[f64]) -> Result<ContinuityStudy> {
        let base = self.spectral.riesz_gradient(u, sigma)?;
        let reference = luxemburg_norm(&base, &self.phi)?;
        let errors = s_values
            .iter()
            .map(|&s| {
                let du = self.spectral.riesz_gradient(u, s)?;
                luxemburg_norm(&du.sub(&base), &self.phi)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut order: Vec<usize> = (0..s_values.len()).collect();
        order.sort_by(|&a, &b| (s_values[b] - sigma).abs().total_cmp(&(s_values[a] - sigma).abs()));
        let monotone = order
            .windows(2)
            .all(|w| errors[w[1]] <= errors[w[0]] * (1.0 + 1e-9) + 1e-14 * reference);
        let small_at_close_range = s_values
            .iter()
            .zip(&errors)
            .filter(|(s, _)| (*s - sigma).abs() <= 1e-3)
            .all(|(_, e)| *e <= 1e-3 * reference);
        Ok(ContinuityStudy {
            sigma,
            s_values: s_values.to_vec(),
            errors,
            reference,
            monotone,
            small_at_close_range,
            pass: monotone && small_at_close_range,
        })
    }

    /// `‖T_{s,σ} v‖_{L^A} / ‖v‖_{L^A}` for the symbol `|ξ|^σ / (1 + |ξ|^s)`.
    pub fn multiplier_boundedness(&self, v: &GridField, field_id: &str, s: f64, sigma: f64) -> Result<InequalityRecord> {
        if !(0.0 <= sigma && sigma <= s && s <= 1.0) {
            return Err(Error::Domain(format!("multiplier needs 0 <= sigma <= s <= 1, got ({s}, {sigma})")));
        }
        let tv = self.spectral.interpolation_multiplier(v, s, sigma)?;
        let lhs = luxemburg_norm(&tv, &self.phi)?;
        let rhs = luxemburg_norm(v, &self.phi)?;
        let mut rec = InequalityRecord::new(MULTIPLIER, field_id, lhs, rhs)?;
        (rec.s, rec.sigma) = (Some(s), Some(sigma));
        Ok(rec)
    }

    /// Every check over the whole suite at every amplitude. Sobolev orders
    /// with `s/d ≥ 1/q` have no companion and are skipped.
    pub fn run(&self, suite: &TestSuite, params: &LabParameters) -> Result<Vec<InequalityRecord>> {
        let mut out = self.poincare_sweep(suite, &params.poincare_s)?;
        let d = self.mask.grid().dim() as f64;
        let companions: Vec<(f64, PhiFunction)> = params
            .sobolev_s
            .iter()
            .filter(|&&s| s / d < 1.0 / self.phi.growth().q())
            .map(|&s| Ok((s, self.sobolev_companion(s)?)))
            .collect::<Result<_>>()?;
        for (id, u0) in suite.members() {
            for &lam in &self.scales {
                let u = u0.scaled(lam);
                let fid = scaled_id(id, lam);
                for &(r, s, t) in &params.interpolation {
                    out.push(self.interpolation_check(&u, &fid, r, s, t)?);
                }
                for &(sigma, s) in &params.spaces_decrease {
                    out.push(self.spaces_decrease_check(&u, &fid, sigma, s)?);
                }
                for (s, b) in &companions {
                    out.push(self.sobolev_check_with(&u, &fid, *s, b)?);
                }
                for &(s, sigma) in &params.multiplier {
                    out.push(self.multiplier_boundedness(&u, &fid, s, sigma)?);
                }
            }
        }
        Ok(out)
    }
}

fn scaled_id(id: &str, lam: f64) -> String {
    if lam == 1.0 {
        id.to_string()
    } else {
        format!("{id}@x{lam}")
    }
}
