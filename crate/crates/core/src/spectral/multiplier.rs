use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Grid, GridField, VectorGridField};
use crate::{Error, Result};

/// Frequency-domain symbol of a Fourier multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolKind {
    /// `i ξ |ξ|^{s-1}`, scalar in, vector out.
    RieszGradient { s: f64 },
    /// `i ξ · V̂ |ξ|^{s-1}`, vector in, scalar out.
    RieszDivergence { s: f64 },
    /// `|ξ|^{-s}`.
    RieszPotential { s: f64 },
    /// `-i ξ / |ξ|`, scalar in, vector out.
    RieszTransform,
    /// `|ξ|^{2σ}`.
    FracLaplacian { sigma: f64 },
    /// `|ξ|^σ / (1 + |ξ|^s)`.
    InterpolationSymbol { s: f64, sigma: f64 },
}

/// What happens to the `ξ = 0` mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMode {
    Zero,
    Reject,
    Preserve,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMultiplier {
    pub kind: SymbolKind,
    pub zero_mode: ZeroMode,
}

impl SpectralMultiplier {
    /// Multiplier with the default zero-mode policy of its kind.
    pub fn new(kind: SymbolKind) -> Result<Self> {
        let zero_mode = match kind {
            SymbolKind::RieszPotential { .. } => ZeroMode::Reject,
            SymbolKind::InterpolationSymbol { sigma: 0.0, .. } => ZeroMode::Preserve,
            _ => ZeroMode::Zero,
        };
        Self::with_zero_mode(kind, zero_mode)
    }

    pub fn with_zero_mode(kind: SymbolKind, zero_mode: ZeroMode) -> Result<Self> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match kind {
            SymbolKind::RieszGradient { s } | SymbolKind::RieszDivergence { s } => in_unit(s),
            SymbolKind::RieszPotential { s } => s > 0.0 && s < 2.0,
            SymbolKind::RieszTransform => true,
            SymbolKind::FracLaplacian { sigma } => in_unit(sigma),
            SymbolKind::InterpolationSymbol { s, sigma } => in_unit(s) && in_unit(sigma) && sigma <= s,
        };
        if !ok {
            return Err(Error::Domain(format!("order parameters out of range for {kind:?}")));
        }
        let vector_valued = matches!(
            kind,
            SymbolKind::RieszGradient { .. }
                | SymbolKind::RieszDivergence { .. }
                | SymbolKind::RieszTransform
        );
        if vector_valued && zero_mode == ZeroMode::Preserve {
            return Err(Error::Config(format!("{kind:?} cannot preserve the zero mode")));
        }
        Ok(Self { kind, zero_mode })
    }
}

/// Borrowed operand of [`Spectral::apply`].
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Scalar(&'a GridField),
    Vector(&'a VectorGridField),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Scalar(GridField),
    Vector(VectorGridField),
}

impl FieldValue {
    pub fn into_scalar(self) -> Option<GridField> {
        match self {
            FieldValue::Scalar(f) => Some(f),
            FieldValue::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<VectorGridField> {
        match self {
            FieldValue::Vector(v) => Some(v),
            FieldValue::Scalar(_) => None,
        }
    }
}

/// FFT plans and frequency tables for one grid.
///
/// Conventions: `ξ = 2πk/L` with `k ∈ [-n/2, n/2)`. Odd (vector) symbols use
/// a frequency whose Nyquist component is set to zero so that real inputs map
/// to real outputs; `|ξ|` always uses the full frequency.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Physical frequency per FFT bin.
    xi: Vec<f64>,
    /// Same, with the Nyquist bin zeroed.
    xi_odd: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

const MEAN_TOL: f64 = 1e-10;

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let xi: Vec<f64> = (0..n).map(|i| grid.frequency(i)).collect();
        let xi_odd = (0..n)
            .map(|i| if grid.is_nyquist(i) { 0.0 } else { xi[i] })
            .collect();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            xi,
            xi_odd,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.grid.n();
        plan.process(buf);
        if self.grid.dim() == 2 {
            transpose_square(buf, n);
            plan.process(buf);
            transpose_square(buf, n);
        }
    }

    pub(crate) fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    pub(crate) fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut buf, true);
        let scale = 1.0 / self.grid.len() as f64;
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Calls `f(bin, ξ_full, ξ_odd, |ξ|)` for every FFT bin.
    fn for_each_bin(&self, mut f: impl FnMut(usize, [f64; 2], [f64; 2], f64)) {
        let n = self.grid.n();
        match self.grid.dim() {
            1 => {
                for i in 0..n {
                    let x = [self.xi[i], 0.0];
                    f(i, x, [self.xi_odd[i], 0.0], self.xi[i].abs());
                }
            }
            _ => {
                for i0 in 0..n {
                    for i1 in 0..n {
                        let x = [self.xi[i0], self.xi[i1]];
                        let mag = x[0].hypot(x[1]);
                        f(i0 * n + i1, x, [self.xi_odd[i0], self.xi_odd[i1]], mag);
                    }
                }
            }
        }
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        self.grid.check_same(g)
    }

    fn check_mean(&self, u: &GridField, zero_mode: ZeroMode) -> Result<()> {
        if zero_mode == ZeroMode::Reject {
            let mean = u.mean();
            if mean.abs() > MEAN_TOL * u.max_abs().max(f64::MIN_POSITIVE) {
                return Err(Error::MeanZero { mean });
            }
        }
        Ok(())
    }

    /// Scalar-to-scalar multiplier with a radial real symbol `m(|ξ|)`.
    fn radial(&self, u: &GridField, m: impl Fn(f64) -> f64, zero: ZeroMode) -> Result<GridField> {
        self.check_grid(u.grid())?;
        self.check_mean(u, zero)?;
        let mut hat = self.forward(u.data());
        self.for_each_bin(|i, _, _, mag| {
            if mag == 0.0 {
                if zero != ZeroMode::Preserve {
                    hat[i] = Complex64::new(0.0, 0.0);
                }
            } else {
                hat[i] *= m(mag);
            }
        });
        Ok(GridField::from_raw(self.grid, self.inverse_real(hat)))
    }

    /// Radial real symbol `m(|ξ|)` applied to every bin, the zero mode included.
    pub(crate) fn filter(&self, u: &GridField, m: impl Fn(f64) -> f64) -> Result<GridField> {
        self.check_grid(u.grid())?;
        let mut hat = self.forward(u.data());
        self.for_each_bin(|i, _, _, mag| hat[i] *= m(mag));
        Ok(GridField::from_raw(self.grid, self.inverse_real(hat)))
    }

    /// Scalar to vector with symbol `i ξ_j g(|ξ|)`; zero mode mapped to 0.
    fn gradient_like(&self, u: &GridField, g: impl Fn(f64) -> f64) -> Result<VectorGridField> {
        self.check_grid(u.grid())?;
        let hat = self.forward(u.data());
        let d = self.grid.dim();
        let mut comps = Vec::with_capacity(d);
        for j in 0..d {
            let mut out = vec![Complex64::new(0.0, 0.0); hat.len()];
            self.for_each_bin(|i, _, odd, mag| {
                if mag > 0.0 {
                    out[i] = hat[i] * Complex64::new(0.0, odd[j] * g(mag));
                }
            });
            comps.push(self.inverse_real(out));
        }
        Ok(VectorGridField::from_raw(self.grid, comps))
    }

    /// Vector to scalar with symbol `Σ_j i ξ_j g(|ξ|) V̂_j`; zero mode mapped to 0.
    fn divergence_like(&self, v: &VectorGridField, g: impl Fn(f64) -> f64) -> Result<GridField> {
        self.check_grid(v.grid())?;
        let hats: Vec<Vec<Complex64>> = v.components().iter().map(|c| self.forward(c)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.for_each_bin(|i, _, odd, mag| {
            if mag > 0.0 {
                let gm = g(mag);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, h) in hats.iter().enumerate() {
                    acc += h[i] * Complex64::new(0.0, odd[j] * gm);
                }
                out[i] = acc;
            }
        });
        Ok(GridField::from_raw(self.grid, self.inverse_real(out)))
    }

    /// Applies any multiplier; the operand shape must match the symbol kind.
    pub fn apply(&self, m: &SpectralMultiplier, input: FieldRef<'_>) -> Result<FieldValue> {
        let shape_err = || Error::Domain(format!("operand shape does not match {:?}", m.kind));
        match (m.kind, input) {
            (SymbolKind::RieszGradient { s }, FieldRef::Scalar(u)) => {
                self.gradient_like(u, |r| r.powf(s - 1.0)).map(FieldValue::Vector)
            }
            (SymbolKind::RieszTransform, FieldRef::Scalar(u)) => {
                self.gradient_like(u, |r| -1.0 / r).map(FieldValue::Vector)
            }
            (SymbolKind::RieszDivergence { s }, FieldRef::Vector(v)) => {
                self.divergence_like(v, |r| r.powf(s - 1.0)).map(FieldValue::Scalar)
            }
            (SymbolKind::RieszPotential { s }, FieldRef::Scalar(u)) => {
                self.radial(u, |r| r.powf(-s), m.zero_mode).map(FieldValue::Scalar)
            }
            (SymbolKind::FracLaplacian { sigma }, FieldRef::Scalar(u)) => {
                self.radial(u, |r| r.powf(2.0 * sigma), m.zero_mode).map(FieldValue::Scalar)
            }
            (SymbolKind::InterpolationSymbol { s, sigma }, FieldRef::Scalar(u)) => self
                .radial(u, |r| r.powf(sigma) / (1.0 + r.powf(s)), m.zero_mode)
                .map(FieldValue::Scalar),
            _ => Err(shape_err()),
        }
    }

    /// Riesz fractional gradient `D^s u = D(I_{1-s} u)`, `s ∈ [0, 1]`.
    pub fn riesz_gradient(&self, u: &GridField, s: f64) -> Result<VectorGridField> {
        check_unit(s, "riesz_gradient")?;
        self.gradient_like(u, |r| r.powf(s - 1.0))
    }

    /// Fractional divergence `D^s · V`, `s ∈ [0, 1]`.
    pub fn riesz_divergence(&self, v: &VectorGridField, s: f64) -> Result<GridField> {
        check_unit(s, "riesz_divergence")?;
        self.divergence_like(v, |r| r.powf(s - 1.0))
    }

    /// Riesz potential `I_s` with the default "reject" zero-mode policy.
    pub fn riesz_potential(&self, u: &GridField, s: f64) -> Result<GridField> {
        self.riesz_potential_with(u, s, ZeroMode::Reject)
    }

    pub fn riesz_potential_with(&self, u: &GridField, s: f64, zero: ZeroMode) -> Result<GridField> {
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::Domain(format!("riesz_potential order {s} not in (0, 2)")));
        }
        self.radial(u, |r| r.powf(-s), zero)
    }

    /// Componentwise Riesz potential of a vector field.
    pub fn riesz_potential_vector(&self, v: &VectorGridField, s: f64) -> Result<VectorGridField> {
        let comps = v
            .components()
            .iter()
            .map(|c| Ok(self.riesz_potential(&GridField::from_raw(self.grid, c.clone()), s)?.into_data()))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorGridField::from_raw(self.grid, comps))
    }

    /// Vector Riesz transform, symbol `-i ξ/|ξ|`.
    pub fn riesz_transform(&self, u: &GridField) -> Result<VectorGridField> {
        self.gradient_like(u, |r| -1.0 / r)
    }

    /// Scalar Riesz transform of a vector field, `R · V`.
    pub fn riesz_transform_div(&self, v: &VectorGridField) -> Result<GridField> {
        self.divergence_like(v, |r| -1.0 / r)
    }

    /// `(-Δ)^σ`, symbol `|ξ|^{2σ}`.
    pub fn frac_laplacian(&self, u: &GridField, sigma: f64) -> Result<GridField> {
        check_unit(sigma, "frac_laplacian")?;
        self.radial(u, |r| r.powf(2.0 * sigma), ZeroMode::Zero)
    }

    /// Interpolation multiplier `|ξ|^σ / (1 + |ξ|^s)` with `0 ≤ σ ≤ s ≤ 1`.
    pub fn interpolation_multiplier(&self, v: &GridField, s: f64, sigma: f64) -> Result<GridField> {
        let m = SpectralMultiplier::new(SymbolKind::InterpolationSymbol { s, sigma })?;
        Ok(self.apply(&m, FieldRef::Scalar(v))?.into_scalar().expect("scalar symbol"))
    }

    /// Spectral classical gradient, `i ξ`.
    pub fn classical_gradient(&self, u: &GridField) -> Result<VectorGridField> {
        self.gradient_like(u, |_| 1.0)
    }

    /// Removes the mean and all Nyquist-bin content: the subspace on which
    /// every identity of the symbol algebra holds exactly.
    pub fn project_resolved(&self, u: &GridField) -> Result<GridField> {
        self.check_grid(u.grid())?;
        let mut hat = self.forward(u.data());
        for (idx, h) in hat.iter_mut().enumerate() {
            let [i0, i1] = self.grid.unravel(idx);
            let nyq = self.grid.is_nyquist(i0) || (self.grid.dim() == 2 && self.grid.is_nyquist(i1));
            if idx == 0 || nyq {
                *h = Complex64::new(0.0, 0.0);
            }
        }
        Ok(GridField::from_raw(self.grid, self.inverse_real(hat)))
    }
}

fn check_unit(s: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what}: order {s} not in [0, 1]")))
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
