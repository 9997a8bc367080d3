//! Sobolev companion `B` of a Φ-function `A`, defined through
//! `B^{-1}(x, t) = t^{-γ} A^{-1}(x, t)`.
//!
//! `ln B^{-1}` is tabulated against `ln t` on a geometric ladder and inverted
//! by monotone piecewise-linear interpolation in log-log coordinates, which
//! is exact for power laws. Outside the ladder the end slopes are extended.

use std::collections::HashMap;
use std::sync::Arc;

use super::{left_inverse, Family, GrowthExponents, PhiFunction};
use crate::{Error, Result};

const OCTAVES: i32 = 40;
const STEPS_PER_OCTAVE: i32 = 4;

/// One log-log table: `ln t_k` and `ln B^{-1}(t_k)`, both increasing.
#[derive(Clone, Debug)]
struct Table {
    ln_t: Vec<f64>,
    ln_inv: Vec<f64>,
}

impl Table {
    fn build(phi: &PhiFunction, x: usize, gamma: f64) -> Result<Self> {
        let n = 2 * OCTAVES * STEPS_PER_OCTAVE + 1;
        let mut ln_t = Vec::with_capacity(n as usize);
        let mut ln_inv = Vec::with_capacity(n as usize);
        for k in -OCTAVES * STEPS_PER_OCTAVE..=OCTAVES * STEPS_PER_OCTAVE {
            let lt = (k as f64 / STEPS_PER_OCTAVE as f64) * std::f64::consts::LN_2;
            let inv = left_inverse(phi, x, lt.exp())?;
            ln_t.push(lt);
            ln_inv.push(inv.ln() - gamma * lt);
        }
        if ln_inv.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(format!(
                "t^(-{gamma}) A^(-1)(t) is not increasing; the companion is undefined"
            )));
        }
        Ok(Self { ln_t, ln_inv })
    }

    /// Segment index and slope `d ln t / d ln B^{-1}` for the abscissa `u = ln ℓ`.
    fn locate(&self, u: f64) -> (usize, f64) {
        let n = self.ln_inv.len();
        let i = match self.ln_inv.partition_point(|&v| v <= u) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let slope = (self.ln_t[i + 1] - self.ln_t[i]) / (self.ln_inv[i + 1] - self.ln_inv[i]);
        (i, slope)
    }

    /// `(ln B(ℓ), d ln B / d ln ℓ)`.
    fn eval(&self, ell: f64) -> (f64, f64) {
        let u = ell.ln();
        let (i, slope) = self.locate(u);
        (self.ln_t[i] + slope * (u - self.ln_inv[i]), slope)
    }

    fn inverse(&self, t: f64) -> f64 {
        let v = t.ln();
        let n = self.ln_t.len();
        let i = match self.ln_t.partition_point(|&s| s <= v) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let slope = (self.ln_inv[i + 1] - self.ln_inv[i]) / (self.ln_t[i + 1] - self.ln_t[i]);
        (self.ln_inv[i] + slope * (v - self.ln_t[i])).exp()
    }
}

/// Tabulated companion; cells sharing the same parameters share one table.
#[derive(Clone, Debug)]
pub struct Companion {
    gamma: f64,
    base: String,
    tables: Vec<Table>,
    cell_table: Option<Arc<[u32]>>,
}

impl Companion {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn base_label(&self) -> &str {
        &self.base
    }

    pub fn cells(&self) -> Option<usize> {
        self.cell_table.as_ref().map(|c| c.len())
    }

    fn table(&self, x: usize) -> &Table {
        match &self.cell_table {
            Some(map) => &self.tables[map[x] as usize],
            None => &self.tables[0],
        }
    }

    pub(crate) fn value(&self, x: usize, ell: f64) -> f64 {
        if ell == 0.0 {
            return 0.0;
        }
        self.table(x).eval(ell).0.exp()
    }

    /// `b(r) = B'(r) / r = B(r) · (d ln B / d ln r) / r²`.
    pub(crate) fn density(&self, x: usize, r: f64) -> f64 {
        let (ln_b, slope) = self.table(x).eval(r);
        (ln_b - 2.0 * r.ln()).exp() * slope
    }

    /// `B^{-1}(x, t)` read straight from the table.
    pub(crate) fn inverse(&self, x: usize, t: f64) -> f64 {
        self.table(x).inverse(t)
    }
}

/// Parameter fingerprint of cell `x`; cells with equal keys share a table.
fn cell_key(phi: &PhiFunction, x: usize) -> Vec<u64> {
    match phi.family() {
        Family::Power { .. } => Vec::new(),
        Family::VariableExponent { alpha, exponent } => vec![alpha.at(x).to_bits(), exponent.at(x).to_bits()],
        Family::LogPerturbed { exponent } => vec![exponent.at(x).to_bits()],
        Family::DoublePhase { alpha, .. } => vec![alpha.at(x).to_bits()],
        Family::Tabulated(_) | Family::Custom(_) => vec![x as u64],
    }
}

/// Companion `B` with `B^{-1}(x, t) = t^{-γ} A^{-1}(x, t)`.
///
/// If `A` is `(Inc)_p` and `(Dec)_q` then `B` is `(Inc)_{p*}` and `(Dec)_{q*}`
/// with `1/p* = 1/p − γ` and `1/q* = 1/q − γ`; this needs `γ < 1/q`.
pub fn build_sobolev_companion(phi: &PhiFunction, gamma: f64) -> Result<PhiFunction> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("companion exponent must lie in (0, 1), got {gamma}")));
    }
    let g = phi.growth();
    if !(1.0 / g.q() > gamma) {
        return Err(Error::Domain(format!(
            "companion needs gamma < 1/q = {}, got {gamma}",
            1.0 / g.q()
        )));
    }
    let growth = GrowthExponents::new(1.0 / (1.0 / g.p() - gamma), 1.0 / (1.0 / g.q() - gamma))?;

    let (tables, cell_table) = match phi.cells() {
        None => (vec![Table::build(phi, 0, gamma)?], None),
        Some(n) => {
            let mut index: HashMap<Vec<u64>, u32> = HashMap::new();
            let mut tables = Vec::new();
            let mut map = Vec::with_capacity(n);
            for x in 0..n {
                let key = cell_key(phi, x);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = tables.len() as u32;
                        tables.push(Table::build(phi, x, gamma)?);
                        index.insert(key, id);
                        id
                    }
                };
                map.push(id);
            }
            (tables, Some(map.into()))
        }
    };
    let companion = Companion { gamma, base: phi.label().to_string(), tables, cell_table };
    let label = format!("sobolev-companion(gamma={gamma}) of {}", phi.label());
    Ok(PhiFunction::new(Family::Tabulated(Arc::new(companion)), growth, label))
}
