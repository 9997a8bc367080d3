//! Bounded domains `Ω` as cell masks.

use crate::spectral::{Grid, GridField};
use crate::{Error, Result};

/// Indicator of `Ω` on a grid.
///
/// A regular mask is nonempty, has a nonempty complement and lies strictly
/// inside the central half of the box. [`DomainMask::full_torus`] is the
/// one exception: the whole periodic box, where the constraint becomes
/// "mean zero" instead of "zero outside Ω".
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    count: usize,
    full: bool,
}

impl DomainMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "mask has {} cells, grid has {}",
                inside.len(),
                grid.len()
            )));
        }
        let count = inside.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::Config("domain mask is empty".into()));
        }
        if count == grid.len() {
            return Err(Error::Config(
                "domain mask covers the whole box; use DomainMask::full_torus".into(),
            ));
        }
        let quarter = 0.25 * grid.length();
        for (idx, _) in inside.iter().enumerate().filter(|(_, &b)| b) {
            let p = grid.point(idx);
            if p[..grid.dim()].iter().any(|x| x.abs() >= quarter) {
                return Err(Error::Config(format!(
                    "domain mask cell {idx} lies outside the central half of the box"
                )));
            }
        }
        Ok(Self { grid, inside, count, full: false })
    }

    /// The whole torus, restricted to the mean-zero sector.
    pub fn full_torus(grid: Grid) -> Self {
        Self { grid, inside: vec![true; grid.len()], count: grid.len(), full: true }
    }

    /// Euclidean ball `|x - center| < radius`.
    pub fn ball(grid: Grid, center: [f64; 2], radius: f64) -> Result<Self> {
        let inside = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                let d2: f64 = (0..grid.dim()).map(|k| (p[k] - center[k]).powi(2)).sum();
                d2 < radius * radius
            })
            .collect();
        Self::new(grid, inside)
    }

    /// Cells where `field` is nonzero.
    pub fn from_field(field: &GridField) -> Result<Self> {
        Self::new(*field.grid(), field.data().iter().map(|&v| v != 0.0).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn cells(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_full_torus(&self) -> bool {
        self.full
    }

    /// Lebesgue measure of `Ω` (cell count times cell volume).
    pub fn measure(&self) -> f64 {
        self.count as f64 * self.grid.cell_volume()
    }

    /// Orthogonal projection onto the constraint subspace.
    pub fn project(&self, u: &GridField) -> GridField {
        if self.full {
            return u.mean_free();
        }
        let mut out = u.clone();
        for (v, &inside) in out.data_mut().iter_mut().zip(&self.inside) {
            if !inside {
                *v = 0.0;
            }
        }
        out
    }

    pub fn project_in_place(&self, u: &mut GridField) {
        if self.full {
            let m = u.mean();
            u.data_mut().iter_mut().for_each(|v| *v -= m);
        } else {
            for (v, &inside) in u.data_mut().iter_mut().zip(&self.inside) {
                if !inside {
                    *v = 0.0;
                }
            }
        }
    }

    /// Largest deviation of `u` from the constraint set.
    pub fn violation(&self, u: &GridField) -> f64 {
        if self.full {
            return u.mean().abs();
        }
        u.data()
            .iter()
            .zip(&self.inside)
            .filter(|(_, &inside)| !inside)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }

    /// Fails with a constraint error unless `u` vanishes outside `Ω`.
    pub fn check(&self, u: &GridField) -> Result<()> {
        self.grid.check_same(u.grid())?;
        let v = self.violation(u);
        let tol = 1e-12 * u.max_abs().max(1.0);
        if v > tol {
            return Err(Error::Constraint(format!("field violates the domain constraint by {v:e}")));
        }
        Ok(())
    }

    /// Indicator function `χ_Ω` as a field.
    pub fn indicator(&self) -> GridField {
        let data = self.inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GridField::from_raw(self.grid, data)
    }
}
