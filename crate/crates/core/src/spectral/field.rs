use super::Grid;
use crate::{Error, Result};

/// Real samples of a scalar function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: Grid,
    data: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at cell {i}")));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, data: vec![value; grid.len()] }
    }

    /// Samples `f` at every cell position (`[x, 0]` in 1D).
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, data }
    }

    /// Unchecked constructor for internal results that are finite by construction.
    pub(crate) fn from_raw(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell-weighted L² inner product.
    pub fn dot(&self, other: &GridField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> GridField {
        Self::from_raw(self.grid, self.data.iter().map(|v| factor * v).collect())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &GridField) -> GridField {
        Self::from_raw(
            self.grid,
            self.data.iter().zip(&other.data).map(|(a, b)| a + factor * b).collect(),
        )
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.add_scaled(-1.0, other)
    }

    pub fn axpy(&mut self, factor: f64, other: &GridField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        Self::from_raw(self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.abs()).collect()
    }

    /// Field minus its mean.
    pub fn mean_free(&self) -> GridField {
        let m = self.mean();
        self.map(|v| v - m)
    }
}

/// `d` scalar components sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGridField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorGridField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component has {} samples, grid has {}",
                    c.len(),
                    grid.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("non-finite sample in vector field".into()));
            }
        }
        Ok(Self { grid, components })
    }

    pub fn from_components(fields: Vec<GridField>) -> Result<Self> {
        let grid = *fields
            .first()
            .ok_or_else(|| Error::GridMismatch("no components".into()))?
            .grid();
        for f in &fields {
            grid.check_same(f.grid())?;
        }
        Self::new(grid, fields.into_iter().map(GridField::into_data).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, components: vec![vec![0.0; grid.len()]; grid.dim()] }
    }

    pub(crate) fn from_raw(grid: Grid, components: Vec<Vec<f64>>) -> Self {
        Self { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, j: usize) -> GridField {
        GridField::from_raw(self.grid, self.components[j].clone())
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    /// Euclidean magnitude at cell `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        match self.components.len() {
            1 => self.components[0][i].abs(),
            _ => self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt(),
        }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.magnitude(i)).collect()
    }

    pub fn dot(&self, other: &VectorGridField) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            acc += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        acc * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> VectorGridField {
        Self::from_raw(
            self.grid,
            self.components.iter().map(|c| c.iter().map(|v| factor * v).collect()).collect(),
        )
    }

    pub fn add_scaled(&self, factor: f64, other: &VectorGridField) -> VectorGridField {
        Self::from_raw(
            self.grid,
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + factor * y).collect())
                .collect(),
        )
    }

    pub fn sub(&self, other: &VectorGridField) -> VectorGridField {
        self.add_scaled(-1.0, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(GridField::new(g, vec![0.0; 7]).is_err());
        let mut d = vec![0.0; 8];
        d[3] = f64::NAN;
        assert!(matches!(GridField::new(g, d), Err(Error::Domain(_))));
    }

    #[test]
    fn vector_magnitude_is_euclidean() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let v = VectorGridField::new(g, vec![vec![3.0; 64], vec![4.0; 64]]).unwrap();
        assert_eq!(v.magnitude(10), 5.0);
        assert!((v.l2_norm() - 5.0).abs() < 1e-12);
    }
}
