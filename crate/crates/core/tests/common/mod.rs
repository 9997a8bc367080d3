#![allow(dead_code)]

use fracorlicz::{Grid, GridField, Spectral, VectorGridField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random samples in [-1, 1).
pub fn random_field(grid: Grid, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridField::new(grid, data).unwrap()
}

/// Random field with the mean and the Nyquist content removed.
pub fn random_resolved(spec: &Spectral, seed: u64) -> GridField {
    spec.project_resolved(&random_field(*spec.grid(), seed)).unwrap()
}

pub fn random_vector(grid: Grid, seed: u64) -> VectorGridField {
    let comps = (0..grid.dim())
        .map(|j| random_field(grid, seed.wrapping_mul(31).wrapping_add(j as u64)))
        .collect();
    VectorGridField::from_components(comps).unwrap()
}

pub fn rel(a: &GridField, b: &GridField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn rel_vec(a: &VectorGridField, b: &VectorGridField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn bump_field(grid: Grid, center: f64, width: f64) -> GridField {
    GridField::from_fn(grid, |x| {
        let r2 = (x[0] - center).powi(2) + if grid.dim() == 2 { x[1] * x[1] } else { 0.0 };
        fracorlicz::lab::bump(r2.sqrt() / width)
    })
}
