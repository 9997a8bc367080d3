use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mask::DomainMask;
use crate::spectral::{Grid, GridField};
use crate::{Error, Result};

/// Smooth compactly supported bump `exp(1 − 1/(1 − t²))` on `|t| < 1`, peak 1.
pub fn bump(t: f64) -> f64 {
    let t2 = t * t;
    if t2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t2)).exp()
    }
}

/// Deterministic family of test fields supported inside a domain.
#[derive(Clone, Debug)]
pub struct TestSuite {
    grid: Grid,
    seed: u64,
    members: Vec<(String, GridField)>,
}

impl TestSuite {
    /// Arbitrary members, each required to vanish outside `mask` and be nonzero.
    pub fn new(mask: &DomainMask, seed: u64, members: Vec<(String, GridField)>) -> Result<Self> {
        for (id, u) in &members {
            mask.check(u).map_err(|e| Error::Constraint(format!("suite member {id}: {e}")))?;
            if u.max_abs() == 0.0 {
                return Err(Error::Config(format!("suite member {id} is identically zero")));
            }
        }
        Ok(Self { grid: *mask.grid(), seed, members })
    }

    /// Standard suite inside the ball `B(center, radius) ⊂ Ω`: bumps of three
    /// widths at two placements, five seeded band-limited fields and three
    /// oscillatory modes, the last two under a smooth window.
    ///
    /// All frequencies and widths are physical, so refining the grid samples
    /// the same functions.
    pub fn standard(mask: &DomainMask, center: [f64; 2], radius: f64, seed: u64) -> Result<Self> {
        let grid = *mask.grid();
        let d = grid.dim();
        let rel = |x: [f64; 2]| -> [f64; 2] { [x[0] - center[0], if d == 2 { x[1] - center[1] } else { 0.0 }] };
        let norm = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
        let window_radius = 0.95 * radius;
        let window = move |x: [f64; 2]| bump(norm(rel(x)) / window_radius);

        let mut members = Vec::new();
        for (wi, frac) in [0.3, 0.55, 0.9].into_iter().enumerate() {
            let w = frac * window_radius;
            for (pi, shift) in [0.0, 0.8].into_iter().enumerate() {
                let off = shift * (window_radius - w);
                let c = [off, if d == 2 { 0.5 * off } else { 0.0 }];
                let u = GridField::from_fn(grid, |x| {
                    let r = rel(x);
                    bump(norm([r[0] - c[0], r[1] - c[1]]) / w)
                });
                members.push((format!("bump-w{wi}-p{pi}"), u));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for j in 0..5 {
            let waves: Vec<(f64, f64, f64, f64)> = (1..=5)
                .map(|k| {
                    let amp = rng.gen_range(-1.0..1.0) / k as f64;
                    let phase = rng.gen_range(0.0..2.0 * PI);
                    let theta = if d == 2 { rng.gen_range(0.0..PI) } else { 0.0 };
                    (amp, phase, theta, k as f64 * PI / radius)
                })
                .collect();
            let u = GridField::from_fn(grid, |x| {
                let r = rel(x);
                let s: f64 = waves
                    .iter()
                    .map(|&(a, ph, th, om)| a * (om * (th.cos() * r[0] + th.sin() * r[1]) + ph).cos())
                    .sum();
                window(x) * s
            });
            members.push((format!("random-{j}"), u));
        }

        for k in [2.0, 4.0, 8.0] {
            let om = k * PI / radius;
            let u = GridField::from_fn(grid, |x| window(x) * (om * rel(x)[0]).sin());
            members.push((format!("mode-{k}"), u));
        }
        Self::new(mask, seed, members)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn members(&self) -> &[(String, GridField)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
