//! Real-space reference for the fractional gradient.
//!
//! `D^s u` is rebuilt from its definition `D(I_{1-s} u)`: the Riesz potential
//! is evaluated by direct quadrature of the convolution with the kernel
//! `μ(d,s)/(d+s-1) |x|^{-(d+s-1)}`, then differentiated with centered
//! differences. Nothing here goes through the FFT.

use std::f64::consts::PI;

use super::{mu_constant, Grid, GridField, VectorGridField};
use crate::quad::{gauss_legendre, Composite};
use crate::{Error, Result};

/// How far the free-space kernel is periodised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    /// Periodic images summed on each side (per axis). `0` truncates the
    /// convolution to the box itself.
    pub images: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { images: 2048 }
    }
}

pub const MAX_N_1D: usize = 1024;
pub const MAX_N_2D: usize = 64;

/// Fractional gradient of `u` by real-space quadrature, `s ∈ (0, 1)`.
///
/// `u` must vanish outside the central half of the box.
pub fn quadrature_oracle_dsu(u: &GridField, s: f64, opts: &OracleOptions) -> Result<VectorGridField> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("oracle order {s} not in (0, 1)")));
    }
    let grid = *u.grid();
    let limit = if grid.dim() == 1 { MAX_N_1D } else { MAX_N_2D };
    if grid.n() > limit {
        return Err(Error::OracleValidity(format!(
            "grid too large for the quadrature oracle: n = {} > {limit}",
            grid.n()
        )));
    }
    check_support(u)?;

    let weights = match grid.dim() {
        1 => weights_1d(&grid, s, opts.images)?,
        _ => weights_2d(&grid, s, opts.images.min(24))?,
    };
    let potential = circular_convolve(&grid, u.data(), &weights);
    Ok(centered_gradient(&grid, &potential))
}

fn check_support(u: &GridField) -> Result<()> {
    let grid = u.grid();
    let quarter = 0.25 * grid.length();
    let scale = u.max_abs();
    for (idx, v) in u.data().iter().enumerate() {
        let p = grid.point(idx);
        let outside = p[..grid.dim()].iter().any(|x| x.abs() >= quarter);
        if outside && v.abs() > 1e-14 * scale {
            return Err(Error::OracleValidity(format!(
                "field is not supported in the central half of the box (cell {idx})"
            )));
        }
    }
    Ok(())
}

/// `∫_a^b |t|^{-α} t^k dt` for `k ∈ {0, 1}`, `a < b`.
fn power_moment(a: f64, b: f64, alpha: f64, k: i32) -> f64 {
    if a >= 0.0 {
        match k {
            0 => (b.powf(1.0 - alpha) - a.powf(1.0 - alpha)) / (1.0 - alpha),
            _ => (b.powf(2.0 - alpha) - a.powf(2.0 - alpha)) / (2.0 - alpha),
        }
    } else if b <= 0.0 {
        let sign = if k == 0 { 1.0 } else { -1.0 };
        sign * power_moment(-b, -a, alpha, k)
    } else {
        power_moment(a, 0.0, alpha, k) + power_moment(0.0, b, alpha, k)
    }
}

/// Product-trapezoid weights: `u` is interpolated piecewise linearly and the
/// kernel integrated exactly against each hat function.
fn weights_1d(grid: &Grid, s: f64, images: usize) -> Result<Vec<f64>> {
    let n = grid.n();
    let h = grid.spacing();
    let l = grid.length();
    let alpha = s;
    let c = mu_constant(1, s)? / s;
    let gl = Composite::new(8);
    let kernel = |t: f64| t.abs().powf(-alpha);

    let image_sum = |t: f64| -> f64 {
        if images == 0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in 1..=images {
            let nl = k as f64 * l;
            acc += (t + nl).abs().powf(-alpha) + (t - nl).abs().powf(-alpha) - 2.0 * nl.powf(-alpha);
        }
        // second-order remainder of the pairs beyond `images`
        let m = images as f64 + 0.5;
        acc + alpha * t * t * l.powf(-alpha - 2.0) * m.powf(-alpha - 1.0)
    };

    let mut w = vec![0.0; n];
    for (bin, slot) in w.iter_mut().enumerate() {
        let m = grid.wavenumber(bin) as f64;
        let t = m * h;
        let hat = if m.abs() <= 1.0 {
            let (a, b, e) = ((m - 1.0) * h, m * h, (m + 1.0) * h);
            (power_moment(a, b, alpha, 1) - a * power_moment(a, b, alpha, 0)) / h
                + (e * power_moment(b, e, alpha, 0) - power_moment(b, e, alpha, 1)) / h
        } else {
            gl.integrate(t - h, t, 1, |y| kernel(y) * (y - (t - h)) / h)
                + gl.integrate(t, t + h, 1, |y| kernel(y) * ((t + h) - y) / h)
        };
        *slot = c * (hat + h * image_sum(t));
    }
    Ok(w)
}

/// Cell-average weights in 2D: the central cell is integrated in polar
/// coordinates, its neighbours by tensor Gauss rules, the rest by midpoint.
fn weights_2d(grid: &Grid, s: f64, images: usize) -> Result<Vec<f64>> {
    let n = grid.n();
    let h = grid.spacing();
    let l = grid.length();
    let alpha = 1.0 + s;
    let c = mu_constant(2, s)? / alpha;
    let kernel = |x: f64, y: f64| x.hypot(y).powf(-alpha);

    // ∫ over the square [-h/2, h/2]^2 of |y|^{-α}
    let central = {
        let rule = Composite::new(16);
        8.0 * rule.integrate(0.0, PI / 4.0, 4, |th| (0.5 * h / th.cos()).powf(2.0 - alpha) / (2.0 - alpha))
    };
    let (gx, gw) = gauss_legendre(12);

    let image_sum = |x: f64, y: f64| -> f64 {
        if images == 0 {
            return 0.0;
        }
        let m = images as i64;
        let mut acc = 0.0;
        for a in -m..=m {
            for b in -m..=m {
                if a == 0 && b == 0 {
                    continue;
                }
                let (px, py) = (a as f64 * l, b as f64 * l);
                acc += kernel(x + px, y + py) - kernel(px, py);
            }
        }
        let r = (images as f64 + 0.5) * l;
        acc + PI * alpha * (x * x + y * y) * r.powf(-alpha) / (2.0 * l * l)
    };

    let mut w = vec![0.0; n * n];
    for i0 in 0..n {
        for i1 in 0..n {
            let m0 = grid.wavenumber(i0);
            let m1 = grid.wavenumber(i1);
            let (x, y) = (m0 as f64 * h, m1 as f64 * h);
            let cell = if m0 == 0 && m1 == 0 {
                central
            } else if m0.abs() <= 2 && m1.abs() <= 2 {
                let mut acc = 0.0;
                for (a, wa) in gx.iter().zip(&gw) {
                    for (b, wb) in gx.iter().zip(&gw) {
                        acc += wa * wb * kernel(x + 0.5 * h * a, y + 0.5 * h * b);
                    }
                }
                acc * 0.25 * h * h
            } else {
                h * h * kernel(x, y)
            };
            w[i0 * n + i1] = c * (cell + h * h * image_sum(x, y));
        }
    }
    Ok(w)
}

/// `out[i] = Σ_j u[j] w[i - j]` with periodic index arithmetic.
fn circular_convolve(grid: &Grid, u: &[f64], w: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let mut out = vec![0.0; u.len()];
    match grid.dim() {
        1 => {
            for (j, &uj) in u.iter().enumerate() {
                if uj == 0.0 {
                    continue;
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o += uj * w[(i + n - j) % n];
                }
            }
        }
        _ => {
            for j0 in 0..n {
                for j1 in 0..n {
                    let uj = u[j0 * n + j1];
                    if uj == 0.0 {
                        continue;
                    }
                    for i0 in 0..n {
                        let r0 = ((i0 + n - j0) % n) * n;
                        let row = &mut out[i0 * n..(i0 + 1) * n];
                        for (i1, o) in row.iter_mut().enumerate() {
                            *o += uj * w[r0 + (i1 + n - j1) % n];
                        }
                    }
                }
            }
        }
    }
    out
}

fn centered_gradient(grid: &Grid, f: &[f64]) -> VectorGridField {
    let n = grid.n();
    let inv = 0.5 / grid.spacing();
    let comps = match grid.dim() {
        1 => vec![(0..n).map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) * inv).collect()],
        _ => {
            let mut gx = vec![0.0; n * n];
            let mut gy = vec![0.0; n * n];
            for i0 in 0..n {
                for i1 in 0..n {
                    let k = i0 * n + i1;
                    gx[k] = (f[((i0 + 1) % n) * n + i1] - f[((i0 + n - 1) % n) * n + i1]) * inv;
                    gy[k] = (f[i0 * n + (i1 + 1) % n] - f[i0 * n + (i1 + n - 1) % n]) * inv;
                }
            }
            vec![gx, gy]
        }
    };
    VectorGridField::from_raw(*grid, comps)
}
