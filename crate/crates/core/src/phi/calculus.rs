//! Conjugate and left inverse by monotone root bracketing.

use super::{Family, PhiFunction};
use crate::{Error, Result};

/// Bracket expansion stops beyond `2^±MAX_OCTAVES`.
const MAX_OCTAVES: i32 = 1000;

/// Smallest `r ≥ 0` with `g(r) ≥ target` for a nondecreasing `g`, to full
/// relative precision. `None` when the root lies beyond `2^MAX_OCTAVES`.
fn monotone_root(target: f64, g: impl Fn(f64) -> f64) -> Option<f64> {
    let (mut lo, mut hi);
    if g(1.0) >= target {
        hi = 1.0;
        lo = 0.5;
        let mut k = 1;
        while g(lo) >= target {
            hi = lo;
            lo *= 0.5;
            k += 1;
            if k > MAX_OCTAVES {
                return Some(0.0);
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        let mut k = 1;
        while !(g(hi) >= target) {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > MAX_OCTAVES {
                return None;
            }
        }
    }
    // g(lo) < target <= g(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Maximizer `r*` of `r ℓ − A(x, r)`, i.e. the root of `a(x, r) r = ℓ`.
pub fn conjugate_maximizer(phi: &PhiFunction, x: usize, ell: f64) -> Result<f64> {
    if !(ell >= 0.0) {
        return Err(Error::Domain(format!("conjugate argument must be >= 0, got {ell}")));
    }
    if ell == 0.0 {
        return Ok(0.0);
    }
    if let Family::Power { p, scale } = phi.family() {
        return Ok((ell / (scale * p)).powf(1.0 / (p - 1.0)));
    }
    monotone_root(ell, |r| phi.derivative(x, r))
        .ok_or_else(|| Error::Range(format!("conjugate maximizer for {ell} is out of range")))
}

/// `A'(x, ℓ) = sup_{r ≥ 0} (r ℓ − A(x, r))`.
pub fn conjugate_phi(phi: &PhiFunction, x: usize, ell: f64) -> Result<f64> {
    phi.check_x(x)?;
    let r = conjugate_maximizer(phi, x, ell)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let value = match phi.family() {
        Family::Power { p, scale } => (p - 1.0) * scale * r.powf(*p),
        _ => r * ell - phi.value(x, r),
    };
    if !value.is_finite() {
        return Err(Error::Range(format!("conjugate at {ell} overflows")));
    }
    Ok(value.max(0.0))
}

/// `sup_r (r ℓ − A(x, r))` by brute force over a geometric grid refined
/// around its best node; an independent cross-check of [`conjugate_phi`].
pub fn legendre_transform(phi: &PhiFunction, x: usize, ell: f64) -> Result<f64> {
    phi.check_x(x)?;
    if !(ell >= 0.0) {
        return Err(Error::Domain(format!("conjugate argument must be >= 0, got {ell}")));
    }
    let objective = |r: f64| r * ell - phi.value(x, r);
    let mut best_r = 0.0;
    let mut best = 0.0;
    for k in -4000..=4000 {
        let r = (k as f64 / 100.0).exp2();
        let v = objective(r);
        if v > best {
            best = v;
            best_r = r;
        }
    }
    if best_r == 0.0 {
        return Ok(0.0);
    }
    // golden-section refinement on the bracketing cell
    let (mut a, mut b) = (best_r * 0.01f64.exp2().recip(), best_r * 0.01f64.exp2());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if objective(c) > objective(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(best.max(objective(0.5 * (a + b))))
}

/// `A^{-1}(x, r) = inf{ℓ ≥ 0 : A(x, ℓ) ≥ r}`.
pub fn left_inverse(phi: &PhiFunction, x: usize, r: f64) -> Result<f64> {
    phi.check_x(x)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("left inverse argument must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    if !r.is_finite() {
        return Err(Error::Range("left inverse of an infinite level".into()));
    }
    match phi.family() {
        Family::Power { p, scale } => Ok((r / scale).powf(1.0 / p)),
        Family::Tabulated(t) => Ok(t.inverse(x, r)),
        _ => monotone_root(r, |l| phi.value(x, l))
            .ok_or_else(|| Error::Range(format!("left inverse of {r} is out of range"))),
    }
}
