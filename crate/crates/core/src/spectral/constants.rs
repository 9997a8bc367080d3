use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Normalizing constant
/// `μ(d, s) = 2^s Γ((d+s+1)/2) / (π^{d/2} Γ((1-s)/2))`, extended by its
/// limit `μ(d, 1) = 0`.
pub fn mu_constant(d: usize, s: f64) -> Result<f64> {
    if d == 0 || !(-1.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("mu_constant: need d >= 1 and s in [-1, 1], got ({d}, {s})")));
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    let d = d as f64;
    let log = s * std::f64::consts::LN_2 + ln_gamma(0.5 * (d + s + 1.0))
        - 0.5 * d * PI.ln()
        - ln_gamma(0.5 * (1.0 - s));
    Ok(log.exp())
}
