//! Hermite polynomials and asymmetrically-weighted (AW) Hermite functions.
//!
//! The AW basis for a species with scaling `alpha` and shift `u` is
//!
//! ```text
//! psi_n(v) = (pi 2^n n!)^{-1/2} H_n(xi) exp(-xi^2),   xi = (v - u) / alpha
//! ```
//!
//! with the dual (test) functions `(pi 2^n n!)^{-1/2} H_n(xi)`. Evaluation never
//! forms `H_n` directly for large `n`: the recurrence runs on the normalized
//! Hermite functions, which stay O(1).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling and shift of the velocity variable for one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteBasisParams {
    pub alpha: f64,
    pub u: f64,
}

impl HermiteBasisParams {
    pub fn new(alpha: f64, u: f64) -> Result<Self> {
        let p = HermiteBasisParams { alpha, u };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_finite() && self.u.is_finite() && self.alpha > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidBasis { alpha: self.alpha, u: self.u })
        }
    }

    /// Normalized velocity `(v - u) / alpha`.
    #[inline]
    pub fn xi(&self, v: f64) -> f64 {
        (v - self.u) / self.alpha
    }
}

/// Physicists' Hermite polynomials `H_0(xi) ..= H_n(xi)`.
pub fn hermite_polys(xi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(2.0 * xi);
    for k in 1..n {
        let next = 2.0 * xi * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// Normalized polynomials `H_n(xi) / sqrt(2^n n!)` for `n = 0..=nmax`.
///
/// These are orthonormal against `exp(-xi^2) / sqrt(pi)` and are what the
/// dual functions, the transform oracle and the quadrature weights need.
pub fn normalized_hermite_polys(xi: f64, nmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * xi);
    for k in 1..nmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Writes `psi_0(v) ..= psi_{out.len()-1}(v)` into `out`.
///
/// The recurrence is carried on `phi_n = h_n(xi) exp(-xi^2/2)` starting from 1
/// with a running log scale, so neither `H_n` overflow nor early underflow of
/// `exp(-xi^2)` corrupts the high modes.
pub fn aw_hermite_into(xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let gauss_log = -xi * xi;
    let norm_log = -0.5 * PI.ln();
    // values carried as `cur * exp(log_scale)`, with the true phi_n = that * exp(-xi^2/2)
    let mut log_scale = 0.0_f64;
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out[0] = (gauss_log + norm_log).exp();
    for n in 0..out.len() - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > 1e150 {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
        let lg = log_scale + gauss_log + norm_log;
        out[n + 1] = if cur == 0.0 { 0.0 } else { cur * lg.exp() };
    }
}

/// AW Hermite functions `psi_n^{alpha,u}(v)` for `n = 0..=nmax`.
pub fn aw_hermite(v: f64, params: &HermiteBasisParams, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    aw_hermite_into(params.xi(v), &mut out);
    out
}
