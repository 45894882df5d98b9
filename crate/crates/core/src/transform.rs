//! Conservative projection between AW Hermite bases with different `(alpha, u)`.
//!
//! With `a = alpha_new / alpha_old` and `b = (u_new - u_old) / alpha_old`, the
//! lower-triangular matrix is
//!
//! ```text
//! P_{n,m} = K_{n,m} a^{-(m+1)} S(n - m),    K_{n,m} = 2^{(m-n)/2} sqrt(n! / m!)
//! S(p)    = sum_{j <= p/2} x^{p-2j} / (p-2j)! * y^j / j!,   x = -2b/a,  y = 1/a^2 - 1
//! ```
//!
//! `S` depends on `(n, m)` only through `p = n - m`: it is the Taylor
//! coefficient of `exp(x t + y t^2)`, so `(p+1) S(p+1) = x S(p) + 2 y S(p-1)`
//! and all of `S(0..=nv)` costs O(nv). Entries are assembled in log space so
//! large `nv` does not overflow the factorials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::{normalized_hermite_polys, HermiteBasisParams};
use crate::quadrature::gauss_hermite_rule;
use crate::state::{CoeffMatrix, SpectralState};

const A_MIN: f64 = 1e-6;
const A_MAX: f64 = 1e6;

/// Which closed form produced the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformCase {
    Identity,
    /// Both scaling and shift change.
    ScaleAndShift,
    /// Only the shift changes.
    ShiftOnly,
    /// Only the scaling changes.
    ScaleOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformMatrix {
    dim: usize,
    entries: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub case: TransformCase,
    pub from: HermiteBasisParams,
    pub to: HermiteBasisParams,
}

impl TransformMatrix {
    /// Matrix size `nv + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nv(&self) -> usize {
        self.dim - 1
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.entries[n * self.dim + m]
    }

    /// Row-major dense entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `out_n = sum_{m <= n} P_{n,m} c_m` for each Fourier mode of `coeffs`.
    pub fn apply_to_coeffs(&self, coeffs: &CoeffMatrix) -> Result<CoeffMatrix> {
        if coeffs.nv() + 1 != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: coeffs.nv() + 1 });
        }
        let nx = coeffs.nx();
        let mut out = CoeffMatrix::zeros(coeffs.nv(), nx);
        for n in 0..self.dim {
            let dst = out.row_mut(n);
            for m in 0..=n {
                let p = self.get(n, m);
                if p == 0.0 {
                    continue;
                }
                for (d, c) in dst.iter_mut().zip(coeffs.row(m)) {
                    *d += c * p;
                }
            }
        }
        Ok(out)
    }

    /// Applies the matrix to a single coefficient column.
    pub fn apply_to_column(&self, col: &[Complex64]) -> Result<Vec<Complex64>> {
        if col.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: col.len() });
        }
        Ok((0..self.dim).map(|n| (0..=n).fold(Complex64::new(0.0, 0.0), |acc, m| acc + col[m] * self.get(n, m))).collect())
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = Vec::with_capacity(n + 1);
    lf.push(0.0);
    for k in 1..=n {
        lf.push(lf[k - 1] + (k as f64).ln());
    }
    lf
}

/// Signed log-magnitude of `S(p)` (and `sqrt(p!) S(p)` bookkeeping) for `p = 0..=nv`.
/// Returns `(sign, ln|S(p)|)`, with sign 0 for exact zeros.
fn case_sums(case: TransformCase, x: f64, y: f64, lf: &[f64]) -> Vec<(f64, f64)> {
    let nv = lf.len() - 1;
    let mut out = Vec::with_capacity(nv + 1);
    match case {
        TransformCase::Identity => {
            out.push((1.0, 0.0));
            out.extend((1..=nv).map(|_| (0.0, 0.0)));
        }
        TransformCase::ShiftOnly => {
            // S(p) = x^p / p!
            let lx = x.abs().ln();
            for (p, lfp) in lf.iter().enumerate().take(nv + 1) {
                let sign = if p % 2 == 1 { x.signum() } else { 1.0 };
                out.push((sign, p as f64 * lx - lfp));
            }
        }
        TransformCase::ScaleOnly => {
            // S(p) = y^{p/2} / (p/2)! for even p, zero for odd p
            let ly = y.abs().ln();
            for p in 0..=nv {
                if p % 2 == 1 {
                    out.push((0.0, 0.0));
                } else {
                    let j = p / 2;
                    let sign = if j % 2 == 1 { y.signum() } else { 1.0 };
                    out.push((sign, j as f64 * ly - lf[j]));
                }
            }
        }
        TransformCase::ScaleAndShift => {
            // tau(p) = sqrt(p!) S(p):  tau(p+1) = (x tau(p) + 2 y sqrt(p) tau(p-1)) / sqrt(p+1)
            let mut log_scale = 0.0_f64;
            let mut prev = 0.0_f64;
            let mut cur = 1.0_f64;
            out.push((1.0, 0.0));
            for p in 0..nv {
                let pf = p as f64;
                let next = (x * cur + 2.0 * y * pf.sqrt() * prev) / (pf + 1.0).sqrt();
                prev = cur;
                cur = next;
                let mag = cur.abs();
                if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
                    prev /= mag;
                    cur /= mag;
                    log_scale += mag.ln();
                }
                if cur == 0.0 {
                    out.push((0.0, 0.0));
                } else {
                    out.push((cur.signum(), cur.abs().ln() + log_scale - 0.5 * lf[p + 1]));
                }
            }
        }
    }
    out
}

/// Builds the projection matrix from basis `from` to basis `to` with `nv + 1` modes.
pub fn build_transform(from: HermiteBasisParams, to: HermiteBasisParams, nv: usize) -> Result<TransformMatrix> {
    from.validate()?;
    to.validate()?;
    let a = to.alpha / from.alpha;
    let b = (to.u - from.u) / from.alpha;
    if !(A_MIN..=A_MAX).contains(&a) {
        return Err(Error::DegenerateTransform(a));
    }
    let case = match (to.alpha == from.alpha, to.u == from.u) {
        (true, true) => TransformCase::Identity,
        (true, false) => TransformCase::ShiftOnly,
        (false, true) => TransformCase::ScaleOnly,
        (false, false) => TransformCase::ScaleAndShift,
    };

    let dim = nv + 1;
    let mut entries = vec![0.0; dim * dim];
    if case == TransformCase::Identity {
        for n in 0..dim {
            entries[n * dim + n] = 1.0;
        }
        return Ok(TransformMatrix { dim, entries, a, b, case, from, to });
    }

    let lf = log_factorials(nv);
    let x = -2.0 * b / a;
    let y = 1.0 / (a * a) - 1.0;
    let sums = case_sums(case, x, y, &lf);
    let ln_a = a.ln();
    let half_ln2 = 0.5 * std::f64::consts::LN_2;

    for n in 0..dim {
        // diagonal is exactly a^{-(n+1)}
        entries[n * dim + n] = (-(n as f64 + 1.0) * ln_a).exp();
        for m in 0..n {
            let p = n - m;
            let (sign, ln_s) = sums[p];
            if sign == 0.0 {
                continue;
            }
            let ln_k = -half_ln2 * p as f64 + 0.5 * (lf[n] - lf[m]);
            entries[n * dim + m] = sign * (ln_k - (m as f64 + 1.0) * ln_a + ln_s).exp();
        }
    }
    Ok(TransformMatrix { dim, entries, a, b, case, from, to })
}

/// Projects species `species` of `state` onto the target basis of `p`.
/// The field and time are left untouched.
pub fn apply_transform(p: &TransformMatrix, state: &SpectralState, species: usize) -> Result<SpectralState> {
    let mut out = state.clone();
    apply_transform_in_place(p, &mut out, species)?;
    Ok(out)
}

pub fn apply_transform_in_place(p: &TransformMatrix, state: &mut SpectralState, species: usize) -> Result<()> {
    let sp = state.species.get_mut(species).ok_or(Error::NoSuchSpecies(species))?;
    sp.coeffs = p.apply_to_coeffs(&sp.coeffs)?;
    sp.basis = p.to;
    Ok(())
}

/// Evaluates `int psi_m^{from}(v) psi_n^{to}(v) omega_to(v) dv` by Gauss–Hermite
/// quadrature in the `from` variable. The Gaussian of `psi_n^{to}` cancels
/// against the weight, leaving a polynomial of degree `n + m` times
/// `exp(-xi_from^2)`, which the rule integrates exactly.
pub fn quadrature_transform_entry(from: HermiteBasisParams, to: HermiteBasisParams, n: usize, m: usize) -> Result<f64> {
    from.validate()?;
    to.validate()?;
    if n > 40 || m > 40 {
        return Err(Error::InvalidConfig(format!("quadrature oracle limited to n, m <= 40 (got {n}, {m})")));
    }
    let nodes = 4 * (n.max(m) + 1);
    let rule = gauss_hermite_rule(nodes)?;
    let a = to.alpha / from.alpha;
    let b = (to.u - from.u) / from.alpha;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    // v = u_from + alpha_from * xi  =>  xi_to = (xi - b) / a,  dv = alpha_from dxi
    let integral = rule.integrate(|xi| {
        let h_from = normalized_hermite_polys(xi, m)[m];
        let h_to = normalized_hermite_polys((xi - b) / a, n)[n];
        h_from * h_to
    });
    Ok(integral / (a * sqrt_pi))
}
