//! Spectral state: per-species Hermite–Fourier coefficients plus the field.
//!
//! Only wavenumbers `k >= 0` are stored. Negative wavenumbers follow from
//! `C_{n,-k} = conj(C_{n,k})`, so `f` and `E` are real by construction.
//! Fourier coefficients use the `1/L` convention: `C_k = (1/L) int f eta_{-k} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{aw_hermite_into, HermiteBasisParams};

/// Discretization and run parameters shared by all species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Spatial period.
    pub length: f64,
    /// Highest Hermite index.
    pub nv: usize,
    /// Highest Fourier wavenumber.
    pub nx: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Artificial collision coefficient.
    pub nu: f64,
    pub u_tol: f64,
    pub alpha_tol: f64,
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad("length must be positive");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_final >= 0.0) {
            return bad("t_final must be non-negative");
        }
        if !(self.nu >= 0.0) {
            return bad("nu must be non-negative");
        }
        if !(self.u_tol >= 0.0 && self.alpha_tol >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if self.nu > 0.0 && self.nv < 4 {
            return bad("collisions require nv >= 4");
        }
        Ok(())
    }

    /// Number of uniform steps needed to reach `t_final`.
    pub fn num_steps(&self) -> usize {
        steps_for(self.t_final, self.dt)
    }
}

/// Uniform steps of size `dt` covering `span`, rounding up unless `span / dt`
/// is an integer to within floating-point noise.
pub fn steps_for(span: f64, dt: f64) -> usize {
    let n = (span / dt).max(0.0);
    let r = n.round();
    if (n - r).abs() < 1e-9 * n.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

/// Complex coefficient matrix indexed `(n, k)`, `n in 0..=nv`, `k in 0..=nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    nv: usize,
    nx: usize,
    data: Vec<Complex64>,
}

impl CoeffMatrix {
    pub fn zeros(nv: usize, nx: usize) -> Self {
        CoeffMatrix { nv, nx, data: vec![Complex64::new(0.0, 0.0); (nv + 1) * (nx + 1)] }
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.data[n * (self.nx + 1) + k]
    }

    #[inline]
    pub fn set(&mut self, n: usize, k: usize, value: Complex64) {
        self.data[n * (self.nx + 1) + k] = value;
    }

    /// Coefficient at a signed wavenumber, using conjugate symmetry for `k < 0`.
    /// Wavenumbers beyond the truncation are zero.
    pub fn get_signed(&self, n: usize, k: i64) -> Complex64 {
        let ka = k.unsigned_abs() as usize;
        if ka > self.nx || n > self.nv {
            return Complex64::new(0.0, 0.0);
        }
        let c = self.get(n, ka);
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// Row `n` as a slice over `k = 0..=nx`.
    pub fn row(&self, n: usize) -> &[Complex64] {
        let w = self.nx + 1;
        &self.data[n * w..(n + 1) * w]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [Complex64] {
        let w = self.nx + 1;
        &mut self.data[n * w..(n + 1) * w]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

/// Charge and mass of a species (normalized units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesInfo {
    pub name: String,
    pub charge: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesState {
    pub info: SpeciesInfo,
    pub basis: HermiteBasisParams,
    pub coeffs: CoeffMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub length: f64,
    pub species: Vec<SpeciesState>,
    /// Field coefficients `E_k`, `k = 0..=nx`; `E_0 = 0`.
    pub field: Vec<Complex64>,
    pub time: f64,
}

impl SpectralState {
    pub fn nv(&self) -> usize {
        self.species.first().map(|s| s.coeffs.nv()).unwrap_or(0)
    }

    pub fn nx(&self) -> usize {
        self.species.first().map(|s| s.coeffs.nx()).unwrap_or(0)
    }

    pub fn species(&self, s: usize) -> Result<&SpeciesState> {
        self.species.get(s).ok_or(Error::NoSuchSpecies(s))
    }

    /// Checks shapes and basis parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::InvalidConfig("length must be positive".into()));
        }
        let (nv, nx) = (self.nv(), self.nx());
        for sp in &self.species {
            sp.basis.validate()?;
            if sp.coeffs.nv() != nv {
                return Err(Error::DimensionMismatch { expected: nv, got: sp.coeffs.nv() });
            }
            if sp.coeffs.nx() != nx {
                return Err(Error::DimensionMismatch { expected: nx, got: sp.coeffs.nx() });
            }
        }
        if self.field.len() != nx + 1 {
            return Err(Error::DimensionMismatch { expected: nx + 1, got: self.field.len() });
        }
        Ok(())
    }
}

/// Point values on a tensor grid, stored x-major (`values[ix * nv + iv]`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseGrid {
    #[inline]
    pub fn at(&self, ix: usize, iv: usize) -> f64 {
        self.values[ix * self.v.len() + iv]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `n` equispaced points on `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` equispaced points on the periodic interval `[0, length)`.
pub fn periodic_grid(length: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| length * i as f64 / n as f64).collect()
}

const RESIDUE_TOL: f64 = 1e-8;

/// Evaluates `f(x, v) = sum_n sum_k C_{n,k} psi_n(v) eta_k(x)` for one species.
pub fn reconstruct_f(state: &SpectralState, species: usize, x_grid: &[f64], v_grid: &[f64]) -> Result<PhaseGrid> {
    reconstruct_sum(state, &[species], x_grid, v_grid)
}

/// Sum of the reconstructions of several species (e.g. all electron beams).
pub fn reconstruct_sum(state: &SpectralState, species: &[usize], x_grid: &[f64], v_grid: &[f64]) -> Result<PhaseGrid> {
    if x_grid.iter().chain(v_grid).any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("reconstruction grid"));
    }
    let nxg = x_grid.len();
    let nvg = v_grid.len();
    let mut values = vec![0.0; nxg * nvg];
    let mut residue = vec![0.0; nxg * nvg];

    for &s in species {
        let sp = state.species(s)?;
        let nv = sp.coeffs.nv();
        let nx = sp.coeffs.nx();

        // g_n(x) = sum_k C_{n,k} eta_k(x); real part from conjugate pairs, imaginary part from Im C_{n,0}
        let mut g_re = vec![0.0; nxg * (nv + 1)];
        let mut g_im = vec![0.0; nxg * (nv + 1)];
        for (ix, &x) in x_grid.iter().enumerate() {
            let phases: Vec<Complex64> =
                (0..=nx).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x / state.length)).collect();
            for n in 0..=nv {
                let row = sp.coeffs.row(n);
                let mut acc = row[0].re;
                for k in 1..=nx {
                    acc += 2.0 * (row[k] * phases[k]).re;
                }
                g_re[ix * (nv + 1) + n] = acc;
                g_im[ix * (nv + 1) + n] = row[0].im;
            }
        }

        let mut psi = vec![0.0; nv + 1];
        for (iv, &v) in v_grid.iter().enumerate() {
            aw_hermite_into(sp.basis.xi(v), &mut psi);
            for ix in 0..nxg {
                let gr = &g_re[ix * (nv + 1)..(ix + 1) * (nv + 1)];
                let gi = &g_im[ix * (nv + 1)..(ix + 1) * (nv + 1)];
                let mut re = 0.0;
                let mut im = 0.0;
                for n in 0..=nv {
                    re += gr[n] * psi[n];
                    im += gi[n] * psi[n];
                }
                values[ix * nvg + iv] += re;
                residue[ix * nvg + iv] += im;
            }
        }
    }

    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let worst = residue.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if worst > 0.0 {
        let rel = if scale > 0.0 { worst / scale } else { f64::INFINITY };
        if rel > RESIDUE_TOL {
            return Err(Error::ImaginaryResidue(rel));
        }
        if rel > 1e-10 {
            log::warn!("reconstruction imaginary residue {rel:e} exceeds 1e-10");
        }
    }

    Ok(PhaseGrid { x: x_grid.to_vec(), v: v_grid.to_vec(), values })
}
