//! Conserved quantities, field norms, distribution extrema and L2 errors.
//!
//! Moments only need the `k = 0` coefficients of the first three Hermite
//! modes, because `int psi_n dv = alpha delta_{n0}` and multiplication by
//! `v` couples neighbouring modes only.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{linspace, periodic_grid, reconstruct_sum, SpectralState};

fn k0(state: &SpectralState, s: usize, n: usize) -> Result<f64> {
    let sp = state.species(s)?;
    Ok(if n <= sp.coeffs.nv() { sp.coeffs.get(n, 0).re } else { 0.0 })
}

/// `m alpha L Re C_{0,0}`
pub fn mass(state: &SpectralState, s: usize) -> Result<f64> {
    let sp = state.species(s)?;
    Ok(sp.info.mass * sp.basis.alpha * state.length * k0(state, s, 0)?)
}

/// `u M + m alpha^2 L Re C_{1,0} / sqrt 2`
pub fn species_momentum(state: &SpectralState, s: usize) -> Result<f64> {
    let sp = state.species(s)?;
    let a = sp.basis.alpha;
    Ok(sp.basis.u * mass(state, s)? + sp.info.mass * a * a * state.length * k0(state, s, 1)? / SQRT_2)
}

pub fn momentum(state: &SpectralState) -> Result<f64> {
    (0..state.species.len()).map(|s| species_momentum(state, s)).sum()
}

/// `(m alpha L / 2) [(u^2 + alpha^2/2) C_0 + sqrt2 u alpha C_1 + alpha^2/sqrt2 C_2]`
pub fn kinetic_energy(state: &SpectralState, s: usize) -> Result<f64> {
    let sp = state.species(s)?;
    let (a, u) = (sp.basis.alpha, sp.basis.u);
    let (c0, c1, c2) = (k0(state, s, 0)?, k0(state, s, 1)?, k0(state, s, 2)?);
    let inner = (u * u + 0.5 * a * a) * c0 + SQRT_2 * u * a * c1 + a * a / SQRT_2 * c2;
    Ok(0.5 * sp.info.mass * a * state.length * inner)
}

fn field_power(field: &[Complex64]) -> f64 {
    field.iter().enumerate().map(|(k, e)| if k == 0 { 1.0 } else { 2.0 } * e.norm_sqr()).sum()
}

/// `(1/2) int E^2 dx` by Parseval.
pub fn potential_energy(field: &[Complex64], length: f64) -> f64 {
    0.5 * length * field_power(field)
}

/// `(int E^2 dx)^{1/2}`
pub fn field_l2(field: &[Complex64], length: f64) -> f64 {
    (length * field_power(field)).sqrt()
}

pub fn total_energy(state: &SpectralState) -> Result<f64> {
    let kin: f64 = (0..state.species.len()).map(|s| kinetic_energy(state, s)).sum::<Result<f64>>()?;
    Ok(kin + potential_energy(&state.field, state.length))
}

/// Sampling window for distribution-function extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaWindow {
    /// Species whose distributions are summed before sampling.
    pub species: Vec<usize>,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
    pub x_points: usize,
}

impl ExtremaWindow {
    /// `[-3, 3]` x 400 velocity points, 256 x points, over the given species.
    pub fn standard(species: Vec<usize>) -> Self {
        ExtremaWindow { species, v_min: -3.0, v_max: 3.0, v_points: 400, x_points: 256 }
    }

    /// All species with negative charge.
    pub fn electrons(state: &SpectralState) -> Self {
        let species = state.species.iter().enumerate().filter(|(_, s)| s.info.charge < 0.0).map(|(i, _)| i).collect();
        Self::standard(species)
    }
}

/// `(min f, max f)` of the summed distribution on the window.
pub fn f_extrema(state: &SpectralState, window: &ExtremaWindow) -> Result<(f64, f64)> {
    if window.species.is_empty() || window.v_points == 0 || window.x_points == 0 {
        return Err(Error::InvalidConfig("empty extrema window".into()));
    }
    let xs = periodic_grid(state.length, window.x_points);
    let vs = linspace(window.v_min, window.v_max, window.v_points);
    let g = reconstruct_sum(state, &window.species, &xs, &vs)?;
    Ok((g.min(), g.max()))
}

/// Tensor grid for [`l2_error`]; `v` carries trapezoid weights, `x` is periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl ErrorGrid {
    /// 256 x points and 512 velocity points on `[u - 8 alpha, u + 8 alpha]`.
    pub fn around(length: f64, alpha: f64, u: f64) -> Self {
        ErrorGrid { x: periodic_grid(length, 256), v: linspace(u - 8.0 * alpha, u + 8.0 * alpha, 512) }
    }
}

/// Discrete L2 norm of `f - reference` over the grid, divided by the norm of
/// the reference when `relative` is set.
pub fn l2_error<F>(state: &SpectralState, species: &[usize], reference: F, grid: &ErrorGrid, relative: bool) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let g = reconstruct_sum(state, species, &grid.x, &grid.v)?;
    let nvg = grid.v.len();
    let mut wv = vec![0.0; nvg];
    for i in 0..nvg.saturating_sub(1) {
        let h = 0.5 * (grid.v[i + 1] - grid.v[i]);
        wv[i] += h;
        wv[i + 1] += h;
    }
    let wx = state.length / grid.x.len() as f64;
    let (mut err, mut norm) = (0.0, 0.0);
    for (ix, &x) in grid.x.iter().enumerate() {
        for (iv, &v) in grid.v.iter().enumerate() {
            let r = reference(x, v);
            let d = g.at(ix, iv) - r;
            err += wx * wv[iv] * d * d;
            norm += wx * wv[iv] * r * r;
        }
    }
    if relative {
        if norm == 0.0 {
            return Err(Error::InvalidConfig("reference has zero norm".into()));
        }
        Ok((err / norm).sqrt())
    } else {
        Ok(err.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesDiagnostics {
    pub mass: f64,
    pub momentum: f64,
    pub kinetic: f64,
    pub alpha: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub species: Vec<SpeciesDiagnostics>,
    pub potential: f64,
    /// Largest relative mass change over species.
    pub mass_err: f64,
    pub momentum_err: f64,
    pub energy_err: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub e_l2: f64,
}

impl DiagnosticsRecord {
    pub fn total_momentum(&self) -> f64 {
        self.species.iter().map(|s| s.momentum).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.species.iter().map(|s| s.kinetic).sum::<f64>() + self.potential
    }
}

/// Initial values that errors are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mass: Vec<f64>,
    pub momentum: f64,
    /// `sum_s |P_s(0)|`; total momentum is often zero by symmetry, so
    /// momentum errors are scaled by this instead.
    pub momentum_scale: f64,
    pub energy: f64,
}

impl Baseline {
    pub fn of(state: &SpectralState) -> Result<Self> {
        let n = state.species.len();
        let mass = (0..n).map(|s| mass(state, s)).collect::<Result<Vec<_>>>()?;
        let per: Vec<f64> = (0..n).map(|s| species_momentum(state, s)).collect::<Result<_>>()?;
        Ok(Baseline {
            mass,
            momentum: per.iter().sum(),
            momentum_scale: per.iter().map(|p| p.abs()).sum(),
            energy: total_energy(state)?,
        })
    }
}

fn rel(now: f64, then: f64, scale: f64) -> f64 {
    let d = (now - then).abs();
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Full record for the current state. Extrema are NaN without a window.
pub fn record(state: &SpectralState, baseline: &Baseline, window: Option<&ExtremaWindow>) -> Result<DiagnosticsRecord> {
    let mut species = Vec::with_capacity(state.species.len());
    let mut mass_err = 0.0_f64;
    for (s, sp) in state.species.iter().enumerate() {
        let m = mass(state, s)?;
        let m0 = baseline.mass.get(s).copied().ok_or(Error::NoSuchSpecies(s))?;
        mass_err = mass_err.max(rel(m, m0, m0.abs()));
        species.push(SpeciesDiagnostics {
            mass: m,
            momentum: species_momentum(state, s)?,
            kinetic: kinetic_energy(state, s)?,
            alpha: sp.basis.alpha,
            u: sp.basis.u,
        });
    }
    let potential = potential_energy(&state.field, state.length);
    let (f_min, f_max) = match window {
        Some(w) => f_extrema(state, w)?,
        None => (f64::NAN, f64::NAN),
    };
    let mut rec = DiagnosticsRecord {
        t: state.time,
        species,
        potential,
        mass_err,
        momentum_err: 0.0,
        energy_err: 0.0,
        f_min,
        f_max,
        e_l2: field_l2(&state.field, state.length),
    };
    rec.momentum_err = rel(rec.total_momentum(), baseline.momentum, baseline.momentum_scale);
    rec.energy_err = rel(rec.total_energy(), baseline.energy, baseline.energy.abs());
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::HermiteBasisParams;
    use crate::state::{CoeffMatrix, SpeciesInfo, SpeciesState};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn beam(u: f64) -> SpectralState {
        let mut coeffs = CoeffMatrix::zeros(4, 2);
        coeffs.set(0, 0, Complex64::new(1.0, 0.0));
        SpectralState {
            length: 2.0 * PI,
            species: vec![SpeciesState {
                info: SpeciesInfo { name: "e".into(), charge: -1.0, mass: 1.0 },
                basis: HermiteBasisParams::new(0.5, u).unwrap(),
                coeffs,
            }],
            field: vec![Complex64::new(0.0, 0.0); 3],
            time: 0.0,
        }
    }

    #[test]
    fn beam_mass_momentum_energy() {
        let st = beam(1.0);
        assert_relative_eq!(mass(&st, 0).unwrap(), PI, max_relative = 1e-15);
        assert_relative_eq!(momentum(&st).unwrap(), PI, max_relative = 1e-15);
        assert_relative_eq!(kinetic_energy(&st, 0).unwrap(), 0.5 * PI * 1.125, max_relative = 1e-15);
        assert_eq!(potential_energy(&st.field, st.length), 0.0);
    }

    #[test]
    fn zero_state() {
        let mut st = beam(0.0);
        st.species[0].coeffs = CoeffMatrix::zeros(4, 2);
        assert_eq!(mass(&st, 0).unwrap(), 0.0);
        assert_eq!(momentum(&st).unwrap(), 0.0);
    }

    #[test]
    fn parseval_matches_grid_quadrature() {
        let field = vec![Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.2), Complex64::new(0.0, 0.05)];
        let l = 3.7;
        let xs = periodic_grid(l, 1024);
        let quad: f64 = xs
            .iter()
            .map(|&x| {
                let mut e = 0.0;
                for (k, c) in field.iter().enumerate().skip(1) {
                    e += 2.0 * (c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x / l)).re;
                }
                0.5 * e * e * l / 1024.0
            })
            .sum();
        assert_relative_eq!(potential_energy(&field, l), quad, max_relative = 1e-10);
        assert_relative_eq!(field_l2(&field, l), (2.0 * quad).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn maxwellian_extrema_nonnegative() {
        let st = beam(0.2);
        let (lo, hi) = f_extrema(&st, &ExtremaWindow::standard(vec![0])).unwrap();
        assert!(lo >= 0.0);
        assert!(hi <= 2.0 / PI.sqrt());
    }

    #[test]
    fn self_l2_error_vanishes() {
        let st = beam(0.3);
        let grid = ErrorGrid::around(st.length, 0.5, 0.3);
        let f = |_: f64, v: f64| {
            let xi = (v - 0.3) / 0.5;
            (-xi * xi).exp() / PI.sqrt()
        };
        assert!(l2_error(&st, &[0], f, &grid, true).unwrap() < 1e-14);
    }

    #[test]
    fn record_errors_are_zero_at_baseline() {
        let st = beam(1.0);
        let b = Baseline::of(&st).unwrap();
        let r = record(&st, &b, None).unwrap();
        assert_eq!(r.mass_err, 0.0);
        assert_eq!(r.momentum_err, 0.0);
        assert_eq!(r.energy_err, 0.0);
        assert!(r.f_min.is_nan());
    }
}
