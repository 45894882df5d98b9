//! Initial conditions and manufactured solutions.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{aw_hermite_into, normalized_hermite_polys, HermiteBasisParams};
use crate::quadrature::gauss_hermite_rule;
use crate::residual::{poisson_field, SourceTerm};
use crate::state::{linspace, CoeffMatrix, SpeciesInfo, SpeciesState, SpectralState};
use crate::transform::build_transform;

// ---------------------------------------------------------------------------
// two-stream instability

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoStreamParams {
    pub epsilon: f64,
    pub n0: [f64; 2],
    pub alpha_e: [f64; 2],
    pub u_e: [f64; 2],
    /// `m_i / m_e`
    pub mass_ratio: f64,
    /// `T_i / T_e`
    pub temperature_ratio: f64,
    pub length: f64,
}

impl Default for TwoStreamParams {
    fn default() -> Self {
        TwoStreamParams {
            epsilon: 1e-3,
            n0: [0.5, 0.5],
            alpha_e: [0.5, 0.5],
            u_e: [1.0, -1.0],
            mass_ratio: 1836.0,
            temperature_ratio: 1.0,
            length: 2.0 * PI,
        }
    }
}

impl TwoStreamParams {
    pub fn alpha_ion(&self) -> f64 {
        (2.0 * self.temperature_ratio / self.mass_ratio).sqrt()
    }
}

/// Two counter-streaming electron beams and an ion background, each species
/// in its own basis. Beam `b` is
/// `n0/(sqrt(pi) alpha) (1 + eps/2 cos(2 pi x / L)) exp(-((v - u)/alpha)^2)`.
pub fn two_stream_init(p: &TwoStreamParams, nv: usize, nx: usize) -> Result<SpectralState> {
    if nx < 1 {
        return Err(Error::InvalidConfig("two-stream needs nx >= 1".into()));
    }
    let mut species = Vec::with_capacity(3);
    for b in 0..2 {
        let basis = HermiteBasisParams::new(p.alpha_e[b], p.u_e[b])?;
        let mut coeffs = CoeffMatrix::zeros(nv, nx);
        coeffs.set(0, 0, Complex64::new(p.n0[b] / basis.alpha, 0.0));
        coeffs.set(0, 1, Complex64::new(p.n0[b] * p.epsilon / (4.0 * basis.alpha), 0.0));
        species.push(SpeciesState {
            info: SpeciesInfo { name: format!("electron{}", b + 1), charge: -1.0, mass: 1.0 },
            basis,
            coeffs,
        });
    }
    let ion = HermiteBasisParams::new(p.alpha_ion(), 0.0)?;
    let mut coeffs = CoeffMatrix::zeros(nv, nx);
    coeffs.set(0, 0, Complex64::new(1.0 / ion.alpha, 0.0));
    species.push(SpeciesState { info: SpeciesInfo { name: "ion".into(), charge: 1.0, mass: p.mass_ratio }, basis: ion, coeffs });

    let mut state = SpectralState { length: p.length, species, field: vec![Complex64::new(0.0, 0.0); nx + 1], time: 0.0 };
    state.field = poisson_field(&state)?;
    Ok(state)
}

// ---------------------------------------------------------------------------
// static expansion of a shifted Gaussian

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub coeffs: Vec<f64>,
    pub v: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub relative_error: f64,
}

/// Expands `exp(-((v - u0)/alpha0)^2)` in `n_modes` AW Hermite functions of
/// the fixed basis `(alpha = 1, u = 0)` and measures the relative discrete L2
/// error on `grid_points` equispaced points of `[v_min, v_max]`.
///
/// The coefficients `C_n = int f h_n(v) dv` are polynomial moments of a
/// Gaussian, so a Gauss–Hermite rule in `(v - u0)/alpha0` gets them exactly.
pub fn expansion_demo(
    u0: f64,
    alpha0: f64,
    n_modes: usize,
    v_min: f64,
    v_max: f64,
    grid_points: usize,
) -> Result<ExpansionResult> {
    if n_modes == 0 || !(alpha0 > 0.0) || grid_points < 2 || !(v_max > v_min) {
        return Err(Error::InvalidConfig("bad expansion demo parameters".into()));
    }
    let nv = n_modes - 1;
    let rule = gauss_hermite_rule(n_modes + 2)?;
    let mut coeffs = vec![0.0; n_modes];
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let h = normalized_hermite_polys(u0 + alpha0 * z, nv);
        for (c, hn) in coeffs.iter_mut().zip(&h) {
            *c += alpha0 * w * hn;
        }
    }

    let v = linspace(v_min, v_max, grid_points);
    let mut psi = vec![0.0; n_modes];
    let mut exact = Vec::with_capacity(grid_points);
    let mut approx = Vec::with_capacity(grid_points);
    let (mut num, mut den) = (0.0, 0.0);
    for &vi in &v {
        aw_hermite_into(vi, &mut psi);
        let fa: f64 = coeffs.iter().zip(&psi).map(|(c, p)| c * p).sum();
        let z = (vi - u0) / alpha0;
        let fe = (-z * z).exp();
        num += (fa - fe) * (fa - fe);
        den += fe * fe;
        exact.push(fe);
        approx.push(fa);
    }
    Ok(ExpansionResult { coeffs, v, exact, approx, relative_error: (num / den).sqrt() })
}

// ---------------------------------------------------------------------------
// manufactured solutions

/// Time profiles of the exact solution's scaling `beta(t)` and shift `w(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MmsProfile {
    /// `beta = beta0 + beta_rate t`, `w = w0 + w_rate t`
    Linear { beta0: f64, beta_rate: f64, w0: f64, w_rate: f64 },
    /// `beta = 1.2 + tanh(t - 5)`, `w = 0`
    Tanh,
}

impl MmsProfile {
    pub fn stationary() -> Self {
        MmsProfile::Linear { beta0: 1.0, beta_rate: 0.0, w0: 0.0, w_rate: 0.0 }
    }

    pub fn growing() -> Self {
        MmsProfile::Linear { beta0: 1.0, beta_rate: 1.0, w0: 0.0, w_rate: 0.0 }
    }

    pub fn beta(&self, t: f64) -> f64 {
        match *self {
            MmsProfile::Linear { beta0, beta_rate, .. } => beta0 + beta_rate * t,
            MmsProfile::Tanh => 1.2 + (t - 5.0).tanh(),
        }
    }

    pub fn dbeta(&self, t: f64) -> f64 {
        match *self {
            MmsProfile::Linear { beta_rate, .. } => beta_rate,
            MmsProfile::Tanh => {
                let c = (t - 5.0).cosh();
                1.0 / (c * c)
            }
        }
    }

    pub fn w(&self, t: f64) -> f64 {
        match *self {
            MmsProfile::Linear { w0, w_rate, .. } => w0 + w_rate * t,
            MmsProfile::Tanh => 0.0,
        }
    }

    pub fn dw(&self, _t: f64) -> f64 {
        match *self {
            MmsProfile::Linear { w_rate, .. } => w_rate,
            MmsProfile::Tanh => 0.0,
        }
    }

    pub fn basis(&self, t: f64) -> Result<HermiteBasisParams> {
        HermiteBasisParams::new(self.beta(t), self.w(t))
    }
}

/// One nonzero coefficient at a signed wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseCoeff {
    pub n: usize,
    pub k: i64,
    pub value: Complex64,
}

fn with_conjugates(half: &[(usize, i64, Complex64)]) -> Vec<SparseCoeff> {
    let mut out = Vec::with_capacity(2 * half.len());
    for &(n, k, value) in half {
        out.push(SparseCoeff { n, k, value });
        if k != 0 {
            out.push(SparseCoeff { n, k: -k, value: value.conj() });
        }
    }
    out
}

/// `f_ex = (2 - cos(2x - 2 pi t)) pi^{-1/2} exp(-((v - w)/beta)^2)`, on `[0, 2 pi)`.
pub fn mms_exact_f(profile: &MmsProfile, t: f64, x: f64, v: f64) -> f64 {
    let z = (v - profile.w(t)) / profile.beta(t);
    (2.0 - (2.0 * x - 2.0 * PI * t).cos()) * (-z * z).exp() / PI.sqrt()
}

/// `S = d_t f_ex + v d_x f_ex`, the forcing that makes `f_ex` solve the field-free equation.
pub fn mms_source_f(profile: &MmsProfile, t: f64, x: f64, v: f64) -> f64 {
    let (beta, w) = (profile.beta(t), profile.w(t));
    let z = (v - w) / beta;
    let g = (-z * z).exp() / PI.sqrt();
    let theta = 2.0 * x - 2.0 * PI * t;
    let a = 2.0 - theta.cos();
    let dta = -2.0 * PI * theta.sin();
    let dxa = 2.0 * theta.sin();
    let dtg = g * (2.0 * z * profile.dw(t) / beta + 2.0 * z * z * profile.dbeta(t) / beta);
    dta * g + a * dtg + v * dxa * g
}

/// Exact coefficients of `f_ex` in its own basis `(beta(t), w(t))`.
pub fn mms_exact_coeffs(_profile: &MmsProfile, t: f64) -> Vec<SparseCoeff> {
    let ph = Complex64::from_polar(1.0, -2.0 * PI * t);
    with_conjugates(&[(0, 0, Complex64::new(2.0, 0.0)), (0, 2, -0.5 * ph)])
}

/// Coefficients `R_{n,k}` of the source in the basis `(beta(t), w(t))`.
pub fn mms_source_coeffs(profile: &MmsProfile, t: f64) -> Vec<SparseCoeff> {
    let (beta, w) = (profile.beta(t), profile.w(t));
    let (db, dw) = (profile.dbeta(t), profile.dw(t));
    let ph = Complex64::from_polar(1.0, -2.0 * PI * t);
    let i = Complex64::i();
    with_conjugates(&[
        (0, 0, Complex64::new(2.0 * db / beta, 0.0)),
        (1, 0, Complex64::new(2.0 * SQRT_2 * dw / beta, 0.0)),
        (2, 0, Complex64::new(2.0 * SQRT_2 * db / beta, 0.0)),
        (0, 2, (i * PI - i * w - 0.5 * db / beta) * ph),
        (1, 2, -(i * beta + dw / beta) * ph / SQRT_2),
        (2, 2, -(db / beta) * ph / SQRT_2),
    ])
}

fn dense_from_sparse(entries: &[SparseCoeff], nv: usize, nx: usize) -> Result<CoeffMatrix> {
    let mut c = CoeffMatrix::zeros(nv, nx);
    for e in entries.iter().filter(|e| e.k >= 0) {
        if e.n > nv || e.k as usize > nx {
            return Err(Error::InvalidConfig(format!("mode (n={}, k={}) outside nv={nv}, nx={nx}", e.n, e.k)));
        }
        c.set(e.n, e.k as usize, e.value);
    }
    Ok(c)
}

/// Source projected onto the solver basis: `S_{n,k} = sum_{m <= 2} P_{n,m} R_{m,k}`.
pub fn mms_projected_source(
    profile: &MmsProfile,
    t: f64,
    basis: HermiteBasisParams,
    nv: usize,
    nx: usize,
) -> Result<CoeffMatrix> {
    let work = nv.max(2);
    let r = dense_from_sparse(&mms_source_coeffs(profile, t), work, nx)?;
    let p = build_transform(profile.basis(t)?, basis, work)?;
    let full = p.apply_to_coeffs(&r)?;
    let mut out = CoeffMatrix::zeros(nv, nx);
    for n in 0..=nv {
        out.row_mut(n).copy_from_slice(full.row(n));
    }
    Ok(out)
}

/// Single-species state holding `f_ex(0)` projected onto `basis`.
pub fn mms_initial_state(profile: &MmsProfile, basis: HermiteBasisParams, nv: usize, nx: usize) -> Result<SpectralState> {
    if nx < 2 {
        return Err(Error::InvalidConfig("manufactured solution needs nx >= 2".into()));
    }
    let exact = dense_from_sparse(&mms_exact_coeffs(profile, 0.0), nv, nx)?;
    let p = build_transform(profile.basis(0.0)?, basis, nv)?;
    let coeffs = p.apply_to_coeffs(&exact)?;
    Ok(SpectralState {
        length: 2.0 * PI,
        species: vec![SpeciesState { info: SpeciesInfo { name: "electron".into(), charge: -1.0, mass: 1.0 }, basis, coeffs }],
        field: vec![Complex64::new(0.0, 0.0); nx + 1],
        time: 0.0,
    })
}

/// [`SourceTerm`] feeding the projected manufactured source to species 0.
#[derive(Debug, Clone, Copy)]
pub struct MmsSource {
    pub profile: MmsProfile,
}

impl SourceTerm for MmsSource {
    fn coefficients(
        &self,
        t: f64,
        species: usize,
        basis: HermiteBasisParams,
        nv: usize,
        nx: usize,
    ) -> Result<Option<CoeffMatrix>> {
        if species != 0 {
            return Ok(None);
        }
        mms_projected_source(&self.profile, t, basis, nv, nx).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{f_extrema, momentum, ExtremaWindow};
    use crate::state::reconstruct_f;
    use approx::assert_relative_eq;

    #[test]
    fn two_stream_coefficients() {
        let st = two_stream_init(&TwoStreamParams::default(), 8, 4).unwrap();
        assert_eq!(st.species.len(), 3);
        for b in 0..2 {
            assert_eq!(st.species[b].coeffs.get(0, 0).re, 1.0);
            assert_relative_eq!(st.species[b].coeffs.get(0, 1).re, 2.5e-4, max_relative = 1e-14);
        }
        assert_eq!(st.species[2].coeffs.get(0, 1), Complex64::new(0.0, 0.0));
        assert!(momentum(&st).unwrap().abs() < 1e-14);
    }

    #[test]
    fn two_stream_peak() {
        let st = two_stream_init(&TwoStreamParams::default(), 8, 4).unwrap();
        let (lo, hi) = f_extrema(&st, &ExtremaWindow::electrons(&st)).unwrap();
        // beam peak n0/(sqrt(pi) alpha) (1 + eps/2), up to the window's v sampling
        let peak = 1.0 / PI.sqrt() * (1.0 + 5e-4);
        assert!((hi - peak).abs() < 1e-4, "{hi}");
        assert!((0.0..1e-6).contains(&lo));
    }

    #[test]
    fn expansion_exact_for_own_basis() {
        let r = expansion_demo(0.0, 1.0, 30, -2.0, 5.0, 2000).unwrap();
        assert!(r.relative_error < 1e-12);
    }

    #[test]
    fn mms_tables_at_t0() {
        let c = mms_exact_coeffs(&MmsProfile::stationary(), 0.0);
        assert_eq!(c.len(), 3);
        assert!(c.iter().any(|e| e.n == 0 && e.k == -2 && (e.value - Complex64::new(-0.5, 0.0)).norm() < 1e-15));

        let r = mms_source_coeffs(&MmsProfile::stationary(), 0.3);
        let ph = Complex64::from_polar(1.0, -2.0 * PI * 0.3);
        let get = |n: usize, k: i64| r.iter().find(|e| e.n == n && e.k == k).unwrap().value;
        assert_eq!(get(0, 0), Complex64::new(0.0, 0.0));
        assert!((get(1, 2) - (-Complex64::i() / SQRT_2) * ph).norm() < 1e-15);
        assert!((get(0, 2) - Complex64::i() * PI * ph).norm() < 1e-14);
        assert_eq!(get(1, -2), get(1, 2).conj());

        let r = mms_source_coeffs(&MmsProfile::growing(), 0.0);
        let get = |n: usize, k: i64| r.iter().find(|e| e.n == n && e.k == k).unwrap().value;
        assert_relative_eq!(get(0, 0).re, 2.0);
        assert_relative_eq!(get(2, 0).re, 2.0 * SQRT_2);
    }

    fn sample_sparse(entries: &[SparseCoeff], basis: HermiteBasisParams, x: f64, v: f64) -> f64 {
        let mut psi = vec![0.0; 3];
        aw_hermite_into(basis.xi(v), &mut psi);
        let s: Complex64 = entries.iter().map(|e| e.value * psi[e.n] * Complex64::from_polar(1.0, e.k as f64 * x)).sum();
        assert!(s.im.abs() < 1e-12);
        s.re
    }

    #[test]
    fn source_table_matches_pointwise_source() {
        let profiles = [
            MmsProfile::stationary(),
            MmsProfile::growing(),
            MmsProfile::Linear { beta0: 0.8, beta_rate: -0.3, w0: 0.4, w_rate: 1.7 },
            MmsProfile::Tanh,
        ];
        for prof in profiles {
            for &t in &[0.0, 0.37, 1.1] {
                let r = mms_source_coeffs(&prof, t);
                let c = mms_exact_coeffs(&prof, t);
                let basis = prof.basis(t).unwrap();
                for &x in &[0.0, 0.9, 2.5, 5.1] {
                    for &v in &[-2.0, -0.3, 0.5, 1.9] {
                        let s = sample_sparse(&r, basis, x, v);
                        assert!((s - mms_source_f(&prof, t, x, v)).abs() < 1e-10);
                        let f = sample_sparse(&c, basis, x, v);
                        assert!((f - mms_exact_f(&prof, t, x, v)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn projected_source_identity_and_fill_in() {
        let prof = MmsProfile::growing();
        let own = prof.basis(0.5).unwrap();
        let s = mms_projected_source(&prof, 0.5, own, 6, 3).unwrap();
        let r = dense_from_sparse(&mms_source_coeffs(&prof, 0.5), 6, 3).unwrap();
        for (a, b) in s.as_slice().iter().zip(r.as_slice()) {
            assert!((a - b).norm() < 1e-15);
        }
        let other = HermiteBasisParams::new(1.1, 0.2).unwrap();
        let s = mms_projected_source(&prof, 0.5, other, 6, 3).unwrap();
        assert!(s.get(4, 2).norm() > 0.0);
    }

    #[test]
    fn initial_state_reproduces_exact_f() {
        let prof = MmsProfile::growing();
        let basis = HermiteBasisParams::new(1.0, 0.0).unwrap();
        let st = mms_initial_state(&prof, basis, 4, 4).unwrap();
        let xs = [0.3, 1.7];
        let vs = [-1.0, 0.2, 1.4];
        let g = reconstruct_f(&st, 0, &xs, &vs).unwrap();
        for (ix, &x) in xs.iter().enumerate() {
            for (iv, &v) in vs.iter().enumerate() {
                assert!((g.at(ix, iv) - mms_exact_f(&prof, 0.0, x, v)).abs() < 1e-13);
            }
        }
    }
}
