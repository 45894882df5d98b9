//! Implicit-midpoint residual of the Fourier–Hermite Vlasov–Poisson system.
//!
//! The unknown of a time step is the coefficient set at the new time level,
//! flattened into a real vector. The electric field is not an unknown: it is
//! recomputed from Poisson's equation at both time levels and averaged.
//!
//! Layout of the real vector: species-major, then Hermite index `n`, then
//! `[Re C_{n,0}, Re C_{n,1}, Im C_{n,1}, ..., Re C_{n,Nx}, Im C_{n,Nx}]`.
//! `Im C_{n,0}` is not stored (reality of `f`).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::HermiteBasisParams;
use crate::krylov::Preconditioner;
use crate::state::{CoeffMatrix, SpeciesInfo, SpectralState};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Absolute bound on `|sum_s q alpha C_{0,0}|`.
pub const NEUTRALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    /// Self-consistent field from Poisson's equation.
    Poisson,
    /// `E = 0` identically (manufactured-solution runs).
    Zero,
}

/// External forcing added to the right-hand side, expressed in the solver basis.
pub trait SourceTerm {
    /// Source coefficients for `species` at time `t` in basis `basis`,
    /// or `None` if that species is unforced.
    fn coefficients(
        &self,
        t: f64,
        species: usize,
        basis: HermiteBasisParams,
        nv: usize,
        nx: usize,
    ) -> Result<Option<CoeffMatrix>>;
}

/// `-nu n(n-1)(n-2) / ((Nv-1)(Nv-2)(Nv-3))`; zero for `n < 3` or `nu = 0`.
pub fn collision_coefficient(n: usize, nv: usize, nu: f64) -> f64 {
    if nu == 0.0 || n < 3 {
        return 0.0;
    }
    let (n, nv) = (n as f64, nv as f64);
    -nu * n * (n - 1.0) * (n - 2.0) / ((nv - 1.0) * (nv - 2.0) * (nv - 3.0))
}

/// Truncated convolution `out_k = sum_l a_l b_{k-l}` for `k = 0..=Nx`, where
/// both inputs hold `k >= 0` and negative indices follow by conjugation.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let nx = a.len() - 1;
    let af = to_signed(a);
    let bf = to_signed(b);
    let mut out = vec![ZERO; nx + 1];
    convolve_signed(&af, &bf, nx, &mut out);
    Ok(out)
}

/// `[x_{-Nx}, ..., x_{Nx}]` from the `k >= 0` half.
fn to_signed(half: &[Complex64]) -> Vec<Complex64> {
    let nx = half.len() - 1;
    let mut full = vec![ZERO; 2 * nx + 1];
    for (k, c) in half.iter().enumerate() {
        full[nx + k] = *c;
        full[nx - k] = c.conj();
    }
    full
}

fn fill_signed(half: &[Complex64], full: &mut [Complex64]) {
    let nx = half.len() - 1;
    for (k, c) in half.iter().enumerate() {
        full[nx + k] = *c;
        full[nx - k] = c.conj();
    }
}

/// Signed-storage convolution, keeping only the `k >= 0` outputs.
fn convolve_signed(af: &[Complex64], bf: &[Complex64], nx: usize, out: &mut [Complex64]) {
    let nx_i = nx as i64;
    for (k, o) in out.iter_mut().enumerate() {
        let k = k as i64;
        let mut acc = ZERO;
        // l from k - Nx to Nx keeps |k - l| <= Nx
        for l in (k - nx_i)..=nx_i {
            acc += af[(l + nx_i) as usize] * bf[(k - l + nx_i) as usize];
        }
        *o = acc;
    }
}

fn charge_density(coeffs: &[&CoeffMatrix], species: &[(SpeciesInfo, HermiteBasisParams)], nx: usize) -> Vec<Complex64> {
    let mut rho = vec![ZERO; nx + 1];
    for (c, (info, basis)) in coeffs.iter().zip(species) {
        let w = info.charge * basis.alpha;
        for (r, v) in rho.iter_mut().zip(c.row(0)) {
            *r += w * v;
        }
    }
    rho
}

fn field_from_density(rho: &[Complex64], length: f64) -> Vec<Complex64> {
    let mut e = vec![ZERO; rho.len()];
    for k in 1..rho.len() {
        let ik = Complex64::new(0.0, 2.0 * PI * k as f64 / length);
        e[k] = rho[k] / ik;
    }
    e
}

fn check_neutrality(rho0: f64) -> Result<()> {
    if rho0.abs() < NEUTRALITY_TOL {
        Ok(())
    } else {
        Err(Error::Neutrality(rho0))
    }
}

/// `E_k = L/(2 pi i k) sum_s q alpha C_{0,k}`, `E_0 = 0`.
pub fn poisson_field(state: &SpectralState) -> Result<Vec<Complex64>> {
    state.validate()?;
    let species: Vec<_> = state.species.iter().map(|s| (s.info.clone(), s.basis)).collect();
    let coeffs: Vec<_> = state.species.iter().map(|s| &s.coeffs).collect();
    let rho = charge_density(&coeffs, &species, state.nx());
    check_neutrality(rho[0].re)?;
    Ok(field_from_density(&rho, state.length))
}

/// Number of real unknowns for the given shape.
pub fn unknown_len(num_species: usize, nv: usize, nx: usize) -> usize {
    num_species * (nv + 1) * (2 * nx + 1)
}

pub fn pack(coeffs: &[CoeffMatrix], out: &mut [f64]) {
    let mut i = 0;
    for c in coeffs {
        for n in 0..=c.nv() {
            let row = c.row(n);
            out[i] = row[0].re;
            i += 1;
            for v in &row[1..] {
                out[i] = v.re;
                out[i + 1] = v.im;
                i += 2;
            }
        }
    }
}

pub fn unpack_into(x: &[f64], coeffs: &mut [CoeffMatrix]) {
    let mut i = 0;
    for c in coeffs.iter_mut() {
        for n in 0..=c.nv() {
            let row = c.row_mut(n);
            row[0] = Complex64::new(x[i], 0.0);
            i += 1;
            for v in row[1..].iter_mut() {
                *v = Complex64::new(x[i], x[i + 1]);
                i += 2;
            }
        }
    }
}

/// Everything that stays frozen during one implicit step.
#[derive(Debug, Clone)]
pub struct ResidualContext {
    pub length: f64,
    pub dt: f64,
    pub nu: f64,
    pub nv: usize,
    pub nx: usize,
    pub field_mode: FieldMode,
    pub species: Vec<(SpeciesInfo, HermiteBasisParams)>,
    pub prev: Vec<CoeffMatrix>,
    /// Field at the previous time level.
    pub prev_field: Vec<Complex64>,
    /// Source at the midpoint time, per species.
    pub source: Vec<Option<CoeffMatrix>>,
    collision: Vec<f64>,
}

impl ResidualContext {
    /// Freezes `state` as the previous level of a step of size `dt`.
    /// The source, if any, is evaluated once at `t + dt/2`.
    pub fn new(state: &SpectralState, dt: f64, nu: f64, field_mode: FieldMode, source: Option<&dyn SourceTerm>) -> Result<Self> {
        state.validate()?;
        if !(dt > 0.0) || !(nu >= 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {dt}, nu = {nu}")));
        }
        let (nv, nx) = (state.nv(), state.nx());
        if nu > 0.0 && nv < 4 {
            return Err(Error::InvalidConfig("collisions need nv >= 4".into()));
        }
        let prev_field = match field_mode {
            FieldMode::Poisson => poisson_field(state)?,
            FieldMode::Zero => vec![ZERO; nx + 1],
        };
        let t_mid = state.time + 0.5 * dt;
        let mut src = Vec::with_capacity(state.species.len());
        for (s, sp) in state.species.iter().enumerate() {
            let c = match source {
                Some(hook) => hook.coefficients(t_mid, s, sp.basis, nv, nx)?,
                None => None,
            };
            if let Some(c) = &c {
                if c.nv() != nv || c.nx() != nx {
                    return Err(Error::DimensionMismatch { expected: nv, got: c.nv() });
                }
            }
            src.push(c);
        }
        Ok(ResidualContext {
            length: state.length,
            dt,
            nu,
            nv,
            nx,
            field_mode,
            species: state.species.iter().map(|s| (s.info.clone(), s.basis)).collect(),
            prev: state.species.iter().map(|s| s.coeffs.clone()).collect(),
            prev_field,
            source: src,
            collision: (0..=nv).map(|n| collision_coefficient(n, nv, nu)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        unknown_len(self.species.len(), self.nv, self.nx)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The previous level, packed; the usual Newton starting point.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        pack(&self.prev, &mut x);
        x
    }

    pub fn unpack(&self, x: &[f64]) -> Result<Vec<CoeffMatrix>> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        let mut c = vec![CoeffMatrix::zeros(self.nv, self.nx); self.species.len()];
        unpack_into(x, &mut c);
        Ok(c)
    }

    /// Field at the level described by `coeffs`. Neutrality is not checked:
    /// the `k = 0` mode is gauged to zero regardless.
    pub fn field_of(&self, coeffs: &[CoeffMatrix]) -> Vec<Complex64> {
        match self.field_mode {
            FieldMode::Zero => vec![ZERO; self.nx + 1],
            FieldMode::Poisson => {
                let refs: Vec<_> = coeffs.iter().collect();
                field_from_density(&charge_density(&refs, &self.species, self.nx), self.length)
            }
        }
    }

    /// Complex residual for every `(species, n, k >= 0)`, including `Im` at `k = 0`.
    pub fn residual_coeffs(&self, next: &[CoeffMatrix]) -> Result<Vec<CoeffMatrix>> {
        if next.len() != self.species.len() {
            return Err(Error::DimensionMismatch { expected: self.species.len(), got: next.len() });
        }
        for c in next {
            if c.nv() != self.nv || c.nx() != self.nx {
                return Err(Error::DimensionMismatch { expected: self.nv, got: c.nv() });
            }
        }
        let (nv, nx) = (self.nv, self.nx);
        let e_next = self.field_of(next);
        let e_mid: Vec<Complex64> = self.prev_field.iter().zip(&e_next).map(|(a, b)| 0.5 * (a + b)).collect();
        let e_full = to_signed(&e_mid);
        let field_on = self.field_mode == FieldMode::Poisson && e_mid.iter().any(|e| *e != ZERO);

        let kprime = 2.0 * PI / self.length;
        let inv_dt = 1.0 / self.dt;
        let mut out = Vec::with_capacity(next.len());
        let mut mid = CoeffMatrix::zeros(nv, nx);
        let mut cfull = vec![ZERO; 2 * nx + 1];
        let mut conv = vec![ZERO; nx + 1];

        for (s, ((info, basis), c1)) in self.species.iter().zip(next).enumerate() {
            let c0 = &self.prev[s];
            for ((m, a), b) in mid.as_mut_slice().iter_mut().zip(c0.as_slice()).zip(c1.as_slice()) {
                *m = 0.5 * (a + b);
            }
            let (alpha, u) = (basis.alpha, basis.u);
            let qm = info.charge / info.mass;
            let mut r = CoeffMatrix::zeros(nv, nx);
            for n in 0..=nv {
                let lo = (n as f64 / 2.0).sqrt() * alpha;
                let hi = ((n + 1) as f64 / 2.0).sqrt() * alpha;
                let accel = (2.0 * n as f64).sqrt() * qm / alpha;
                if n > 0 && field_on {
                    fill_signed(mid.row(n - 1), &mut cfull);
                    convolve_signed(&cfull, &e_full, nx, &mut conv);
                } else {
                    conv.iter_mut().for_each(|c| *c = ZERO);
                }
                let coll = self.collision[n];
                let src = self.source[s].as_ref();
                let row = r.row_mut(n);
                for k in 0..=nx {
                    let cm = mid.get(n, k);
                    let mut stream = u * cm;
                    if n > 0 {
                        stream += lo * mid.get(n - 1, k);
                    }
                    if n < nv {
                        stream += hi * mid.get(n + 1, k);
                    }
                    let ik = Complex64::new(0.0, kprime * k as f64);
                    let mut f = (c1.get(n, k) - c0.get(n, k)) * inv_dt + ik * stream - accel * conv[k] - coll * cm;
                    if let Some(sm) = src {
                        f -= sm.get(n, k);
                    }
                    row[k] = f;
                }
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Packed residual of a packed candidate.
    pub fn residual(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: out.len() });
        }
        let next = self.unpack(x)?;
        let r = self.residual_coeffs(&next)?;
        pack(&r, out);
        Ok(())
    }
}

/// Exact inverse of the field-free linear part of the step Jacobian:
/// for each species and wavenumber, a tridiagonal system in `n` from
/// streaming and collisions. Field coupling is left to the Krylov solver.
#[derive(Debug, Clone)]
pub struct StreamingPreconditioner {
    nv: usize,
    nx: usize,
    num_species: usize,
    /// Per species and `k`: (sub, diag, super) diagonals of length `nv + 1`.
    blocks: Vec<[Vec<Complex64>; 3]>,
}

impl StreamingPreconditioner {
    pub fn new(ctx: &ResidualContext) -> Self {
        let (nv, nx) = (ctx.nv, ctx.nx);
        let kprime = 2.0 * PI / ctx.length;
        let mut blocks = Vec::with_capacity(ctx.species.len() * (nx + 1));
        for (_, basis) in &ctx.species {
            for k in 0..=nx {
                let ik2 = Complex64::new(0.0, 0.5 * kprime * k as f64);
                let mut sub = vec![ZERO; nv + 1];
                let mut diag = vec![ZERO; nv + 1];
                let mut sup = vec![ZERO; nv + 1];
                for n in 0..=nv {
                    diag[n] = Complex64::new(1.0 / ctx.dt - 0.5 * ctx.collision[n], 0.0) + ik2 * basis.u;
                    if n > 0 {
                        sub[n] = ik2 * basis.alpha * (n as f64 / 2.0).sqrt();
                    }
                    if n < nv {
                        sup[n] = ik2 * basis.alpha * ((n + 1) as f64 / 2.0).sqrt();
                    }
                }
                blocks.push([sub, diag, sup]);
            }
        }
        StreamingPreconditioner { nv, nx, num_species: ctx.species.len(), blocks }
    }
}

/// Thomas algorithm; the blocks are diagonally dominant for any `dt` since
/// the off-diagonals are purely imaginary and the diagonal has real part `>= 1/dt`.
fn solve_tridiagonal(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut c = vec![ZERO; n];
    let mut beta = diag[0];
    c[0] = sup[0] / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / beta;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c[i] * next;
    }
}

impl Preconditioner for StreamingPreconditioner {
    fn apply_inv(&self, x: &[f64], y: &mut [f64]) {
        let (nv, nx) = (self.nv, self.nx);
        let block = 2 * nx + 1;
        let mut col = vec![ZERO; nv + 1];
        for s in 0..self.num_species {
            let base = s * (nv + 1) * block;
            for k in 0..=nx {
                for (n, c) in col.iter_mut().enumerate() {
                    let o = base + n * block;
                    *c = if k == 0 { Complex64::new(x[o], 0.0) } else { Complex64::new(x[o + 2 * k - 1], x[o + 2 * k]) };
                }
                let [sub, diag, sup] = &self.blocks[s * (nx + 1) + k];
                solve_tridiagonal(sub, diag, sup, &mut col);
                for (n, c) in col.iter().enumerate() {
                    let o = base + n * block;
                    if k == 0 {
                        y[o] = c.re;
                    } else {
                        y[o + 2 * k - 1] = c.re;
                        y[o + 2 * k] = c.im;
                    }
                }
            }
        }
    }
}
