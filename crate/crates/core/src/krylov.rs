//! Jacobian-free Newton–Krylov: restarted GMRES (modified Gram–Schmidt,
//! Givens rotations, optional right preconditioning) inside an inexact
//! Newton loop with finite-difference Jacobian-vector products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait LinearMap {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// Approximate inverse applied on the right: GMRES solves `A M^{-1} y = b`.
pub trait Preconditioner {
    /// `y = M^{-1} x`
    fn apply_inv(&self, x: &[f64], y: &mut [f64]);
}

/// Wraps a closure as a [`LinearMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnMap { dim, f }
    }
}

impl<F> LinearMap for FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmresLimits {
    pub restart: usize,
    pub max_iters: usize,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    /// `|b - A x| / |b|`
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `A x = b` from a zero initial guess until `|b - A x| <= tol |b|`.
/// Reaching the iteration cap is reported through `converged = false`.
pub fn gmres(
    op: &dyn LinearMap,
    rhs: &[f64],
    tol: f64,
    limits: GmresLimits,
    precond: Option<&dyn Preconditioner>,
) -> Result<GmresOutcome> {
    let n = op.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let bnorm = norm2(rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { solution: x, relative_residual: 0.0, iterations: 0, converged: true });
    }
    if !bnorm.is_finite() {
        return Err(Error::NonFinite("GMRES right-hand side"));
    }

    let restart = limits.restart.max(1);
    let mut total = 0usize;
    let mut r = rhs.to_vec();
    let mut rnorm = bnorm;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];

    while total < limits.max_iters {
        let m = restart.min(limits.max_iters - total);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / rnorm).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = rnorm;

        let mut used = 0;
        let mut done = false;
        for j in 0..m {
            let vj = &basis[j];
            let input: &[f64] = match precond {
                Some(p) => {
                    p.apply_inv(vj, &mut z);
                    &z
                }
                None => vj,
            };
            op.apply(input, &mut w)?;
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("GMRES matvec"));
            }
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(&w, vi);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm2(&w);
            h[j + 1][j] = hnext;

            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            }
            h[j][j] = cs[j] * h[j][j] + sn[j] * h[j + 1][j];
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            used = j + 1;
            total += 1;
            let est = g[j + 1].abs() / bnorm;
            if est <= tol || hnext <= 1e-14 * bnorm {
                done = true;
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution on the rotated Hessenberg system
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in i + 1..used {
                s -= h[i][k] * y[k];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        let mut update = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&basis) {
            for (u, v) in update.iter_mut().zip(vi) {
                *u += yi * v;
            }
        }
        match precond {
            Some(p) => {
                p.apply_inv(&update, &mut z);
                for (xi, zi) in x.iter_mut().zip(&z) {
                    *xi += zi;
                }
            }
            None => {
                for (xi, ui) in x.iter_mut().zip(&update) {
                    *xi += ui;
                }
            }
        }

        // true residual for the restart and the report
        op.apply(&x, &mut w)?;
        for ((ri, bi), wi) in r.iter_mut().zip(rhs).zip(&w) {
            *ri = bi - wi;
        }
        rnorm = norm2(&r);
        let rel = rnorm / bnorm;
        if done || rel <= tol {
            return Ok(GmresOutcome {
                solution: x,
                relative_residual: rel,
                iterations: total,
                converged: rel <= tol * 1.0001 || done && rel <= tol.max(1e-13),
            });
        }
        if rnorm == 0.0 {
            break;
        }
    }
    let rel = rnorm / bnorm;
    Ok(GmresOutcome { solution: x, relative_residual: rel, iterations: total, converged: rel <= tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_newton: usize,
    pub max_gmres: usize,
    /// Cap on the inner (linear) relative tolerance.
    pub eta_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub fd_epsilon_scale: f64,
    pub gmres_restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_newton: 500,
            max_gmres: 1000,
            eta_max: 0.9,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            fd_epsilon_scale: 1.0,
            gmres_restart: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.fd_epsilon_scale > 0.0
            && self.eta_max > 0.0
            && self.eta_max < 1.0
            && self.max_newton > 0
            && self.max_gmres > 0
            && self.gmres_restart > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid solver configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct NewtonStats {
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub residual_evals: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub converged: bool,
    pub stats: NewtonStats,
}

/// Inexact Newton with `J v ~ (F(x + s v) - F(x)) / s`.
///
/// Stops when `|F| <= abs_tol + rel_tol |F(x0)|`. On hitting `max_newton`
/// the iterate with the smallest residual is returned with `converged = false`.
pub fn newton_solve<F>(
    residual: F,
    x0: Vec<f64>,
    cfg: &SolverConfig,
    precond: Option<&dyn Preconditioner>,
) -> Result<NewtonOutcome>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    let n = x0.len();
    let mut stats = NewtonStats::default();
    let mut x = x0;
    let mut f = vec![0.0; n];
    residual(&x, &mut f)?;
    stats.residual_evals += 1;
    let mut fnorm = norm2(&f);
    if !fnorm.is_finite() {
        return Err(Error::NonFinite("Newton residual"));
    }
    let f0 = fnorm;
    let target = cfg.abs_tol + cfg.rel_tol * f0;
    stats.initial_residual = f0;

    let mut best = (fnorm, x.clone());
    let sqrt_eps = f64::EPSILON.sqrt();
    let limits = GmresLimits { restart: cfg.gmres_restart, max_iters: cfg.max_gmres };
    let mut evals = std::cell::Cell::new(0usize);

    while fnorm > target && stats.newton_iterations < cfg.max_newton {
        let mut eta = (0.5 * (fnorm / f0).sqrt()).min(cfg.eta_max);
        // no point solving far below what the outer tolerance needs
        eta = eta.max((0.5 * target / fnorm).min(cfg.eta_max));

        let xnorm = norm2(&x);
        let fx = f.clone();
        let xr = &x;
        let jv = FnMap::new(n, |v: &[f64], out: &mut [f64]| {
            let vnorm = norm2(v);
            if vnorm == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return Ok(());
            }
            let sigma = cfg.fd_epsilon_scale * sqrt_eps * (1.0 + xnorm) / vnorm;
            let xp: Vec<f64> = xr.iter().zip(v).map(|(a, b)| a + sigma * b).collect();
            residual(&xp, out)?;
            evals.set(evals.get() + 1);
            for (o, f) in out.iter_mut().zip(&fx) {
                *o = (*o - f) / sigma;
            }
            Ok(())
        });
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let lin = gmres(&jv, &rhs, eta, limits, precond)?;
        stats.gmres_iterations += lin.iterations;

        for (xi, di) in x.iter_mut().zip(&lin.solution) {
            *xi += di;
        }
        residual(&x, &mut f)?;
        stats.residual_evals += 1;
        fnorm = norm2(&f);
        if !fnorm.is_finite() {
            return Err(Error::NonFinite("Newton residual"));
        }
        stats.newton_iterations += 1;
        if fnorm < best.0 {
            best = (fnorm, x.clone());
        }
        log::trace!(
            "newton {}: |F| = {fnorm:e} (eta {eta:.2e}, gmres {} its, rel {:.2e})",
            stats.newton_iterations,
            lin.iterations,
            lin.relative_residual
        );
    }
    stats.residual_evals += *evals.get_mut();

    let converged = fnorm <= target;
    if !converged {
        x = best.1;
        fnorm = best.0;
    }
    stats.final_residual = fnorm;
    Ok(NewtonOutcome { x, converged, stats })
}
