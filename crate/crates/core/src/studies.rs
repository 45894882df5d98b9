//! Manufactured-solution studies: the standard test cases, time-step
//! convergence sweeps and adaptivity-tolerance sweeps.

use serde::Serialize;

use crate::diagnostics::{l2_error, ErrorGrid};
use crate::driver::{ExtremaSpec, PreconditionerKind, RunConfig, Scenario, Simulation};
use crate::error::{Error, Result};
use crate::krylov::SolverConfig;
use crate::scenarios::{mms_exact_f, MmsProfile};
use crate::state::{steps_for, GridConfig, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsCase {
    pub profile: MmsProfile,
    pub alpha0: f64,
    pub u0: f64,
    pub adaptive: bool,
    pub u_tol: f64,
    pub alpha_tol: f64,
    pub nv: usize,
    pub nx: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl MmsCase {
    /// Stationary `beta = 1`, `w = 0`, solved in the matching basis.
    pub fn case1() -> Self {
        MmsCase {
            profile: MmsProfile::stationary(),
            alpha0: 1.0,
            u0: 0.0,
            adaptive: false,
            u_tol: 1e-2,
            alpha_tol: 1e-1,
            nv: 8,
            nx: 4,
            dt: 1e-2,
            t_final: 1.0,
        }
    }

    /// `beta = 1 + t` in the fixed basis `alpha = 1`.
    pub fn case2() -> Self {
        MmsCase { profile: MmsProfile::growing(), nv: 16, ..Self::case1() }
    }

    /// `beta = 1 + t` with adaptive `alpha`.
    pub fn case3() -> Self {
        MmsCase { adaptive: true, alpha_tol: 1e-2, ..Self::case2() }
    }

    /// `beta = 1.2 + tanh(t - 5)` on `(0, 10]`, adaptive with the given tolerance.
    pub fn tanh(alpha_tol: f64) -> Self {
        let profile = MmsProfile::Tanh;
        MmsCase { profile, alpha0: profile.beta(0.0), adaptive: true, alpha_tol, nv: 16, t_final: 10.0, ..Self::case1() }
    }

    pub fn to_run_config(&self) -> RunConfig {
        RunConfig {
            grid: GridConfig {
                length: 2.0 * std::f64::consts::PI,
                nv: self.nv,
                nx: self.nx,
                dt: self.dt,
                t_final: self.t_final,
                nu: 0.0,
                u_tol: self.u_tol,
                alpha_tol: self.alpha_tol,
            },
            solver: SolverConfig::default(),
            scenario: Scenario::Mms { profile: self.profile, alpha0: self.alpha0, u0: self.u0 },
            adaptive: self.adaptive,
            preconditioner: PreconditionerKind::None,
            extrema: ExtremaSpec::Off,
            output_dir: None,
            snapshot_every: 1,
        }
    }
}

/// Relative L2 error against the exact solution at the state's time, on
/// 256 x 512 points over `u +- 8 alpha` of the solver basis.
pub fn mms_error(state: &SpectralState, profile: &MmsProfile) -> Result<f64> {
    let b = state.species(0)?.basis;
    let grid = ErrorGrid::around(state.length, b.alpha, b.u);
    let t = state.time;
    l2_error(state, &[0], |x, v| mms_exact_f(profile, t, x, v), &grid, true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsSample {
    pub t: f64,
    pub alpha: f64,
    pub u: f64,
    pub beta: f64,
    pub w: f64,
    /// Present only at sampled steps.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsOutcome {
    pub samples: Vec<MmsSample>,
    pub final_error: f64,
}

impl MmsOutcome {
    /// Error at the first sample with `t >= time` that carries one.
    pub fn error_at(&self, time: f64) -> Option<f64> {
        self.samples.iter().filter(|s| s.t >= time - 1e-12).find_map(|s| s.error)
    }
}

/// Runs `case`, recording basis parameters every step and the L2 error
/// every `error_every` steps (0 = only at the end).
pub fn run_mms(case: &MmsCase, error_every: usize) -> Result<MmsOutcome> {
    let cfg = case.to_run_config();
    let mut sim = Simulation::new(&cfg)?;
    let profile = case.profile;
    let sample = |sim: &Simulation, with_error: bool| -> Result<MmsSample> {
        let b = sim.state.species[0].basis;
        let t = sim.state.time;
        Ok(MmsSample {
            t,
            alpha: b.alpha,
            u: b.u,
            beta: profile.beta(t),
            w: profile.w(t),
            error: if with_error { Some(mms_error(&sim.state, &profile)?) } else { None },
        })
    };
    let mut samples = vec![sample(&sim, error_every > 0)?];
    let total = steps_for(case.t_final, case.dt);
    sim.run_to(case.t_final, |sim, rep| {
        let want = rep.step == total || (error_every > 0 && rep.step % error_every == 0);
        samples.push(sample(sim, want)?);
        Ok(())
    })?;
    let final_error = match samples.last().and_then(|s| s.error) {
        Some(e) => e,
        None => mms_error(&sim.state, &profile)?,
    };
    Ok(MmsOutcome { samples, final_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub dt: f64,
    pub error: f64,
}

/// Final-time error of `base` for each time step in `dts`.
pub fn convergence_study(base: &MmsCase, dts: &[f64]) -> Result<Vec<ConvergencePoint>> {
    dts.iter()
        .map(|&dt| {
            let case = MmsCase { dt, ..*base };
            Ok(ConvergencePoint { dt, error: run_mms(&case, 0)?.final_error })
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(dt)`.
pub fn fit_slope(points: &[ConvergencePoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidConfig("need at least two points to fit a slope".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.dt.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
