//! Time loop: implicit midpoint step, then (optionally) basis adaptation at
//! the new time level, then diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adapt::decide;
use crate::diagnostics::{record, Baseline, DiagnosticsRecord, ExtremaWindow};
use crate::error::{Error, Result};
use crate::hermite::HermiteBasisParams;
use crate::krylov::{newton_solve, NewtonStats, Preconditioner, SolverConfig};
use crate::residual::{FieldMode, ResidualContext, SourceTerm, StreamingPreconditioner};
use crate::scenarios::{mms_initial_state, two_stream_init, MmsProfile, MmsSource, TwoStreamParams};
use crate::state::{steps_for, GridConfig, SpectralState};
use crate::transform::{apply_transform_in_place, build_transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    #[default]
    None,
    /// Exact inverse of streaming + collisions, see [`StreamingPreconditioner`].
    Streaming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    TwoStream(TwoStreamParams),
    /// Field-free manufactured solution, solved in the basis `(alpha0, u0)`.
    Mms {
        profile: MmsProfile,
        alpha0: f64,
        u0: f64,
    },
}

/// Where `f_min` / `f_max` are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaSpec {
    Off,
    /// Standard window over all negatively charged species.
    Electrons,
    Window(ExtremaWindow),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub scenario: Scenario,
    pub adaptive: bool,
    pub preconditioner: PreconditionerKind,
    pub extrema: ExtremaSpec,
    pub output_dir: Option<std::path::PathBuf>,
    /// Snapshot cadence in steps (also the field-output cadence).
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.solver.validate()?;
        if self.snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn field_mode(&self) -> FieldMode {
        match self.scenario {
            Scenario::TwoStream(_) => FieldMode::Poisson,
            Scenario::Mms { .. } => FieldMode::Zero,
        }
    }

    pub fn initial_state(&self) -> Result<SpectralState> {
        let g = &self.grid;
        match &self.scenario {
            Scenario::TwoStream(p) => {
                let mut p = p.clone();
                p.length = g.length;
                two_stream_init(&p, g.nv, g.nx)
            }
            Scenario::Mms { profile, alpha0, u0 } => {
                let mut st = mms_initial_state(profile, HermiteBasisParams::new(*alpha0, *u0)?, g.nv, g.nx)?;
                st.length = g.length;
                Ok(st)
            }
        }
    }
}

/// A basis change applied after a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationEvent {
    pub step: usize,
    pub t: f64,
    pub species: usize,
    pub old: HermiteBasisParams,
    pub new: HermiteBasisParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub solver: NewtonStats,
    pub adaptations: Vec<AdaptationEvent>,
}

/// Step-level settings split out of [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepSettings {
    pub dt: f64,
    pub nu: f64,
    pub u_tol: f64,
    pub alpha_tol: f64,
    pub adaptive: bool,
    pub field_mode: FieldMode,
    pub solver: SolverConfig,
    pub preconditioner: PreconditionerKind,
}

pub struct Simulation {
    pub state: SpectralState,
    pub settings: StepSettings,
    source: Option<Box<dyn SourceTerm>>,
    baseline: Baseline,
    window: Option<ExtremaWindow>,
    t0: f64,
    steps: usize,
    pub events: Vec<AdaptationEvent>,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let state = cfg.initial_state()?;
        let settings = StepSettings {
            dt: cfg.grid.dt,
            nu: cfg.grid.nu,
            u_tol: cfg.grid.u_tol,
            alpha_tol: cfg.grid.alpha_tol,
            adaptive: cfg.adaptive,
            field_mode: cfg.field_mode(),
            solver: cfg.solver,
            preconditioner: cfg.preconditioner,
        };
        let source: Option<Box<dyn SourceTerm>> = match cfg.scenario {
            Scenario::Mms { profile, .. } => Some(Box::new(MmsSource { profile })),
            Scenario::TwoStream(_) => None,
        };
        let window = match &cfg.extrema {
            ExtremaSpec::Off => None,
            ExtremaSpec::Electrons => Some(ExtremaWindow::electrons(&state)),
            ExtremaSpec::Window(w) => Some(w.clone()),
        };
        Self::from_state(state, settings, source, window)
    }

    pub fn from_state(
        state: SpectralState,
        settings: StepSettings,
        source: Option<Box<dyn SourceTerm>>,
        window: Option<ExtremaWindow>,
    ) -> Result<Self> {
        state.validate()?;
        if !(settings.dt > 0.0) || !(settings.nu >= 0.0) || settings.u_tol < 0.0 || settings.alpha_tol < 0.0 {
            return Err(Error::InvalidConfig(format!("bad step settings {settings:?}")));
        }
        settings.solver.validate()?;
        if let Some(w) = &window {
            for &s in &w.species {
                state.species(s)?;
            }
        }
        let baseline = Baseline::of(&state)?;
        let t0 = state.time;
        Ok(Simulation { state, settings, source, baseline, window, t0, steps: 0, events: Vec::new() })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn baseline(&self) -> &Baseline {
        &self.baseline
    }

    pub fn diagnostics(&self) -> Result<DiagnosticsRecord> {
        record(&self.state, &self.baseline, self.window.as_ref())
    }

    /// Advances one step. On solver failure the state is left at the previous level.
    pub fn step(&mut self) -> Result<StepReport> {
        let s = &self.settings;
        let ctx = ResidualContext::new(&self.state, s.dt, s.nu, s.field_mode, self.source.as_deref())?;
        let pc = match s.preconditioner {
            PreconditionerKind::None => None,
            PreconditionerKind::Streaming => Some(StreamingPreconditioner::new(&ctx)),
        };
        let out = newton_solve(
            |x: &[f64], f: &mut [f64]| ctx.residual(x, f),
            ctx.initial_guess(),
            &s.solver,
            pc.as_ref().map(|p| p as &dyn Preconditioner),
        )?;
        if !out.converged {
            return Err(Error::NonConvergence { iterations: out.stats.newton_iterations, residual: out.stats.final_residual });
        }
        let mut next = ctx.unpack(&out.x)?;

        // The (0,0) row is linear and decoupled, so its exact solution is
        // known; Newton only gets it to within the solver tolerance.
        for (sidx, c) in next.iter_mut().enumerate() {
            let src = ctx.source[sidx].as_ref().map_or(0.0, |m| m.get(0, 0).re);
            c.set(0, 0, Complex64::new(ctx.prev[sidx].get(0, 0).re + s.dt * src, 0.0));
        }

        self.state.field = ctx.field_of(&next);
        for (sp, c) in self.state.species.iter_mut().zip(next) {
            sp.coeffs = c;
        }
        self.steps += 1;
        self.state.time = self.t0 + self.steps as f64 * s.dt;

        let mut adaptations = Vec::new();
        if s.adaptive {
            let nv = self.state.nv();
            for sidx in 0..self.state.species.len() {
                let d = decide(&self.state, sidx, s.u_tol, s.alpha_tol)?;
                if !d.any() {
                    continue;
                }
                let old = self.state.species[sidx].basis;
                let p = build_transform(old, d.new_params, nv)?;
                apply_transform_in_place(&p, &mut self.state, sidx)?;
                let ev = AdaptationEvent { step: self.steps, t: self.state.time, species: sidx, old, new: d.new_params };
                log::debug!("adapt species {sidx} at t={:.4}: {:?} -> {:?}", ev.t, old, d.new_params);
                adaptations.push(ev);
            }
            self.events.extend_from_slice(&adaptations);
        }

        Ok(StepReport { step: self.steps, solver: out.stats, adaptations })
    }

    /// Steps until `t_final`, calling `observe` after every step.
    pub fn run_to<F>(&mut self, t_final: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Simulation, &StepReport) -> Result<()>,
    {
        let total = steps_for(t_final - self.t0, self.settings.dt);
        while self.steps < total {
            let rep = self.step()?;
            observe(self, &rep)?;
        }
        Ok(())
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub adaptations: Vec<AdaptationEvent>,
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
}

/// Runs `cfg` to `t_final`. With an output directory, writes
/// `diagnostics.csv`, `field.csv`, `snapshot_<step>.csv` at the configured
/// cadence (and at the end) and `manifest.json`. If a step fails, the last
/// good state is dumped to `failed_state.csv` before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    use crate::output::{write_manifest, write_snapshot, DiagnosticsWriter, FieldWriter, Manifest};

    let started = std::time::Instant::now();
    let mut sim = Simulation::new(cfg)?;
    let dir = cfg.output_dir.as_deref();
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let names: Vec<String> = sim.state.species.iter().map(|s| s.info.name.clone()).collect();
    let mut diag_out = dir.map(|d| DiagnosticsWriter::create(&d.join("diagnostics.csv"), &names)).transpose()?;
    let mut field_out = dir.map(|d| FieldWriter::create(&d.join("field.csv"))).transpose()?;
    let snap =
        |d: &std::path::Path, step: usize, st: &SpectralState| write_snapshot(&d.join(format!("snapshot_{step:06}.csv")), st);

    let first = sim.diagnostics()?;
    if let Some(w) = diag_out.as_mut() {
        w.write(&first)?;
    }
    if let Some(w) = field_out.as_mut() {
        w.write(sim.state.time, &sim.state.field)?;
    }
    if let Some(d) = dir {
        snap(d, 0, &sim.state)?;
    }
    let mut records = vec![first];
    let (mut newton, mut gmres) = (0usize, 0usize);
    let total = cfg.grid.num_steps();

    let mut failure = None;
    while sim.steps_taken() < total {
        let before = sim.state.clone();
        let rep = match sim.step() {
            Ok(r) => r,
            Err(e) => {
                log::error!("step {} failed: {e}", sim.steps_taken() + 1);
                if let Some(d) = dir {
                    write_snapshot(&d.join("failed_state.csv"), &before)?;
                }
                failure = Some(e);
                break;
            }
        };
        newton += rep.solver.newton_iterations;
        gmres += rep.solver.gmres_iterations;
        let rec = sim.diagnostics()?;
        log::info!(
            "step {:>6} t={:.4} newton={} gmres={} mass_err={:.2e} mom_err={:.2e} energy_err={:.2e}",
            rep.step,
            rec.t,
            rep.solver.newton_iterations,
            rep.solver.gmres_iterations,
            rec.mass_err,
            rec.momentum_err,
            rec.energy_err
        );
        if let Some(w) = diag_out.as_mut() {
            w.write(&rec)?;
        }
        if rep.step % cfg.snapshot_every == 0 || rep.step == total {
            if let Some(w) = field_out.as_mut() {
                w.write(sim.state.time, &sim.state.field)?;
            }
            if let Some(d) = dir {
                snap(d, rep.step, &sim.state)?;
            }
        }
        records.push(rec);
    }

    if let Some(w) = diag_out.as_mut() {
        w.flush()?;
    }
    if let Some(w) = field_out.as_mut() {
        w.flush()?;
    }
    if let Some(d) = dir {
        write_manifest(
            &d.join("manifest.json"),
            &Manifest {
                program: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                steps: sim.steps_taken(),
                final_time: sim.state.time,
                wall_time_seconds: started.elapsed().as_secs_f64(),
                status: match &failure {
                    None => "ok".to_string(),
                    Some(e) => format!("failed: {e}"),
                },
                newton_iterations: newton,
                gmres_iterations: gmres,
                adaptations: &sim.events,
            },
        )?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunSummary {
        steps: sim.steps_taken(),
        final_time: sim.state.time,
        records,
        adaptations: sim.events.clone(),
        newton_iterations: newton,
        gmres_iterations: gmres,
    })
}
