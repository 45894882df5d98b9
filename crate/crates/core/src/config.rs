//! Run configuration files.
//!
//! A configuration is a flat list of `key = value` pairs in TOML syntax; every
//! key is optional and falls back to the two-stream defaults below. The same
//! keys can be overridden from the command line with `key=value` strings.
//!
//! ```toml
//! scenario = "two-stream"   # or "mms"
//! nv = 100
//! nx = 50
//! dt = 0.05
//! t_final = 50.0
//! nu = 5.0
//! adaptive = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::ExtremaWindow;
use crate::driver::{ExtremaSpec, PreconditionerKind, RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::krylov::SolverConfig;
use crate::scenarios::{MmsProfile, TwoStreamParams};
use crate::state::GridConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    TwoStream,
    Mms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Linear,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremaKind {
    Off,
    Electrons,
    Custom,
}

/// Every recognised key with its default. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioKind,

    pub length: f64,
    pub nv: usize,
    pub nx: usize,
    pub dt: f64,
    pub t_final: f64,
    pub nu: f64,
    pub u_tol: f64,
    pub alpha_tol: f64,
    pub adaptive: bool,

    pub max_newton: usize,
    pub max_gmres: usize,
    pub eta_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub fd_epsilon_scale: f64,
    pub gmres_restart: usize,
    pub preconditioner: PreconditionerKind,

    // two-stream
    pub epsilon: f64,
    pub n0: [f64; 2],
    pub alpha_e: [f64; 2],
    pub u_e: [f64; 2],
    pub mass_ratio: f64,
    pub temperature_ratio: f64,

    // manufactured solution
    pub profile: ProfileKind,
    pub beta0: f64,
    pub beta_rate: f64,
    pub w0: f64,
    pub w_rate: f64,
    pub alpha0: f64,
    pub u0: f64,

    // outputs
    pub output_dir: Option<PathBuf>,
    pub snapshot_every: usize,
    pub extrema: ExtremaKind,
    pub extrema_species: Vec<usize>,
    pub extrema_v_min: f64,
    pub extrema_v_max: f64,
    pub extrema_v_points: usize,
    pub extrema_x_points: usize,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let ts = TwoStreamParams::default();
        let sol = SolverConfig::default();
        ConfigFile {
            scenario: ScenarioKind::TwoStream,
            length: ts.length,
            nv: 100,
            nx: 50,
            dt: 0.05,
            t_final: 50.0,
            nu: 5.0,
            u_tol: 1e-2,
            alpha_tol: 1e-1,
            adaptive: true,
            max_newton: sol.max_newton,
            max_gmres: sol.max_gmres,
            eta_max: sol.eta_max,
            abs_tol: sol.abs_tol,
            rel_tol: sol.rel_tol,
            fd_epsilon_scale: sol.fd_epsilon_scale,
            gmres_restart: sol.gmres_restart,
            preconditioner: PreconditionerKind::None,
            epsilon: ts.epsilon,
            n0: ts.n0,
            alpha_e: ts.alpha_e,
            u_e: ts.u_e,
            mass_ratio: ts.mass_ratio,
            temperature_ratio: ts.temperature_ratio,
            profile: ProfileKind::Linear,
            beta0: 1.0,
            beta_rate: 0.0,
            w0: 0.0,
            w_rate: 0.0,
            alpha0: 1.0,
            u0: 0.0,
            output_dir: None,
            snapshot_every: 100,
            extrema: ExtremaKind::Electrons,
            extrema_species: Vec::new(),
            extrema_v_min: -3.0,
            extrema_v_max: 3.0,
            extrema_v_points: 400,
            extrema_x_points: 256,
        }
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Parse(e.to_string()))
}

/// Parses one `key=value` override; bare words that are not valid TOML
/// values are taken as strings (`scenario=mms`).
fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse(format!("override '{s}' is not key=value")))?;
    let (k, v) = (k.trim(), v.trim());
    let value = match parse_table(&format!("x = {v}")) {
        Ok(mut t) => t.remove("x").expect("just inserted"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((k.to_string(), value))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides::<&str>(text, &[])
    }

    pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self> {
        let mut table = parse_table(text)?;
        for o in overrides {
            let (k, v) = parse_override(o.as_ref())?;
            table.insert(k, v);
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn into_run_config(self) -> Result<RunConfig> {
        let grid = GridConfig {
            length: self.length,
            nv: self.nv,
            nx: self.nx,
            dt: self.dt,
            t_final: self.t_final,
            nu: self.nu,
            u_tol: self.u_tol,
            alpha_tol: self.alpha_tol,
        };
        let solver = SolverConfig {
            max_newton: self.max_newton,
            max_gmres: self.max_gmres,
            eta_max: self.eta_max,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            fd_epsilon_scale: self.fd_epsilon_scale,
            gmres_restart: self.gmres_restart,
        };
        let scenario = match self.scenario {
            ScenarioKind::TwoStream => Scenario::TwoStream(TwoStreamParams {
                epsilon: self.epsilon,
                n0: self.n0,
                alpha_e: self.alpha_e,
                u_e: self.u_e,
                mass_ratio: self.mass_ratio,
                temperature_ratio: self.temperature_ratio,
                length: self.length,
            }),
            ScenarioKind::Mms => Scenario::Mms {
                profile: match self.profile {
                    ProfileKind::Linear => {
                        MmsProfile::Linear { beta0: self.beta0, beta_rate: self.beta_rate, w0: self.w0, w_rate: self.w_rate }
                    }
                    ProfileKind::Tanh => MmsProfile::Tanh,
                },
                alpha0: self.alpha0,
                u0: self.u0,
            },
        };
        let extrema = match self.extrema {
            ExtremaKind::Off => ExtremaSpec::Off,
            ExtremaKind::Electrons if self.extrema_species.is_empty() => ExtremaSpec::Electrons,
            _ => ExtremaSpec::Window(ExtremaWindow {
                species: if self.extrema_species.is_empty() { vec![0] } else { self.extrema_species },
                v_min: self.extrema_v_min,
                v_max: self.extrema_v_max,
                v_points: self.extrema_v_points,
                x_points: self.extrema_x_points,
            }),
        };
        let cfg = RunConfig {
            grid,
            solver,
            scenario,
            adaptive: self.adaptive,
            preconditioner: self.preconditioner,
            extrema,
            output_dir: self.output_dir,
            snapshot_every: self.snapshot_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ConfigFile::parse("").unwrap(), ConfigFile::default());
    }

    #[test]
    fn keys_and_overrides() {
        let c = ConfigFile::parse_with_overrides(
            "nv = 20\nscenario = \"mms\"\nnu = 0.0",
            &["nv=30", "profile=tanh", "adaptive=false"],
        )
        .unwrap();
        assert_eq!(c.nv, 30);
        assert_eq!(c.scenario, ScenarioKind::Mms);
        assert_eq!(c.profile, ProfileKind::Tanh);
        assert!(!c.adaptive);
        let run = c.into_run_config().unwrap();
        assert!(matches!(run.scenario, Scenario::Mms { profile: MmsProfile::Tanh, .. }));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(ConfigFile::parse("nvv = 3"), Err(Error::Parse(_))));
        assert!(ConfigFile::parse_with_overrides("", &["no_equals"]).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let c = ConfigFile::parse("nv = 3\nnu = 1.0").unwrap();
        assert!(c.into_run_config().is_err());
        let c = ConfigFile::parse("snapshot_every = 0").unwrap();
        assert!(c.into_run_config().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ConfigFile { nv: 7, output_dir: Some("out".into()), ..Default::default() };
        assert_eq!(ConfigFile::parse(&c.to_toml()).unwrap(), c);
    }
}
