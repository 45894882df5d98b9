//! Adaptive asymmetrically-weighted Hermite / Fourier spectral solver for the
//! 1D-1V Vlasov–Poisson system.
//!
//! Velocity is expanded in Hermite functions `psi_n((v - u)/alpha)` whose
//! scaling `alpha` and shift `u` are adapted per species between time steps;
//! space is periodic and expanded in Fourier modes. Steps use the implicit
//! midpoint rule, solved with a Jacobian-free Newton–Krylov method.
//!
//! ```
//! use awh_vlasov::{config::ConfigFile, driver::Simulation};
//!
//! let cfg = ConfigFile::parse("nv = 12\nnx = 4\nt_final = 0.2\nnu = 2.0")?.into_run_config()?;
//! let mut sim = Simulation::new(&cfg)?;
//! sim.run_to(0.2, |_, _| Ok(()))?;
//! assert!(sim.diagnostics()?.mass_err < 1e-14);
//! # Ok::<(), awh_vlasov::Error>(())
//! ```

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod hermite;
pub mod krylov;
pub mod output;
pub mod quadrature;
pub mod residual;
pub mod scenarios;
pub mod state;
pub mod studies;
pub mod transform;

pub use error::{Error, Result};
pub use hermite::HermiteBasisParams;
pub use state::{CoeffMatrix, GridConfig, SpectralState};
