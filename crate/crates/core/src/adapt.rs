//! Physics-based update of `(u, alpha)` from the spatially averaged moments.
//!
//! `u` follows the mean velocity and `alpha` the thermal velocity of the
//! species, both read off the `k = 0` coefficients of the first three
//! Hermite modes.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::HermiteBasisParams;
use crate::state::SpectralState;

/// Radicand values at or below this keep the previous `alpha`.
pub const RADICAND_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptDecision {
    pub new_params: HermiteBasisParams,
    pub update_u: bool,
    pub update_alpha: bool,
    /// `1 + sqrt(2) r2 - r1^2`; negative values mean the second moment is not positive.
    pub radicand: f64,
}

impl AdaptDecision {
    pub fn any(&self) -> bool {
        self.update_u || self.update_alpha
    }
}

/// Candidate `(u, alpha)` for one species.
///
/// `update_u` is always set; `update_alpha` is cleared when the radicand is
/// not positive, in which case `alpha` is kept.
pub fn propose_params(state: &SpectralState, species: usize) -> Result<AdaptDecision> {
    let sp = state.species(species)?;
    let old = sp.basis;
    let c0 = sp.coeffs.get(0, 0).re;
    if c0 == 0.0 || !c0.is_finite() {
        return Err(Error::ZeroDensity(species));
    }
    let r1 = if sp.coeffs.nv() >= 1 { sp.coeffs.get(1, 0).re / c0 } else { 0.0 };
    let r2 = if sp.coeffs.nv() >= 2 { sp.coeffs.get(2, 0).re / c0 } else { 0.0 };

    let u_new = old.u + old.alpha / SQRT_2 * r1;
    let radicand = 1.0 + SQRT_2 * r2 - r1 * r1;
    let (alpha_new, update_alpha) = if radicand > RADICAND_FLOOR {
        (old.alpha * radicand.sqrt(), true)
    } else {
        log::warn!("species {species}: non-positive temperature moment (radicand {radicand:e}); keeping alpha = {}", old.alpha);
        (old.alpha, false)
    };

    Ok(AdaptDecision { new_params: HermiteBasisParams { alpha: alpha_new, u: u_new }, update_u: true, update_alpha, radicand })
}

/// Tolerance gate: each parameter is accepted independently of the other.
/// Returned `new_params` carry the old value for any parameter that is not updated.
pub fn gate_update(old: HermiteBasisParams, proposed: HermiteBasisParams, u_tol: f64, alpha_tol: f64) -> AdaptDecision {
    let update_u = (old.u - proposed.u).abs() >= u_tol && proposed.u != old.u;
    let update_alpha =
        proposed.alpha > 0.0 && proposed.alpha != old.alpha && (old.alpha - proposed.alpha).abs() / old.alpha.abs() >= alpha_tol;
    AdaptDecision {
        new_params: HermiteBasisParams {
            alpha: if update_alpha { proposed.alpha } else { old.alpha },
            u: if update_u { proposed.u } else { old.u },
        },
        update_u,
        update_alpha,
        radicand: f64::NAN,
    }
}

/// Proposal followed by the gate; the radicand of the proposal is kept.
pub fn decide(state: &SpectralState, species: usize, u_tol: f64, alpha_tol: f64) -> Result<AdaptDecision> {
    let proposal = propose_params(state, species)?;
    let old = state.species[species].basis;
    let mut d = gate_update(old, proposal.new_params, u_tol, alpha_tol);
    d.update_alpha &= proposal.update_alpha;
    if !d.update_alpha {
        d.new_params.alpha = old.alpha;
    }
    d.radicand = proposal.radicand;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{CoeffMatrix, SpeciesInfo, SpeciesState};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn state_with(basis: HermiteBasisParams, c: &[(usize, usize, f64)]) -> SpectralState {
        let mut coeffs = CoeffMatrix::zeros(4, 2);
        for &(n, k, v) in c {
            coeffs.set(n, k, Complex64::new(v, 0.0));
        }
        SpectralState {
            length: 1.0,
            species: vec![SpeciesState { info: SpeciesInfo { name: "e".into(), charge: -1.0, mass: 1.0 }, basis, coeffs }],
            field: vec![Complex64::new(0.0, 0.0); 3],
            time: 0.0,
        }
    }

    #[test]
    fn maxwellian_in_own_basis_is_fixed_point() {
        let b = HermiteBasisParams::new(0.7, -0.2).unwrap();
        let st = state_with(b, &[(0, 0, 3.0), (0, 1, 0.4)]);
        let d = propose_params(&st, 0).unwrap();
        assert_eq!(d.new_params, b);
        assert_eq!(d.radicand, 1.0);
    }

    #[test]
    fn shift_from_first_moment() {
        let b = HermiteBasisParams::new(1.0, 0.0).unwrap();
        let st = state_with(b, &[(0, 0, 1.0), (1, 0, 2f64.sqrt() * 0.1), (2, 0, 0.01)]);
        let d = propose_params(&st, 0).unwrap();
        assert_relative_eq!(d.new_params.u, 0.1, max_relative = 1e-15);
    }

    #[test]
    fn scaling_from_second_moment() {
        let b = HermiteBasisParams::new(1.5, 0.0).unwrap();
        let st = state_with(b, &[(0, 0, 2.0), (2, 0, 2.0 / 2f64.sqrt())]);
        let d = propose_params(&st, 0).unwrap();
        assert_relative_eq!(d.new_params.alpha, 1.5 * 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(d.new_params.u, 0.0);
    }

    #[test]
    fn negative_radicand_keeps_alpha() {
        let b = HermiteBasisParams::new(1.0, 0.0).unwrap();
        let st = state_with(b, &[(0, 0, 1.0), (2, 0, -1.0)]);
        let d = propose_params(&st, 0).unwrap();
        assert!(d.radicand < 0.0);
        assert!(!d.update_alpha);
        assert_eq!(d.new_params.alpha, 1.0);
    }

    #[test]
    fn zero_density_is_an_error() {
        let b = HermiteBasisParams::new(1.0, 0.0).unwrap();
        let st = state_with(b, &[(1, 0, 1.0)]);
        assert!(matches!(propose_params(&st, 0), Err(Error::ZeroDensity(0))));
    }

    #[test]
    fn gate_is_independent_per_parameter() {
        let old = HermiteBasisParams::new(1.0, 0.0).unwrap();
        let d = gate_update(old, HermiteBasisParams { alpha: 1.2, u: 5e-3 }, 1e-2, 1e-1);
        assert!(!d.update_u);
        assert!(d.update_alpha);
        assert_eq!(d.new_params, HermiteBasisParams { alpha: 1.2, u: 0.0 });

        let d = gate_update(old, old, 1e-2, 1e-1);
        assert!(!d.any());

        let d = gate_update(old, HermiteBasisParams { alpha: 1.0, u: 0.02 }, 1e-2, 1e-1);
        assert!(d.update_u);
        assert!(!d.update_alpha);
    }

    #[test]
    fn zero_tolerance_still_needs_a_change() {
        let old = HermiteBasisParams::new(1.0, 0.0).unwrap();
        assert!(!gate_update(old, old, 0.0, 0.0).any());
    }
}
