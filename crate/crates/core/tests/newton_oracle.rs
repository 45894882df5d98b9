//! The JFNK step on a linear problem must reproduce a direct dense solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use awh_vlasov::krylov::{newton_solve, SolverConfig};
use awh_vlasov::residual::{FieldMode, ResidualContext, StreamingPreconditioner};
use awh_vlasov::state::{SpeciesInfo, SpeciesState};
use awh_vlasov::{CoeffMatrix, HermiteBasisParams, SpectralState};

/// Two Hermite modes, wavenumbers 0 and 1, no field: pure advection.
fn advection_state() -> SpectralState {
    let mut c = CoeffMatrix::zeros(1, 1);
    c.set(0, 0, Complex64::new(1.0, 0.0));
    c.set(1, 0, Complex64::new(0.2, 0.0));
    c.set(0, 1, Complex64::new(0.3, -0.1));
    c.set(1, 1, Complex64::new(-0.05, 0.25));
    SpectralState {
        length: 3.0,
        species: vec![SpeciesState {
            info: SpeciesInfo { name: "e".into(), charge: -1.0, mass: 1.0 },
            basis: HermiteBasisParams::new(0.9, 0.4).unwrap(),
            coeffs: c,
        }],
        field: vec![Complex64::new(0.0, 0.0); 2],
        time: 0.0,
    }
}

/// `(I/dt + ik A/2) C' = (I/dt - ik A/2) C` with `A = [[u, a/sqrt2], [a/sqrt2, u]]`.
fn direct_step(st: &SpectralState, dt: f64) -> CoeffMatrix {
    let sp = &st.species[0];
    let (a, u) = (sp.basis.alpha, sp.basis.u);
    let s = a / std::f64::consts::SQRT_2;
    let amat = DMatrix::from_row_slice(2, 2, &[u, s, s, u]).map(|x| Complex64::new(x, 0.0));
    let eye = DMatrix::<Complex64>::identity(2, 2);
    let mut out = CoeffMatrix::zeros(1, 1);
    for k in 0..=1 {
        let ik = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64 / st.length);
        let inv_dt = Complex64::new(1.0 / dt, 0.0);
        let lhs = &eye * inv_dt + &amat * (ik * 0.5);
        let rhs = (&eye * inv_dt - &amat * (ik * 0.5)) * DVector::from_vec(vec![sp.coeffs.get(0, k), sp.coeffs.get(1, k)]);
        let x = lhs.lu().solve(&rhs).unwrap();
        out.set(0, k, x[0]);
        out.set(1, k, x[1]);
    }
    out
}

fn jfnk_step(st: &SpectralState, dt: f64, preconditioned: bool) -> CoeffMatrix {
    let ctx = ResidualContext::new(st, dt, 0.0, FieldMode::Zero, None).unwrap();
    let cfg = SolverConfig { abs_tol: 1e-13, rel_tol: 1e-13, ..SolverConfig::default() };
    let pc = preconditioned.then(|| StreamingPreconditioner::new(&ctx));
    let out = newton_solve(
        |x: &[f64], f: &mut [f64]| ctx.residual(x, f),
        ctx.initial_guess(),
        &cfg,
        pc.as_ref().map(|p| p as &dyn awh_vlasov::krylov::Preconditioner),
    )
    .unwrap();
    assert!(out.converged, "{:?}", out.stats);
    ctx.unpack(&out.x).unwrap().remove(0)
}

#[test]
fn jfnk_matches_dense_lu() {
    let st = advection_state();
    for &dt in &[0.01, 0.3, 2.0] {
        let direct = direct_step(&st, dt);
        for pc in [false, true] {
            let jfnk = jfnk_step(&st, dt, pc);
            for n in 0..=1 {
                for k in 0..=1 {
                    let d = (jfnk.get(n, k) - direct.get(n, k)).norm();
                    assert!(d < 1e-9, "dt={dt} pc={pc} ({n},{k}): {d:e}");
                }
            }
        }
    }
}

#[test]
fn midpoint_step_preserves_l2_norm_of_advection() {
    // A is symmetric and ik A skew-Hermitian, so the Cayley map is unitary.
    let st = advection_state();
    let next = jfnk_step(&st, 0.5, true);
    for k in 0..=1 {
        let before: f64 = (0..=1).map(|n| st.species[0].coeffs.get(n, k).norm_sqr()).sum();
        let after: f64 = (0..=1).map(|n| next.get(n, k).norm_sqr()).sum();
        assert!((before - after).abs() < 1e-12, "k={k}");
    }
}
