use std::ffi::{CStr, CString};
use std::ptr;

use awh_vlasov_ffi::*;

fn message() -> String {
    let p = awh_last_error_message();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn create(config: &str) -> (AwhStatus, *mut AwhSimulation) {
    let text = CString::new(config).unwrap();
    let mut sim = ptr::null_mut();
    let s = unsafe { awh_simulation_create(text.as_ptr(), &mut sim) };
    (s, sim)
}

const SMALL: &str = "nv = 8\nnx = 4\ndt = 0.05\nt_final = 1.0\nnu = 1.0\n";

#[test]
fn simulation_lifecycle() {
    let (s, sim) = create(SMALL);
    assert_eq!(s, AwhStatus::Ok);
    assert!(!sim.is_null());

    let (mut ns, mut nv, mut nx) = (0, 0, 0);
    assert_eq!(unsafe { awh_simulation_dims(sim, &mut ns, &mut nv, &mut nx) }, AwhStatus::Ok);
    assert_eq!((ns, nv, nx), (3, 8, 4));

    let mut d0 = AwhDiagnostics::default();
    assert_eq!(unsafe { awh_simulation_diagnostics(sim, &mut d0) }, AwhStatus::Ok);
    assert_eq!(d0.time, 0.0);
    assert!(d0.total_mass > 0.0);

    assert_eq!(unsafe { awh_simulation_step(sim, 4) }, AwhStatus::Ok);
    let mut t = 0.0;
    assert_eq!(unsafe { awh_simulation_time(sim, &mut t) }, AwhStatus::Ok);
    assert!((t - 0.2).abs() < 1e-14);

    let mut d = AwhDiagnostics::default();
    assert_eq!(unsafe { awh_simulation_diagnostics(sim, &mut d) }, AwhStatus::Ok);
    assert!(d.mass_err <= 1e-14, "{}", d.mass_err);
    assert!((d.total_mass - d0.total_mass).abs() <= 1e-13 * d0.total_mass);

    let mut b = AwhBasis::default();
    assert_eq!(unsafe { awh_simulation_basis(sim, 2, &mut b) }, AwhStatus::Ok);
    assert!(b.alpha > 0.0);
    assert_eq!(unsafe { awh_simulation_basis(sim, 3, &mut b) }, AwhStatus::InvalidArgument);

    let len = 9 * 5;
    let (mut re, mut im) = (vec![0.0; len], vec![0.0; len]);
    assert_eq!(unsafe { awh_simulation_coefficients(sim, 0, re.as_mut_ptr(), im.as_mut_ptr(), len) }, AwhStatus::Ok);
    assert!(re[0] > 0.0);
    assert_eq!(im[0], 0.0);

    // f(x, v) at the centre of the basis equals C_00 psi_0 plus the k>0 modes.
    let x = [0.0, 1.0, 2.0];
    let v = [-1.0, 0.0, 0.5, 1.0];
    let mut out = vec![0.0; 12];
    let s = unsafe { awh_simulation_reconstruct(sim, 0, x.as_ptr(), 3, v.as_ptr(), 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(s, AwhStatus::Ok);
    assert!(out.iter().all(|f| f.is_finite() && *f > 0.0));
    let s = unsafe { awh_simulation_reconstruct(sim, 0, x.as_ptr(), 3, v.as_ptr(), 4, out.as_mut_ptr(), 11) };
    assert_eq!(s, AwhStatus::BufferTooSmall);

    unsafe { awh_simulation_free(sim) };
    unsafe { awh_simulation_free(ptr::null_mut()) };
}

#[test]
fn bad_configs_report_errors() {
    let (s, sim) = create("nv = [");
    assert_eq!(s, AwhStatus::Parse);
    assert!(sim.is_null());
    assert!(message().contains("parse"));

    let (s, _) = create("nv = 2");
    assert_eq!(s, AwhStatus::InvalidConfig);

    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { awh_simulation_create(ptr::null(), &mut sim) }, AwhStatus::NullPointer);
    assert!(message().contains("config"));
}

#[test]
fn null_handles_rejected() {
    let mut t = 0.0;
    assert_eq!(unsafe { awh_simulation_time(ptr::null(), &mut t) }, AwhStatus::NullPointer);
    assert_eq!(unsafe { awh_simulation_step(ptr::null_mut(), 1) }, AwhStatus::NullPointer);
    let mut d = AwhDiagnostics::default();
    assert_eq!(unsafe { awh_simulation_diagnostics(ptr::null(), &mut d) }, AwhStatus::NullPointer);
}

#[test]
fn transform_round_trip_through_c_api() {
    let from = AwhBasis { alpha: 1.0, u: 0.0 };
    let to = AwhBasis { alpha: 1.3, u: 0.4 };
    let nv = 10;
    let input: Vec<f64> = (0..=nv).map(|n| 1.0 / (1.0 + n as f64)).collect();
    let mut mid = vec![0.0; nv + 1];
    let mut back = vec![0.0; nv + 1];
    assert_eq!(unsafe { awh_transform_apply(from, to, nv, input.as_ptr(), mid.as_mut_ptr()) }, AwhStatus::Ok);
    // the reverse map truncates, so only the leading coefficients are exact
    assert_eq!(unsafe { awh_transform_apply(to, from, nv, mid.as_ptr(), back.as_mut_ptr()) }, AwhStatus::Ok);
    // mass: psi_0 coefficient scales by alpha_old / alpha_new
    assert!((mid[0] - input[0] / 1.3).abs() < 1e-15);
    assert!((back[0] - input[0]).abs() < 1e-14);

    let mut dense = vec![0.0; (nv + 1) * (nv + 1)];
    assert_eq!(unsafe { awh_transform_build(from, to, nv, dense.as_mut_ptr(), dense.len()) }, AwhStatus::Ok);
    for n in 0..=nv {
        let row: f64 = (0..=nv).map(|m| dense[n * (nv + 1) + m] * input[m]).sum();
        assert!((row - mid[n]).abs() < 1e-13);
        for m in n + 1..=nv {
            assert_eq!(dense[n * (nv + 1) + m], 0.0);
        }
    }

    let bad = AwhBasis { alpha: -1.0, u: 0.0 };
    assert_eq!(unsafe { awh_transform_apply(bad, to, nv, input.as_ptr(), mid.as_mut_ptr()) }, AwhStatus::InvalidArgument);
    assert!(message().contains("alpha"));
}

#[test]
fn psi_values() {
    let mut out = [0.0; 3];
    let s = unsafe { awh_psi(AwhBasis { alpha: 1.0, u: 0.0 }, 1.0, 2, out.as_mut_ptr(), 3) };
    assert_eq!(s, AwhStatus::Ok);
    let e = (-1.0f64).exp();
    let pi = std::f64::consts::PI;
    assert!((out[0] - e / pi.sqrt()).abs() < 1e-15);
    assert!((out[1] - 2.0 * e / (2.0 * pi).sqrt()).abs() < 1e-15);
    assert!((out[2] - 2.0 * e / (8.0 * pi).sqrt()).abs() < 1e-15);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(awh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/awh_vlasov.h")).unwrap();
    for name in [
        "awh_last_error_message",
        "awh_version",
        "awh_simulation_create",
        "awh_simulation_free",
        "awh_simulation_step",
        "awh_simulation_time",
        "awh_simulation_dims",
        "awh_simulation_basis",
        "awh_simulation_diagnostics",
        "awh_simulation_coefficients",
        "awh_simulation_reconstruct",
        "awh_transform_build",
        "awh_transform_apply",
        "awh_psi",
        "typedef struct AwhSimulation AwhSimulation",
        "AWH_STATUS_BUFFER_TOO_SMALL = 8",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"awh_vlasov.h\"\nint main(void) { AwhBasis b = {1.0, 0.0}; double o[3];\n\
         return awh_psi(b, 0.0, 2, o, 3) == AWH_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = match std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("no C compiler ({cc}: {e}); header compile check not run");
            return;
        }
    };
    assert!(status.success());
}
