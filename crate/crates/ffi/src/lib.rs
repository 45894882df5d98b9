//! C interface to the awh-vlasov solver.
//!
//! Every function returns an [`AwhStatus`]; on failure a human-readable
//! message is kept per thread and can be fetched with
//! [`awh_last_error_message`]. Simulations are opaque handles created by
//! [`awh_simulation_create`] and released with [`awh_simulation_free`].
//! Panics never cross the boundary; they are reported as `AWH_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use awh_vlasov::config::ConfigFile;
use awh_vlasov::driver::Simulation;
use awh_vlasov::hermite::aw_hermite;
use awh_vlasov::state::reconstruct_f;
use awh_vlasov::transform::build_transform;
use awh_vlasov::{Error, HermiteBasisParams};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Parse = 4,
    NonConvergence = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Velocity-basis parameters of one species.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AwhBasis {
    pub alpha: f64,
    pub u: f64,
}

/// Conservation and field diagnostics at the current time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AwhDiagnostics {
    pub time: f64,
    pub total_mass: f64,
    pub total_momentum: f64,
    pub total_energy: f64,
    pub potential_energy: f64,
    pub mass_err: f64,
    pub momentum_err: f64,
    pub energy_err: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub e_l2: f64,
}

/// Opaque simulation handle.
pub struct AwhSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes stripped")));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> AwhStatus {
    match err {
        Error::InvalidBasis { .. } | Error::DimensionMismatch { .. } | Error::NoSuchSpecies(_) | Error::QuadratureOrder(_) => {
            AwhStatus::InvalidArgument
        }
        Error::InvalidConfig(_) | Error::Neutrality(_) | Error::ZeroDensity(_) => AwhStatus::InvalidConfig,
        Error::Parse(_) => AwhStatus::Parse,
        Error::NonConvergence { .. } => AwhStatus::NonConvergence,
        Error::DegenerateTransform(_) | Error::ImaginaryResidue(_) | Error::NonFinite(_) => AwhStatus::Numerical,
        Error::Io(_) => AwhStatus::Io,
    }
}

struct Failure(AwhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail(status: AwhStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AwhStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AwhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AwhStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller promises `p` is either null or valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| fail(AwhStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller promises `p` is either null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| fail(AwhStatus::NullPointer, format!("{what} is null")))
}

fn in_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AwhStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and the caller guarantees `len` readable elements.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len < needed {
        return Err(fail(AwhStatus::BufferTooSmall, format!("{what} holds {len} values, {needed} required")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(AwhStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and the caller guarantees `len >= needed` writable elements.
    Ok(unsafe { slice::from_raw_parts_mut(p, needed) })
}

fn basis(b: AwhBasis) -> Result<HermiteBasisParams, Failure> {
    Ok(HermiteBasisParams::new(b.alpha, b.u)?)
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn awh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn awh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a simulation from configuration text (`key = value` lines; an
/// empty string gives the default two-stream setup).
///
/// # Safety
/// `config` must be a NUL-terminated string or NULL; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_create(config: *const c_char, out: *mut *mut AwhSimulation) -> AwhStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = ptr::null_mut();
        let text = unsafe { CStr::from_ptr(non_null(config, "config")?) }
            .to_str()
            .map_err(|_| fail(AwhStatus::Parse, "config is not valid UTF-8"))?;
        let cfg = ConfigFile::parse(text)?.into_run_config()?;
        let sim = Simulation::new(&cfg)?;
        *out = Box::into_raw(Box::new(AwhSimulation { sim }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `sim` must come from [`awh_simulation_create`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_free(sim: *mut AwhSimulation) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Advances `steps` time steps. On failure the state stays at the last
/// successfully completed step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_step(sim: *mut AwhSimulation, steps: usize) -> AwhStatus {
    guard(|| {
        let h = non_null_mut(sim, "sim")?;
        for _ in 0..steps {
            h.sim.step()?;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `time` writable.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_time(sim: *const AwhSimulation, time: *mut f64) -> AwhStatus {
    guard(|| {
        *non_null_mut(time, "time")? = non_null(sim, "sim")?.sim.state.time;
        Ok(())
    })
}

/// Number of species, highest Hermite index `nv` and highest Fourier index `nx`.
///
/// # Safety
/// `sim` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_dims(
    sim: *const AwhSimulation,
    species: *mut usize,
    nv: *mut usize,
    nx: *mut usize,
) -> AwhStatus {
    guard(|| {
        let st = &non_null(sim, "sim")?.sim.state;
        *non_null_mut(species, "species")? = st.species.len();
        *non_null_mut(nv, "nv")? = st.nv();
        *non_null_mut(nx, "nx")? = st.nx();
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_basis(sim: *const AwhSimulation, species: usize, out: *mut AwhBasis) -> AwhStatus {
    guard(|| {
        let b = non_null(sim, "sim")?.sim.state.species(species)?.basis;
        *non_null_mut(out, "out")? = AwhBasis { alpha: b.alpha, u: b.u };
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_diagnostics(sim: *const AwhSimulation, out: *mut AwhDiagnostics) -> AwhStatus {
    guard(|| {
        let r = non_null(sim, "sim")?.sim.diagnostics()?;
        *non_null_mut(out, "out")? = AwhDiagnostics {
            time: r.t,
            total_mass: r.species.iter().map(|s| s.mass).sum(),
            total_momentum: r.total_momentum(),
            total_energy: r.species.iter().map(|s| s.kinetic).sum::<f64>() + r.potential,
            potential_energy: r.potential,
            mass_err: r.mass_err,
            momentum_err: r.momentum_err,
            energy_err: r.energy_err,
            f_min: r.f_min,
            f_max: r.f_max,
            e_l2: r.e_l2,
        };
        Ok(())
    })
}

/// Copies the Hermite-Fourier coefficients of one species, `(nv+1)*(nx+1)`
/// values each for the real and imaginary parts, row-major in `(n, k)`.
///
/// # Safety
/// `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_coefficients(
    sim: *const AwhSimulation,
    species: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> AwhStatus {
    guard(|| {
        let c = &non_null(sim, "sim")?.sim.state.species(species)?.coeffs;
        let src = c.as_slice();
        let re = out_slice(re, len, src.len(), "re")?;
        let im = out_slice(im, len, src.len(), "im")?;
        for ((r, i), z) in re.iter_mut().zip(im.iter_mut()).zip(src) {
            *r = z.re;
            *i = z.im;
        }
        Ok(())
    })
}

/// Evaluates `f_s(x, v)` on the tensor grid `x[0..nx_pts] x v[0..nv_pts]`,
/// written x-major into `out` (`out[ix * nv_pts + iv]`).
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn awh_simulation_reconstruct(
    sim: *const AwhSimulation,
    species: usize,
    x: *const f64,
    nx_pts: usize,
    v: *const f64,
    nv_pts: usize,
    out: *mut f64,
    out_len: usize,
) -> AwhStatus {
    guard(|| {
        let st = &non_null(sim, "sim")?.sim.state;
        let x = in_slice(x, nx_pts, "x")?;
        let v = in_slice(v, nv_pts, "v")?;
        let out = out_slice(out, out_len, nx_pts * nv_pts, "out")?;
        let grid = reconstruct_f(st, species, x, v)?;
        out.copy_from_slice(&grid.values);
        Ok(())
    })
}

/// Dense `(nv+1) x (nv+1)` row-major matrix mapping coefficients in basis
/// `from` to basis `to`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn awh_transform_build(from: AwhBasis, to: AwhBasis, nv: usize, out: *mut f64, len: usize) -> AwhStatus {
    guard(|| {
        let p = build_transform(basis(from)?, basis(to)?, nv)?;
        out_slice(out, len, p.entries().len(), "out")?.copy_from_slice(p.entries());
        Ok(())
    })
}

/// Re-expresses one real coefficient column `input[0..=nv]` in basis `to`.
///
/// # Safety
/// `input` and `output` must each hold `nv + 1` doubles; they may not overlap.
#[no_mangle]
pub unsafe extern "C" fn awh_transform_apply(
    from: AwhBasis,
    to: AwhBasis,
    nv: usize,
    input: *const f64,
    output: *mut f64,
) -> AwhStatus {
    guard(|| {
        let dim = nv.checked_add(1).ok_or_else(|| fail(AwhStatus::InvalidArgument, "nv too large"))?;
        let p = build_transform(basis(from)?, basis(to)?, nv)?;
        let input = in_slice(input, dim, "input")?;
        let output = out_slice(output, dim, dim, "output")?;
        for (n, o) in output.iter_mut().enumerate() {
            *o = (0..=n).map(|m| p.get(n, m) * input[m]).sum();
        }
        Ok(())
    })
}

/// `psi_0(v) .. psi_nmax(v)` of the basis `b`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn awh_psi(b: AwhBasis, v: f64, nmax: usize, out: *mut f64, len: usize) -> AwhStatus {
    guard(|| {
        let params = basis(b)?;
        if !v.is_finite() {
            return Err(fail(AwhStatus::InvalidArgument, "v is not finite"));
        }
        let vals = aw_hermite(v, &params, nmax);
        out_slice(out, len, vals.len(), "out")?.copy_from_slice(&vals);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> Option<String> {
        let p = awh_last_error_message();
        (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
    }

    #[test]
    fn error_codes_cover_variants() {
        assert_eq!(status_of(&Error::Parse("x".into())), AwhStatus::Parse);
        assert_eq!(status_of(&Error::NonConvergence { iterations: 3, residual: 1.0 }), AwhStatus::NonConvergence);
        assert_eq!(status_of(&Error::NoSuchSpecies(4)), AwhStatus::InvalidArgument);
        assert_eq!(status_of(&Error::Neutrality(1e-3)), AwhStatus::InvalidConfig);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, AwhStatus::Panic);
        assert!(last_error().unwrap().contains("boom"));
        assert_eq!(guard(|| Ok(())), AwhStatus::Ok);
        assert!(last_error().is_none());
    }

    #[test]
    fn short_buffer_reported() {
        let mut out = [0.0; 2];
        let s = unsafe { awh_psi(AwhBasis { alpha: 1.0, u: 0.0 }, 0.0, 4, out.as_mut_ptr(), out.len()) };
        assert_eq!(s, AwhStatus::BufferTooSmall);
        assert!(last_error().unwrap().contains("5 required"));
    }
}
