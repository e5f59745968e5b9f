//! C ABI over `fofh-core`.
//!
//! Objects are opaque handles created by `fofh_*` constructors and released
//! with the matching `*_free`. Every fallible call returns a [`FofhStatus`];
//! on failure `fofh_last_error_message` describes the error for the calling
//! thread. Results are written through out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fofh_core::classical::{self, PhasePoint};
use fofh_core::evolution::{self, EnergyConvention};
use fofh_core::fock::{self, CoherentLabel, FockState};
use fofh_core::{nogo, Complex64, Error, HamiltonianFunction};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FofhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Truncation = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FofhEnergyConvention {
    Classical = 0,
    QuantumMean = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FofhComplex {
    pub re: f64,
    pub im: f64,
}

/// Moments of `X = (a + a^dag)/sqrt 2`, `P` and `H0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FofhObservables {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub mean_h0: f64,
    pub var_h0: f64,
}

/// A function `f` of the oscillator Hamiltonian.
pub struct FofhHamiltonian(HamiltonianFunction);

/// A truncated Fock-space state.
pub struct FofhState(FockState);

impl From<FofhComplex> for Complex64 {
    fn from(z: FofhComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for FofhComplex {
    fn from(z: Complex64) -> Self {
        FofhComplex { re: z.re, im: z.im }
    }
}

impl From<FofhEnergyConvention> for EnergyConvention {
    fn from(c: FofhEnergyConvention) -> Self {
        match c {
            FofhEnergyConvention::Classical => EnergyConvention::Classical,
            FofhEnergyConvention::QuantumMean => EnergyConvention::QuantumMean,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(FofhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownHamiltonian(_) | Error::Parse(_) => FofhStatus::Parse,
            Error::Truncation { .. } => FofhStatus::Truncation,
            Error::InvalidArgument(_) => FofhStatus::InvalidArgument,
            _ if e.is_numeric() => FofhStatus::Numeric,
            _ => FofhStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<fofh_core::hamiltonian::DomainError> for Failure {
    fn from(e: fofh_core::hamiltonian::DomainError) -> Self {
        Error::from(e).into()
    }
}

fn null(what: &str) -> Failure {
    Failure(FofhStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F>(body: F) -> FofhStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FofhStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FofhStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `fofh_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fofh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn fofh_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Resolves a builtin name (`id`, `er`, `kerr:chi=0.3`, ...) or parses an
/// expression in `x`.
///
/// # Safety
/// `spec` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_hamiltonian_new(spec: *const c_char, out: *mut *mut FofhHamiltonian) -> FofhStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Failure(FofhStatus::InvalidArgument, "spec is not UTF-8".into()))?;
        let f = HamiltonianFunction::resolve(text)?;
        write(out, Box::into_raw(Box::new(FofhHamiltonian(f))), "out")
    })
}

/// # Safety
/// `h` must come from `fofh_hamiltonian_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fofh_hamiltonian_free(h: *mut FofhHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `f(x)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_hamiltonian_eval(h: *const FofhHamiltonian, x: f64, out: *mut f64) -> FofhStatus {
    guard(|| {
        let v = deref(h, "h")?.0.eval(x)?;
        write(out, v, "out")
    })
}

/// `f'(x)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_hamiltonian_deriv(h: *const FofhHamiltonian, x: f64, out: *mut f64) -> FofhStatus {
    guard(|| {
        let v = deref(h, "h")?.0.deriv(x)?;
        write(out, v, "out")
    })
}

/// Classical phase point `z0` evolved for time `t` under `f`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_classical_evolve(
    h: *const FofhHamiltonian,
    z0: FofhComplex,
    t: f64,
    out: *mut FofhComplex,
) -> FofhStatus {
    guard(|| {
        let z = classical::evolve_f(&deref(h, "h")?.0, PhasePoint(z0.into()), t)?;
        write(out, z.z().into(), "out")
    })
}

/// Coherent state `|alpha>`. `nmax = 0` selects the default truncation;
/// a smaller-than-default `nmax` is refused unless `force` is non-zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_coherent_state(
    alpha: FofhComplex,
    nmax: usize,
    force: bool,
    out: *mut *mut FofhState,
) -> FofhStatus {
    guard(|| {
        let alpha: Complex64 = alpha.into();
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Failure(FofhStatus::InvalidArgument, "alpha must be finite".into()));
        }
        let label = CoherentLabel::new(alpha);
        let state = match (nmax, force) {
            (0, _) => fock::coherent_state_default(label),
            (n, true) => fock::coherent_state_forced(label, n),
            (n, false) => fock::coherent_state(label, n)?,
        };
        write(out, Box::into_raw(Box::new(FofhState(state))), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_free(s: *mut FofhState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of stored amplitudes, `nmax + 1`; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_len(s: *const FofhState) -> usize {
    s.as_ref().map_or(0, |s| s.0.amplitudes().len())
}

/// Copies the amplitudes into `buf`, which must hold `fofh_state_len(s)`
/// entries.
///
/// # Safety
/// `buf` must point to `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_amplitudes(s: *const FofhState, buf: *mut FofhComplex, cap: usize) -> FofhStatus {
    guard(|| {
        let amps = deref(s, "s")?.0.amplitudes();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if cap < amps.len() {
            return Err(Failure(
                FofhStatus::BufferTooSmall,
                format!("buffer holds {cap} amplitudes, {} needed", amps.len()),
            ));
        }
        for (k, a) in amps.iter().enumerate() {
            buf.add(k).write((*a).into());
        }
        Ok(())
    })
}

/// Probability mass dropped by the truncation.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_tail_bound(s: *const FofhState, out: *mut f64) -> FofhStatus {
    guard(|| write(out, deref(s, "s")?.0.tail_bound(), "out"))
}

/// `exp(-i t f(H0)) s` as a new handle.
///
/// # Safety
/// `s` and `h` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_evolve(
    s: *const FofhState,
    h: *const FofhHamiltonian,
    t: f64,
    out: *mut *mut FofhState,
) -> FofhStatus {
    guard(|| {
        let evolved = evolution::evolve(&deref(s, "s")?.0, &deref(h, "h")?.0, t)?;
        write(out, Box::into_raw(Box::new(FofhState(evolved))), "out")
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_state_expectations(s: *const FofhState, out: *mut FofhObservables) -> FofhStatus {
    guard(|| {
        let r = fock::expectations(&deref(s, "s")?.0);
        let obs = FofhObservables {
            mean_x: r.mean_x,
            mean_p: r.mean_p,
            var_x: r.var_x,
            var_p: r.var_p,
            mean_h0: r.mean_h0,
            var_h0: r.var_h0,
        };
        write(out, obs, "out")
    })
}

/// `|<s| exp(-i t f(H0)) |s>|`.
///
/// # Safety
/// `s` and `h` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_autocorrelation(
    s: *const FofhState,
    h: *const FofhHamiltonian,
    t: f64,
    out: *mut f64,
) -> FofhStatus {
    guard(|| {
        let a = evolution::autocorrelation(&deref(s, "s")?.0, &deref(h, "h")?.0, t)?;
        write(out, a, "out")
    })
}

/// `1 - |<alpha_cl(t)| exp(-i t f(H0)) |alpha0>|` at the default truncation.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_coherence_defect(
    alpha0: FofhComplex,
    h: *const FofhHamiltonian,
    t: f64,
    convention: FofhEnergyConvention,
    out: *mut f64,
) -> FofhStatus {
    guard(|| {
        let d = evolution::coherence_defect_with(
            CoherentLabel::new(alpha0.into()),
            &deref(h, "h")?.0,
            t,
            convention.into(),
        )?;
        write(out, d, "out")
    })
}

/// `(f(E_n) - f(E_m)) / f'(r^2/2)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_branch_ratio(
    h: *const FofhHamiltonian,
    n: usize,
    m: usize,
    r: f64,
    out: *mut f64,
) -> FofhStatus {
    guard(|| write(out, nogo::branch_ratio(&deref(h, "h")?.0, n, m, r)?, "out"))
}

/// Einstein-Rosen winding residual: distance of the phase to `2 pi Z`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fofh_er_residual(n: usize, m: usize, k: i64, r: f64, out: *mut f64) -> FofhStatus {
    guard(|| write(out, nogo::er_residual(n, m, k, r).residual, "out"))
}
