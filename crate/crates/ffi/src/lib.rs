//! C ABI for the `deformed-bec` model.
//!
//! A model is an opaque `DbecModel*` created by [`dbec_model_new`] and
//! released with [`dbec_model_free`]. Every fallible call returns a
//! [`DbecStatus`]; on failure, [`dbec_last_error_message`] describes the most
//! recent error raised on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use deformed_bec::model::{
    solve_deformed_steady_state_with, undeformed_steady_state, ModelParams, SolverOptions, Spectrum, SpectrumVariant,
};
use deformed_bec::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    NoConvergence = 3,
    Unstable = 4,
    Overflow = 5,
    Domain = 6,
    SingularSolve = 7,
    Truncation = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbecVariant {
    /// `|B|^2 / |Xi|^2`
    Paper = 0,
    /// `2 Gamma |B|^2 / |Xi|^2`
    Physical = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbecComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbecSteadyState {
    pub beta: DbecComplex,
    pub beta_inf: DbecComplex,
    pub lambda1: DbecComplex,
    pub lambda2: DbecComplex,
    pub scaled_residual: f64,
    pub iterations: u32,
    pub stable: bool,
}

/// Opaque model handle.
pub struct DbecModel {
    params: ModelParams,
    spectrum: Option<Spectrum>,
}

impl DbecModel {
    fn spectrum(&mut self) -> Result<&Spectrum, Error> {
        if self.spectrum.is_none() {
            self.spectrum = Some(Spectrum::new(&self.params)?);
        }
        Ok(self.spectrum.as_ref().expect("just filled"))
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(err: &Error) -> DbecStatus {
    match err {
        Error::InvalidParams(_) => DbecStatus::InvalidParams,
        Error::NoConvergence { .. } => DbecStatus::NoConvergence,
        Error::Unstable { .. } => DbecStatus::Unstable,
        Error::Overflow { .. } => DbecStatus::Overflow,
        Error::Domain { .. } => DbecStatus::Domain,
        Error::SingularSolve(_) => DbecStatus::SingularSolve,
        Error::Truncation(_) => DbecStatus::Truncation,
    }
}

enum Failure {
    Null(&'static str),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> DbecStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DbecStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer passed for `{what}`"));
            DbecStatus::NullPointer
        }
        Ok(Err(Failure::Model(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            DbecStatus::Panic
        }
    }
}

fn complex(z: Complex64) -> DbecComplex {
    DbecComplex { re: z.re, im: z.im }
}

/// # Safety
/// `model` must be null or a live handle from [`dbec_model_new`] that no
/// other thread is using.
unsafe fn handle<'a>(model: *mut DbecModel) -> Result<&'a mut DbecModel, Failure> {
    unsafe { model.as_mut() }.ok_or(Failure::Null("model"))
}

/// Creates a model with rates in arbitrary but consistent units.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one `DbecModel*`.
#[no_mangle]
pub unsafe extern "C" fn dbec_model_new(
    delta: f64,
    g: f64,
    gamma: f64,
    n_atoms: f64,
    out: *mut *mut DbecModel,
) -> DbecStatus {
    guarded(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let params = ModelParams::new(delta, g, gamma, n_atoms)?;
        let boxed = Box::new(DbecModel { params, spectrum: None });
        unsafe { *out = Box::into_raw(boxed) };
        Ok(())
    })
}

/// Overrides the deformation parameter, which otherwise equals `1/N`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dbec_model_set_eta(model: *mut DbecModel, eta: f64) -> DbecStatus {
    guarded(|| {
        let m = unsafe { handle(model) }?;
        m.params = m.params.with_eta(eta)?;
        m.spectrum = None;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a live handle not used again afterwards.
#[no_mangle]
pub unsafe extern "C" fn dbec_model_free(model: *mut DbecModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `model` must be a live handle and `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dbec_model_steady_state(model: *mut DbecModel, out: *mut DbecSteadyState) -> DbecStatus {
    guarded(|| {
        let m = unsafe { handle(model) }?;
        let out = unsafe { out.as_mut() }.ok_or(Failure::Null("out"))?;
        let st = solve_deformed_steady_state_with(&m.params, &SolverOptions::default())?;
        *out = DbecSteadyState {
            beta: complex(st.beta),
            beta_inf: complex(undeformed_steady_state(&m.params)),
            lambda1: complex(st.drift_eigenvalues.0),
            lambda2: complex(st.drift_eigenvalues.1),
            scaled_residual: st.scaled_residual,
            iterations: st.iterations.try_into().unwrap_or(u32::MAX),
            stable: st.stable,
        };
        Ok(())
    })
}

/// `||beta| - |beta_inf||` for the model's parameters.
///
/// # Safety
/// `model` must be a live handle and `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dbec_model_deviation(model: *mut DbecModel, out: *mut f64) -> DbecStatus {
    guarded(|| {
        let m = unsafe { handle(model) }?;
        let out = unsafe { out.as_mut() }.ok_or(Failure::Null("out"))?;
        let st = solve_deformed_steady_state_with(&m.params, &SolverOptions::default())?;
        *out = (st.beta.norm() - undeformed_steady_state(&m.params).norm()).abs();
        Ok(())
    })
}

/// Evaluates the fluctuation spectrum at `len` frequencies. Fails with
/// `DBEC_STATUS_UNSTABLE` when the steady state is not an attractor.
///
/// # Safety
/// `model` must be a live handle; `omega` and `out` must each point to `len`
/// valid `double`s (they may be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn dbec_model_spectrum(
    model: *mut DbecModel,
    variant: DbecVariant,
    omega: *const f64,
    out: *mut f64,
    len: usize,
) -> DbecStatus {
    guarded(|| {
        let m = unsafe { handle(model) }?;
        if len == 0 {
            return Ok(());
        }
        if omega.is_null() {
            return Err(Failure::Null("omega"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let omega = unsafe { std::slice::from_raw_parts(omega, len) };
        let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
        let variant = match variant {
            DbecVariant::Paper => SpectrumVariant::Paper,
            DbecVariant::Physical => SpectrumVariant::Physical,
        };
        let spec = m.spectrum()?;
        for (o, &w) in out.iter_mut().zip(omega) {
            *o = spec.eval(w, variant);
        }
        Ok(())
    })
}

/// Message for the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dbec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn dbec_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a NUL byte"),
    };
    VERSION.as_ptr()
}
