//! C ABI over `nelson-fiber`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns an [`NfStatus`];
//! on failure [`nf_last_error`] describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nelson_fiber::analysis::{perron_frobenius, SpectralTolerances, Spectrum};
use nelson_fiber::basis::enumerate_basis;
use nelson_fiber::cli::config::ExperimentConfig;
use nelson_fiber::cli::run::{run, RunReport};
use nelson_fiber::grid::build_grid;
use nelson_fiber::nelson::HamiltonianBundle;
use nelson_fiber::operator::FockOperator;
use nelson_fiber::split::kappa_split;
use nelson_fiber::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    CutoffOrder = 5,
    DimensionCeiling = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Io = 9,
    Panic = 10,
}

/// Which operator of an assembled Hamiltonian to read.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfOperator {
    Full = 0,
    Renormalized = 1,
    Local = 2,
    Tail = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NfGroundState {
    pub lambda_min: f64,
    pub gap: f64,
    pub spectral_radius: f64,
    pub strictly_positive: bool,
    pub degenerate: bool,
}

/// Assembled Hamiltonians for one configuration.
pub struct NfHamiltonian {
    mode_count: usize,
    bundle: HamiltonianBundle,
}

/// Result of the full check suite.
pub struct NfRun {
    report: RunReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> NfStatus {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) | Error::Json(_) => NfStatus::Config,
        Error::CutoffOrder(_) => NfStatus::CutoffOrder,
        Error::DimensionCeiling { .. } | Error::QuadratureBudget(_) => NfStatus::DimensionCeiling,
        Error::NotHermitian { .. } | Error::Unitarity { .. } | Error::NotErgodic { .. } => NfStatus::Numerical,
        Error::Io(_) | Error::MissingFile(_) | Error::CorruptFile { .. } => NfStatus::Io,
        _ => NfStatus::InvalidArgument,
    }
}

fn fail(status: NfStatus, msg: impl Into<String>) -> NfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), NfStatus>) -> NfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NfStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(NfStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: nelson_fiber::Result<T>) -> Result<T, NfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, NfStatus> {
    if s.is_null() {
        return Err(fail(NfStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(NfStatus::InvalidUtf8, e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), NfStatus> {
    if p.is_null() {
        Err(fail(NfStatus::NullPointer, format!("null {what}")))
    } else {
        Ok(())
    }
}

/// Why the last call on this thread failed, or an empty string if it
/// succeeded. The pointer stays valid until the next call into this library
/// on the same thread.
#[no_mangle]
pub extern "C" fn nf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Assembles every Hamiltonian described by a JSON configuration.
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_new(config_json: *const c_char, out: *mut *mut NfHamiltonian) -> NfStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        *out = ptr::null_mut();
        let c = lift(ExperimentConfig::from_json(text(config_json)?))?;
        let grid = lift(build_grid(&c.grid))?;
        let basis = lift(enumerate_basis(grid.len(), c.n_max))?;
        let split = lift(kappa_split(&basis, &grid, c.params.window.kappa))?;
        let bundle = lift(HamiltonianBundle::assemble(&basis, &grid, &c.params, &split))?;
        *out = Box::into_raw(Box::new(NfHamiltonian { mode_count: grid.len(), bundle }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`nf_hamiltonian_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_free(h: *mut NfHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

fn operator(h: &NfHamiltonian, which: NfOperator) -> &FockOperator {
    match which {
        NfOperator::Full => &h.bundle.h_full,
        NfOperator::Renormalized => &h.bundle.h_ren,
        NfOperator::Local => &h.bundle.h_local,
        NfOperator::Tail => &h.bundle.k_tail,
    }
}

/// Writes the number of modes and the Fock space dimension.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_shape(h: *const NfHamiltonian, modes: *mut usize, dimension: *mut usize) -> NfStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(modes, "modes")?;
        non_null(dimension, "dimension")?;
        *modes = (*h).mode_count;
        *dimension = (*h).bundle.h_full.dim();
        Ok(())
    })
}

/// Energy counterterms `E_Λ`, `E_κ` and `E_κ^Λ` used in the assembly.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_energies(
    h: *const NfHamiltonian,
    e_lambda: *mut f64,
    e_kappa: *mut f64,
    e_window: *mut f64,
) -> NfStatus {
    guard(|| {
        non_null(h, "handle")?;
        for p in [e_lambda, e_kappa, e_window] {
            non_null(p, "energy output")?;
        }
        let b = &(*h).bundle;
        *e_lambda = b.e_lambda;
        *e_kappa = b.e_kappa;
        *e_window = b.e_window;
        Ok(())
    })
}

/// Copies one operator in column-major order. `len` must be at least
/// `dim * dim` for that operator; on [`NfStatus::BufferTooSmall`] the
/// required length is written to `required`.
///
/// # Safety
/// `buffer` must hold `len` doubles; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_copy(
    h: *const NfHamiltonian,
    which: NfOperator,
    buffer: *mut f64,
    len: usize,
    required: *mut usize,
) -> NfStatus {
    guard(|| {
        non_null(h, "handle")?;
        let m = operator(&*h, which).matrix();
        let need = m.len();
        if !required.is_null() {
            *required = need;
        }
        if len < need {
            return Err(fail(NfStatus::BufferTooSmall, format!("buffer holds {len} values, {need} needed")));
        }
        non_null(buffer, "buffer")?;
        std::slice::from_raw_parts_mut(buffer, need).copy_from_slice(m.as_slice());
        Ok(())
    })
}

/// Ground-state data of one operator.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nf_hamiltonian_ground(
    h: *const NfHamiltonian,
    which: NfOperator,
    gap_rel: f64,
    tau_pos: f64,
    out: *mut NfGroundState,
) -> NfStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "output")?;
        if !(gap_rel > 0.0 && tau_pos > 0.0) {
            return Err(fail(NfStatus::InvalidArgument, "tolerances must be positive"));
        }
        let r = lift(perron_frobenius(operator(&*h, which), &[], &SpectralTolerances { tau_pos, gap_rel }))?;
        *out = NfGroundState {
            lambda_min: r.lambda_min,
            gap: r.gap,
            spectral_radius: r.spectral_radius,
            strictly_positive: r.strictly_positive_ground,
            degenerate: r.degenerate,
        };
        Ok(())
    })
}

/// Smallest entry of `e^{-β H}` for the chosen operator.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nf_semigroup_min_entry(h: *const NfHamiltonian, which: NfOperator, beta: f64, out: *mut f64) -> NfStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "output")?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(fail(NfStatus::InvalidArgument, format!("β must be finite and nonnegative, got {beta}")));
        }
        *out = lift(Spectrum::of(operator(&*h, which)))?.semigroup(beta).min_entry();
        Ok(())
    })
}

/// Runs the full check suite for a JSON configuration.
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nf_run(config_json: *const c_char, out: *mut *mut NfRun) -> NfStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        *out = ptr::null_mut();
        let c = lift(ExperimentConfig::from_json(text(config_json)?))?;
        let report = lift(run(&c))?;
        let json = lift(serde_json::to_string(&report).map_err(Error::from))?;
        let json = CString::new(json).map_err(|e| fail(NfStatus::Panic, e.to_string()))?;
        *out = Box::into_raw(Box::new(NfRun { report, json }));
        Ok(())
    })
}

/// Whether the run had no failing fatal or expected-negative checks.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nf_run_summary(r: *const NfRun, passed: *mut bool, total: *mut usize, failed: *mut usize) -> NfStatus {
    guard(|| {
        non_null(r, "handle")?;
        for p in [total, failed] {
            non_null(p, "count output")?;
        }
        non_null(passed, "passed output")?;
        let s = &(*r).report.summary;
        *passed = s.pass;
        *total = s.total;
        *failed = s.total - s.passed;
        Ok(())
    })
}

/// The full report as JSON, owned by the handle.
///
/// # Safety
/// `r` must be a live handle; returns null for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nf_run_report_json(r: *const NfRun) -> *const c_char {
    if r.is_null() {
        set_error("null handle");
        return ptr::null();
    }
    (*r).json.as_ptr()
}

/// # Safety
/// `r` must come from [`nf_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_run_free(r: *mut NfRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
