//! C ABI over `chronoscope`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns a [`ChronoStatus`]; on failure the message is
//! kept per thread and read with [`chrono_last_error`]. Outputs are written
//! only on success. Panics are caught at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chronoscope::aot::{aot_field, AotField, SpacetimeLattice};
use chronoscope::causal::{ci_exact_with_tol, ci_monte_carlo};
use chronoscope::hamlib::{build_ising, build_pxp, evolve, Hamiltonian};
use chronoscope::qcore::{PauliString, StateVector};
use chronoscope::{Error, C64};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChronoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SiteOutOfRange = 3,
    DimensionMismatch = 4,
    Numerical = 5,
    Capacity = 6,
    Codespace = 7,
    Panic = 8,
}

pub struct ChronoState(StateVector);
pub struct ChronoHamiltonian(Hamiltonian);
pub struct ChronoField(AotField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ChronoStatus {
    match err {
        Error::SiteOutOfRange { .. } => ChronoStatus::SiteOutOfRange,
        Error::InvalidArgument(_) => ChronoStatus::InvalidArgument,
        Error::DimensionMismatch(..) => ChronoStatus::DimensionMismatch,
        Error::NotNormalized(_) | Error::NonConvergence(_) | Error::Consistency(_) => ChronoStatus::Numerical,
        Error::SupportOverflow(_) | Error::AncillaBudget(_) => ChronoStatus::Capacity,
        Error::OutsideCodespace(_) | Error::NotLogical => ChronoStatus::Codespace,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChronoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChronoStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ChronoStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            ChronoStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ChronoStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chrono_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn chrono_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn chrono_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Product state from a label over `0 1 + - r`, site 0 first.
///
/// # Safety
/// `label` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_from_label(label: *const c_char, out: *mut *mut ChronoState) -> ChronoStatus {
    guard(|| {
        let s = StateVector::from_label(text(label, "label")?)?;
        *self::out(out, "out")? = boxed(ChronoState(s));
        Ok(())
    })
}

/// Haar-random state, reproducible for a given seed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_random(n_qubits: usize, seed: u64, out: *mut *mut ChronoState) -> ChronoStatus {
    guard(|| {
        if n_qubits == 0 || n_qubits > 24 {
            return Err(Fail::Arg(format!("n_qubits {n_qubits} outside 1..=24")));
        }
        let s = StateVector::random(n_qubits, &mut ChaCha8Rng::seed_from_u64(seed));
        *self::out(out, "out")? = boxed(ChronoState(s));
        Ok(())
    })
}

/// State from `2^n` split amplitudes. Must be normalized.
///
/// # Safety
/// `re` and `im` must each point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_from_amplitudes(
    n_qubits: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut ChronoState,
) -> ChronoStatus {
    guard(|| {
        let re = std::slice::from_raw_parts(get(re, "re")?, len);
        let im = std::slice::from_raw_parts(get(im, "im")?, len);
        let amps = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        *self::out(out, "out")? = boxed(ChronoState(StateVector::new(n_qubits, amps)?));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_free(state: *mut ChronoState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of qubits, or 0 for null.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_n_qubits(state: *const ChronoState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_qubits())
}

/// Copies the amplitudes into `re`/`im`, which must hold `2^n` entries.
///
/// # Safety
/// `re` and `im` must each be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chrono_state_amplitudes(
    state: *const ChronoState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> ChronoStatus {
    guard(|| {
        let amps = get(state, "state")?.0.amplitudes();
        if len != amps.len() {
            return Err(Fail::Arg(format!("buffer length {len}, need {}", amps.len())));
        }
        let re = std::slice::from_raw_parts_mut(out(re, "re")?, len);
        let im = std::slice::from_raw_parts_mut(out(im, "im")?, len);
        for (k, a) in amps.iter().enumerate() {
            re[k] = a.re;
            im[k] = a.im;
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_hamiltonian_ising(
    n_qubits: usize,
    j: f64,
    hx: f64,
    hz: f64,
    out: *mut *mut ChronoHamiltonian,
) -> ChronoStatus {
    guard(|| {
        *self::out(out, "out")? = boxed(ChronoHamiltonian(build_ising(n_qubits, j, hx, hz)?));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_hamiltonian_pxp(n_qubits: usize, out: *mut *mut ChronoHamiltonian) -> ChronoStatus {
    guard(|| {
        *self::out(out, "out")? = boxed(ChronoHamiltonian(build_pxp(n_qubits)?));
        Ok(())
    })
}

/// Sum of `coeffs[k] * strings[k]`, each string a Pauli word such as `"XZI"`.
///
/// # Safety
/// `coeffs` and `strings` must each hold `len` entries of the stated type.
#[no_mangle]
pub unsafe extern "C" fn chrono_hamiltonian_from_terms(
    n_qubits: usize,
    coeffs: *const f64,
    strings: *const *const c_char,
    len: usize,
    out: *mut *mut ChronoHamiltonian,
) -> ChronoStatus {
    guard(|| {
        let coeffs = std::slice::from_raw_parts(get(coeffs, "coeffs")?, len);
        let strings = std::slice::from_raw_parts(get(strings, "strings")?, len);
        let mut terms = Vec::with_capacity(len);
        for (&c, &s) in coeffs.iter().zip(strings) {
            terms.push((c, PauliString::parse(text(s, "string")?)?));
        }
        *self::out(out, "out")? = boxed(ChronoHamiltonian(Hamiltonian::new(n_qubits, terms)?));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chrono_hamiltonian_free(h: *mut ChronoHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// New state `exp(-iHt)|state>`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_evolve(
    state: *const ChronoState,
    h: *const ChronoHamiltonian,
    t: f64,
    tol: f64,
    out: *mut *mut ChronoState,
) -> ChronoStatus {
    guard(|| {
        let r = evolve(&get(state, "state")?.0, &get(h, "hamiltonian")?.0, t, tol)?;
        *self::out(out, "out")? = boxed(ChronoState(r.state));
        Ok(())
    })
}

/// Exact influence of `source` at time 0 on `target` at time `tau`.
///
/// # Safety
/// Handles must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_ci_exact(
    state: *const ChronoState,
    h: *const ChronoHamiltonian,
    source: usize,
    target: usize,
    tau: f64,
    tol: f64,
    value: *mut f64,
) -> ChronoStatus {
    guard(|| {
        let v = ci_exact_with_tol(&get(state, "state")?.0, &get(h, "hamiltonian")?.0, source, target, tau, tol)?;
        *out(value, "value")? = v.value;
        Ok(())
    })
}

/// Sampled influence with its standard error.
///
/// # Safety
/// Handles must be live; `value` and `stderr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_ci_monte_carlo(
    state: *const ChronoState,
    h: *const ChronoHamiltonian,
    source: usize,
    target: usize,
    tau: f64,
    n_samples: usize,
    seed: u64,
    value: *mut f64,
    stderr: *mut f64,
) -> ChronoStatus {
    guard(|| {
        let (s, h) = (&get(state, "state")?.0, &get(h, "hamiltonian")?.0);
        let (value, stderr) = (out(value, "value")?, out(stderr, "stderr")?);
        let v = ci_monte_carlo(s, h, source, target, tau, n_samples, seed)?;
        *value = v.value;
        *stderr = v.stderr.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Arrow-of-time field on `n_steps + 1` slices spaced by `dt`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_aot_field(
    state: *const ChronoState,
    h: *const ChronoHamiltonian,
    dt: f64,
    n_steps: usize,
    tol: f64,
    out: *mut *mut ChronoField,
) -> ChronoStatus {
    guard(|| {
        let (s, h) = (get(state, "state")?.0.clone(), get(h, "hamiltonian")?.0.clone());
        let lattice = SpacetimeLattice::with_tolerance(s, h, dt, n_steps, tol)?;
        let field = aot_field(&lattice)?;
        *self::out(out, "out")? = boxed(ChronoField(field));
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_field_shape(
    field: *const ChronoField,
    n_slices: *mut usize,
    n_sites: *mut usize,
) -> ChronoStatus {
    guard(|| {
        let f = &get(field, "field")?.0;
        let (a, b) = (out(n_slices, "n_slices")?, out(n_sites, "n_sites")?);
        *a = f.vectors.len();
        *b = f.vectors.first().map_or(0, Vec::len);
        Ok(())
    })
}

/// Field vector at slice `t`, site `x` (summed over one step, not divided
/// by `dt`), with the von Neumann entropy of that site.
///
/// # Safety
/// `field` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn chrono_field_get(
    field: *const ChronoField,
    t: usize,
    x: usize,
    v_t: *mut f64,
    v_x: *mut f64,
    entropy: *mut f64,
) -> ChronoStatus {
    guard(|| {
        let field = &get(field, "field")?.0;
        let (a, b, c) = (out(v_t, "v_t")?, out(v_x, "v_x")?, out(entropy, "entropy")?);
        let Some(v) = field.vectors.get(t).and_then(|row| row.get(x)) else {
            return Err(Fail::Arg(format!("index ({t}, {x}) outside the field")));
        };
        *a = v.v_t;
        *b = v.v_x;
        *c = field.entropy.von_neumann[t][x];
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chrono_field_free(field: *mut ChronoField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
