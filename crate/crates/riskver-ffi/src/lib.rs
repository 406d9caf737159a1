//! C ABI for the risk verification library.
//!
//! Handles (`RvPredicates`, `RvFormula`, `RvTrace`, `RvSamples`) are opaque;
//! create them with the `rv_*_new`/`rv_*_parse` constructors and release them
//! with the matching `rv_*_free`. Every fallible call returns an [`RvStatus`]
//! and leaves a human-readable message retrievable with [`rv_last_error`].
//! The generated header lives at `include/riskver.h`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::slice;

use riskver::cli::wasserstein_1d;
use riskver::gap::{
    compare_controllers, linear_iiss_gain, lipschitz_delta, CertifiedOrder, Comparison,
    DisturbanceBounds, GapBound, GapError, IissGain, LipschitzConstants,
};
use riskver::risk::{
    confidence_margin, cvar_upper_bound, empirical_cdf, empirical_cvar, empirical_var, mean_risk,
    var_upper_bound, worst_case_risk, RiskError, RiskQuery, SampleSet,
};
use riskver::stl::{
    boolean_sat_with, parse_formula, robustness_with, EvalOptions, Formula, FunctionRegistry,
    NormKind, PredicateAtom, PredicateTable, StlError, Trace,
};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    SyntaxError = 4,
    UnknownPredicate = 5,
    TraceTooShort = 6,
    DimensionMismatch = 7,
    InsufficientSamples = 8,
    MissingSupportBound = 9,
    NotContractive = 10,
    BufferTooSmall = 11,
}

/// Norm selector for ball predicates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RvNorm {
    L2 = 0,
    Linf = 1,
}

/// Scalar predicate callback: receives the state vector and the user data
/// pointer given at registration. Must be safe to call from multiple threads.
pub type RvPredicateFn =
    extern "C" fn(state: *const f64, dim: usize, user_data: *mut c_void) -> f64;

/// Named predicates plus registered scalar callbacks (opaque).
pub struct RvPredicates {
    table: PredicateTable,
    registry: FunctionRegistry,
}

/// A parsed formula (opaque).
pub struct RvFormula(Formula);

/// A fixed-step state trace (opaque).
pub struct RvTrace(Trace);

/// Robustness-cost samples with cached order statistics (opaque).
pub struct RvSamples(SampleSet);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: RvStatus, msg: &str) -> RvStatus {
    set_error(msg);
    status
}

fn stl_fail(e: &StlError) -> RvStatus {
    let status = match e {
        StlError::Syntax { .. } => RvStatus::SyntaxError,
        StlError::UnknownPredicate(_) => RvStatus::UnknownPredicate,
        StlError::TraceTooShort { .. } => RvStatus::TraceTooShort,
        StlError::DimensionMismatch { .. } => RvStatus::DimensionMismatch,
        _ => RvStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

fn risk_fail(e: &RiskError) -> RvStatus {
    let status = match e {
        RiskError::InsufficientSamples { .. } => RvStatus::InsufficientSamples,
        RiskError::MissingSupportBound => RvStatus::MissingSupportBound,
        _ => RvStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

fn gap_fail(e: &GapError) -> RvStatus {
    let status = match e {
        GapError::NormNotContractive { .. } => RvStatus::NotContractive,
        GapError::Risk(RiskError::InsufficientSamples { .. }) => RvStatus::InsufficientSamples,
        _ => RvStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RvStatus> {
    if ptr.is_null() {
        return Err(fail(RvStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(RvStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

/// # Safety
/// `ptr` must point at `len` readable doubles.
unsafe fn read_slice<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], RvStatus> {
    if ptr.is_null() {
        return Err(fail(RvStatus::NullPointer, "array argument is null"));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

macro_rules! nonnull {
    ($ptr:expr, $what:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return fail(RvStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! nonnull_mut {
    ($ptr:expr, $what:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => return fail(RvStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message on this thread into `buf` (NUL-terminated,
/// truncating) and returns the full message length in bytes excluding the
/// terminator. Passing a null or empty buffer just queries the length.
///
/// # Safety
/// `buf` must point at `cap` writable bytes when non-null.
#[no_mangle]
pub unsafe extern "C" fn rv_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

// --------------------------------------------------------------------------
// Predicates
// --------------------------------------------------------------------------

#[no_mangle]
pub extern "C" fn rv_predicates_new() -> *mut RvPredicates {
    Box::into_raw(Box::new(RvPredicates {
        table: PredicateTable::new(),
        registry: FunctionRegistry::new(),
    }))
}

/// # Safety
/// `p` must come from [`rv_predicates_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_free(p: *mut RvPredicates) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Adds the halfspace predicate `a . x - b >= 0`.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_add_halfspace(
    p: *mut RvPredicates,
    name: *const c_char,
    a: *const f64,
    dim: usize,
    b: f64,
    negated: bool,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let name = match read_str(name) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let a = match read_slice(a, dim) {
        Ok(s) => s.to_vec(),
        Err(st) => return st,
    };
    match PredicateAtom::halfspace(name, a, b) {
        Ok(atom) => {
            p.table
                .insert(if negated { atom.complement() } else { atom });
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Adds the box predicate `lo <= x <= hi` componentwise.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_add_axis_box(
    p: *mut RvPredicates,
    name: *const c_char,
    lo: *const f64,
    hi: *const f64,
    dim: usize,
    negated: bool,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let name = match read_str(name) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let (lo, hi) = match (read_slice(lo, dim), read_slice(hi, dim)) {
        (Ok(l), Ok(h)) => (l.to_vec(), h.to_vec()),
        (Err(st), _) | (_, Err(st)) => return st,
    };
    match PredicateAtom::axis_box(name, lo, hi) {
        Ok(atom) => {
            p.table
                .insert(if negated { atom.complement() } else { atom });
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Adds the ball predicate `||x - center|| <= radius` in the given norm.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_add_norm_ball(
    p: *mut RvPredicates,
    name: *const c_char,
    center: *const f64,
    dim: usize,
    radius: f64,
    norm: RvNorm,
    negated: bool,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let name = match read_str(name) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let center = match read_slice(center, dim) {
        Ok(s) => s.to_vec(),
        Err(st) => return st,
    };
    let kind = match norm {
        RvNorm::L2 => NormKind::L2,
        RvNorm::Linf => NormKind::Linf,
    };
    match PredicateAtom::norm_ball(name, center, radius, kind) {
        Ok(atom) => {
            p.table
                .insert(if negated { atom.complement() } else { atom });
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

struct CCallback {
    func: RvPredicateFn,
    user_data: *mut c_void,
}

impl CCallback {
    fn call(&self, state: &[f64]) -> f64 {
        (self.func)(state.as_ptr(), state.len(), self.user_data)
    }
}

// The registration contract requires the callback and its user data to be
// callable from any thread.
unsafe impl Send for CCallback {}
unsafe impl Sync for CCallback {}

/// Registers a scalar callback under `handle` for use by functional
/// predicates (including those from a JSON table). Pass NaN as `lipschitz`
/// when no constant is declared.
///
/// # Safety
/// `func` must be callable with any state of the advertised dimension from
/// any thread, for as long as the predicates handle lives; `user_data` must
/// remain valid likewise.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_register_function(
    p: *mut RvPredicates,
    handle: *const c_char,
    func: RvPredicateFn,
    user_data: *mut c_void,
    lipschitz: f64,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let handle = match read_str(handle) {
        Ok(s) => s.to_string(),
        Err(st) => return st,
    };
    let cb = CCallback { func, user_data };
    let lip = if lipschitz.is_nan() {
        None
    } else {
        Some(lipschitz)
    };
    p.registry
        .register(handle, lip, move |state: &[f64]| cb.call(state));
    RvStatus::Ok
}

/// Adds a functional predicate backed by a registered callback handle.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_add_functional(
    p: *mut RvPredicates,
    name: *const c_char,
    handle: *const c_char,
    negated: bool,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let name = match read_str(name) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let handle = match read_str(handle) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let Some((func, lip)) = p.registry.get(handle) else {
        return fail(
            RvStatus::UnknownPredicate,
            &format!("functional handle `{handle}` is not registered"),
        );
    };
    match PredicateAtom::functional(name, handle, func, lip) {
        Ok(atom) => {
            p.table
                .insert(if negated { atom.complement() } else { atom });
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Loads a predicate table from its JSON file format, merging over existing
/// entries. Functional handles resolve against previously registered
/// callbacks.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_predicates_load_json(
    p: *mut RvPredicates,
    json: *const c_char,
) -> RvStatus {
    let p = nonnull_mut!(p, "predicates handle");
    let json = match read_str(json) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match PredicateTable::from_json_str(json, &p.registry) {
        Ok(table) => {
            for name in table.names() {
                p.table.insert(table.get(name).expect("known name").clone());
            }
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

// --------------------------------------------------------------------------
// Formulas
// --------------------------------------------------------------------------

/// Parses a formula against the predicate table.
///
/// # Safety
/// Pointer arguments follow the module conventions; `out` receives an owned
/// handle to release with [`rv_formula_free`].
#[no_mangle]
pub unsafe extern "C" fn rv_formula_parse(
    text: *const c_char,
    p: *const RvPredicates,
    out: *mut *mut RvFormula,
) -> RvStatus {
    let p = nonnull!(p, "predicates handle");
    let out = nonnull_mut!(out, "output pointer");
    let text = match read_str(text) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match parse_formula(text, &p.table) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(RvFormula(f)));
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// # Safety
/// `f` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rv_formula_free(f: *mut RvFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Formula length in steps (bounded formulas only).
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_formula_length(f: *const RvFormula, out: *mut usize) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let out = nonnull_mut!(out, "output pointer");
    match f.0.length() {
        Ok(len) => {
            *out = len;
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_formula_is_bounded(f: *const RvFormula, out: *mut bool) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let out = nonnull_mut!(out, "output pointer");
    *out = f.0.is_bounded();
    RvStatus::Ok
}

/// Rewrites into positive normal form.
///
/// # Safety
/// Pointer arguments follow the module conventions; `out` receives an owned
/// handle.
#[no_mangle]
pub unsafe extern "C" fn rv_formula_to_pnf(
    f: *const RvFormula,
    out: *mut *mut RvFormula,
) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let out = nonnull_mut!(out, "output pointer");
    match f.0.to_pnf() {
        Ok(pnf) => {
            *out = Box::into_raw(Box::new(RvFormula(pnf)));
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Pretty-prints the formula in the parseable grammar. Writes at most
/// `cap - 1` bytes plus a NUL terminator and stores the full length in
/// `written`; returns BufferTooSmall when truncated.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_formula_print(
    f: *const RvFormula,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let text = f.0.to_string();
    if !written.is_null() {
        *written = text.len();
    }
    if buf.is_null() || cap == 0 {
        return RvStatus::BufferTooSmall;
    }
    let n = text.len().min(cap - 1);
    std::ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, n);
    *buf.add(n) = 0;
    if n < text.len() {
        fail(RvStatus::BufferTooSmall, "formula text truncated")
    } else {
        RvStatus::Ok
    }
}

// --------------------------------------------------------------------------
// Traces and evaluation
// --------------------------------------------------------------------------

/// Builds a trace from row-major state data (`steps` rows of `dim` values)
/// sampled every `dt` seconds.
///
/// # Safety
/// `data` must point at `steps * dim` readable doubles; `out` receives an
/// owned handle to release with [`rv_trace_free`].
#[no_mangle]
pub unsafe extern "C" fn rv_trace_new(
    dt: f64,
    data: *const f64,
    steps: usize,
    dim: usize,
    out: *mut *mut RvTrace,
) -> RvStatus {
    let out = nonnull_mut!(out, "output pointer");
    let flat = match read_slice(data, steps.saturating_mul(dim)) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let states: Vec<Vec<f64>> = flat.chunks(dim.max(1)).map(|c| c.to_vec()).collect();
    match Trace::new(dt, states) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(RvTrace(t)));
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rv_trace_free(t: *mut RvTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Largest pointwise Euclidean distance between two traces of equal shape.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_trace_sup_distance(
    a: *const RvTrace,
    b: *const RvTrace,
    out: *mut f64,
) -> RvStatus {
    let a = nonnull!(a, "trace handle");
    let b = nonnull!(b, "trace handle");
    let out = nonnull_mut!(out, "output pointer");
    match a.0.sup_distance(&b.0) {
        Ok(d) => {
            *out = d;
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Quantitative robustness of the formula over the trace at step `t`.
/// `closed_until` selects the closed inner Until interval instead of the
/// default open one.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_robustness(
    f: *const RvFormula,
    x: *const RvTrace,
    t: usize,
    closed_until: bool,
    out: *mut f64,
) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let x = nonnull!(x, "trace handle");
    let out = nonnull_mut!(out, "output pointer");
    let opts = if closed_until {
        EvalOptions::closed_until()
    } else {
        EvalOptions::default()
    };
    match robustness_with(&f.0, &x.0, t, &opts) {
        Ok(v) => {
            *out = v;
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

/// Boolean satisfaction of the formula over the trace at step `t`.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_boolean_sat(
    f: *const RvFormula,
    x: *const RvTrace,
    t: usize,
    closed_until: bool,
    out: *mut bool,
) -> RvStatus {
    let f = nonnull!(f, "formula handle");
    let x = nonnull!(x, "trace handle");
    let out = nonnull_mut!(out, "output pointer");
    let opts = if closed_until {
        EvalOptions::closed_until()
    } else {
        EvalOptions::default()
    };
    match boolean_sat_with(&f.0, &x.0, t, &opts) {
        Ok(v) => {
            *out = v;
            RvStatus::Ok
        }
        Err(e) => stl_fail(&e),
    }
}

// --------------------------------------------------------------------------
// Risk estimation
// --------------------------------------------------------------------------

/// Builds a sample set from `n` cost values (rejects NaN and empty input).
///
/// # Safety
/// `values` must point at `n` readable doubles; `out` receives an owned
/// handle to release with [`rv_samples_free`].
#[no_mangle]
pub unsafe extern "C" fn rv_samples_new(
    values: *const f64,
    n: usize,
    out: *mut *mut RvSamples,
) -> RvStatus {
    let out = nonnull_mut!(out, "output pointer");
    let values = match read_slice(values, n) {
        Ok(s) => s.to_vec(),
        Err(st) => return st,
    };
    match SampleSet::new(values) {
        Ok(s) => {
            *out = Box::into_raw(Box::new(RvSamples(s)));
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// Builds a sample set with a declared support bound `Z <= bound`.
///
/// # Safety
/// As [`rv_samples_new`].
#[no_mangle]
pub unsafe extern "C" fn rv_samples_with_bound(
    values: *const f64,
    n: usize,
    bound: f64,
    out: *mut *mut RvSamples,
) -> RvStatus {
    let out = nonnull_mut!(out, "output pointer");
    let values = match read_slice(values, n) {
        Ok(s) => s.to_vec(),
        Err(st) => return st,
    };
    match SampleSet::with_support_bound(values, bound) {
        Ok(s) => {
            *out = Box::into_raw(Box::new(RvSamples(s)));
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rv_samples_free(s: *mut RvSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Sample mean.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_mean_risk(s: *const RvSamples, out: *mut f64) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    *out = mean_risk(&s.0);
    RvStatus::Ok
}

/// Largest sample.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_worst_case_risk(s: *const RvSamples, out: *mut f64) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    *out = worst_case_risk(&s.0);
    RvStatus::Ok
}

/// Empirical CDF at `alpha`.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_empirical_cdf(
    s: *const RvSamples,
    alpha: f64,
    out: *mut f64,
) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    *out = empirical_cdf(&s.0, alpha);
    RvStatus::Ok
}

/// Empirical VaR at `level` in (0, 1].
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_empirical_var(
    s: *const RvSamples,
    level: f64,
    out: *mut f64,
) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    match empirical_var(&s.0, level) {
        Ok(v) => {
            *out = v;
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// Empirical CVaR at `beta` in (0, 1).
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_empirical_cvar(
    s: *const RvSamples,
    beta: f64,
    out: *mut f64,
) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    match empirical_cvar(&s.0, beta) {
        Ok(v) => {
            *out = v;
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// Finite-sample quantile margin `c_N(delta)`.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_confidence_margin(n: usize, delta: f64, out: *mut f64) -> RvStatus {
    let out = nonnull_mut!(out, "output pointer");
    match confidence_margin(n, delta) {
        Ok(v) => {
            *out = v;
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// High-confidence VaR upper bound; also reports the effective quantile
/// level actually read (pass null to skip it).
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_var_upper_bound(
    s: *const RvSamples,
    beta: f64,
    delta: f64,
    out_bound: *mut f64,
    out_effective_level: *mut f64,
) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out_bound = nonnull_mut!(out_bound, "output pointer");
    let q = match RiskQuery::new(beta, delta) {
        Ok(q) => q,
        Err(e) => return risk_fail(&e),
    };
    match var_upper_bound(&s.0, &q) {
        Ok(est) => {
            *out_bound = est.upper_bound.expect("bound present");
            if let Some(lv) = out_effective_level.as_mut() {
                *lv = est.effective_level;
            }
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// High-confidence CVaR upper bound; the sample set must carry a support
/// bound and `delta` must lie in (0, 0.5].
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_cvar_upper_bound(
    s: *const RvSamples,
    beta: f64,
    delta: f64,
    out_bound: *mut f64,
) -> RvStatus {
    let s = nonnull!(s, "samples handle");
    let out_bound = nonnull_mut!(out_bound, "output pointer");
    let q = match RiskQuery::new(beta, delta) {
        Ok(q) => q,
        Err(e) => return risk_fail(&e),
    };
    match cvar_upper_bound(&s.0, &q) {
        Ok(est) => {
            *out_bound = est.upper_bound.expect("bound present");
            RvStatus::Ok
        }
        Err(e) => risk_fail(&e),
    }
}

/// First Wasserstein distance between two sample sets.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_wasserstein_1d(
    a: *const RvSamples,
    b: *const RvSamples,
    out: *mut f64,
) -> RvStatus {
    let a = nonnull!(a, "samples handle");
    let b = nonnull!(b, "samples handle");
    let out = nonnull_mut!(out, "output pointer");
    *out = wasserstein_1d(&a.0, &b.0);
    RvStatus::Ok
}

// --------------------------------------------------------------------------
// Gap bounds
// --------------------------------------------------------------------------

/// Fills `out_schedule` (length `horizon + 1`) with the worst-case
/// trajectory-error schedule from the Lipschitz recursion.
///
/// # Safety
/// `out_schedule` must point at `horizon + 1` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rv_lipschitz_delta(
    l_f1: f64,
    l_f2: f64,
    l_f3: f64,
    l_u: f64,
    l_g1: f64,
    l_g2: f64,
    v_star: f64,
    w_star: f64,
    horizon: usize,
    out_schedule: *mut f64,
) -> RvStatus {
    if out_schedule.is_null() {
        return fail(RvStatus::NullPointer, "schedule output is null");
    }
    let lip = match LipschitzConstants::new(l_f1, l_f2, l_f3, l_u, l_g1, l_g2) {
        Ok(l) => l,
        Err(e) => return gap_fail(&e),
    };
    let dist = match DisturbanceBounds::new(v_star, w_star) {
        Ok(d) => d,
        Err(e) => return gap_fail(&e),
    };
    let GapBound::LipschitzSchedule { delta } = lipschitz_delta(&lip, &dist, horizon) else {
        unreachable!("lipschitz_delta builds a schedule")
    };
    std::ptr::copy_nonoverlapping(delta.as_ptr(), out_schedule, delta.len());
    RvStatus::Ok
}

/// iISS gain slope for a stable linear closed loop given row-major `a`
/// (`n x n`): `k = 1 / (1 - ||A||)`. Fails with NotContractive when the
/// induced 2-norm is not below one.
///
/// # Safety
/// `a` must point at `n * n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn rv_linear_iiss_gain(a: *const f64, n: usize, out_k: *mut f64) -> RvStatus {
    let out_k = nonnull_mut!(out_k, "output pointer");
    let flat = match read_slice(a, n.saturating_mul(n)) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(|c| c.to_vec()).collect();
    match linear_iiss_gain(&rows) {
        Ok(IissGain::Linear { k }) => {
            *out_k = k;
            RvStatus::Ok
        }
        Ok(_) => fail(RvStatus::InvalidArgument, "unexpected gain form"),
        Err(e) => gap_fail(&e),
    }
}

/// One-directional controller comparison: writes 1 when the first controller
/// is certified no worse on the perturbed system, 2 for the second, 0 when
/// inconclusive.
///
/// # Safety
/// Pointer arguments follow the module conventions.
#[no_mangle]
pub unsafe extern "C" fn rv_compare_controllers(
    risk_1: f64,
    risk_2: f64,
    delta: f64,
    out: *mut i32,
) -> RvStatus {
    let out = nonnull_mut!(out, "output pointer");
    match compare_controllers(risk_1, risk_2, delta) {
        Ok(Comparison::Certified(CertifiedOrder::FirstNoWorse)) => {
            *out = 1;
            RvStatus::Ok
        }
        Ok(Comparison::Certified(CertifiedOrder::SecondNoWorse)) => {
            *out = 2;
            RvStatus::Ok
        }
        Ok(Comparison::Inconclusive) => {
            *out = 0;
            RvStatus::Ok
        }
        Err(e) => gap_fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn parse_and_evaluate_through_the_abi() {
        unsafe {
            let preds = rv_predicates_new();
            let name = c("A");
            let a = [1.0, 0.0];
            assert_eq!(
                rv_predicates_add_halfspace(preds, name.as_ptr(), a.as_ptr(), 2, 0.0, false),
                RvStatus::Ok
            );

            let text = c("G[0,2] A");
            let mut formula: *mut RvFormula = ptr::null_mut();
            assert_eq!(
                rv_formula_parse(text.as_ptr(), preds, &mut formula),
                RvStatus::Ok
            );

            let mut len = 0usize;
            assert_eq!(rv_formula_length(formula, &mut len), RvStatus::Ok);
            assert_eq!(len, 2);

            let data = [5.0, 0.0, 3.0, 0.0, 4.0, 0.0];
            let mut trace: *mut RvTrace = ptr::null_mut();
            assert_eq!(
                rv_trace_new(0.1, data.as_ptr(), 3, 2, &mut trace),
                RvStatus::Ok
            );

            let mut rho = 0.0;
            assert_eq!(
                rv_robustness(formula, trace, 0, false, &mut rho),
                RvStatus::Ok
            );
            assert_eq!(rho, 3.0);
            let mut sat = false;
            assert_eq!(
                rv_boolean_sat(formula, trace, 0, false, &mut sat),
                RvStatus::Ok
            );
            assert!(sat);

            // Too-short trace surfaces the right status and a message.
            let mut rho2 = 0.0;
            assert_eq!(
                rv_robustness(formula, trace, 2, false, &mut rho2),
                RvStatus::TraceTooShort
            );
            let mut buf = [0 as c_char; 128];
            let n = rv_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);

            rv_trace_free(trace);
            rv_formula_free(formula);
            rv_predicates_free(preds);
        }
    }

    #[test]
    fn json_table_and_pnf() {
        unsafe {
            let preds = rv_predicates_new();
            let json = c(r#"{"B": {"shape": "norm_ball", "center": [0, 0], "radius": 1.0}}"#);
            assert_eq!(rv_predicates_load_json(preds, json.as_ptr()), RvStatus::Ok);

            let text = c("!(B U[0,1] B)");
            let mut formula: *mut RvFormula = ptr::null_mut();
            assert_eq!(
                rv_formula_parse(text.as_ptr(), preds, &mut formula),
                RvStatus::Ok
            );
            let mut pnf: *mut RvFormula = ptr::null_mut();
            assert_eq!(rv_formula_to_pnf(formula, &mut pnf), RvStatus::Ok);

            let mut needed = 0usize;
            assert_eq!(
                rv_formula_print(pnf, ptr::null_mut(), 0, &mut needed),
                RvStatus::BufferTooSmall
            );
            let mut buf = vec![0 as c_char; needed + 1];
            assert_eq!(
                rv_formula_print(pnf, buf.as_mut_ptr(), buf.len(), &mut needed),
                RvStatus::Ok
            );
            let printed = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(
                printed.contains("!B"),
                "expected negated atoms, got {printed}"
            );

            rv_formula_free(pnf);
            rv_formula_free(formula);
            rv_predicates_free(preds);
        }
    }

    extern "C" fn offset_height(state: *const f64, dim: usize, user_data: *mut c_void) -> f64 {
        let s = unsafe { slice::from_raw_parts(state, dim) };
        let off = unsafe { *(user_data as *const f64) };
        s[0] - off
    }

    #[test]
    fn functional_callback_round_trip() {
        unsafe {
            let preds = rv_predicates_new();
            let handle = c("height");
            let offset: f64 = 1.5;
            assert_eq!(
                rv_predicates_register_function(
                    preds,
                    handle.as_ptr(),
                    offset_height,
                    &offset as *const f64 as *mut c_void,
                    1.0,
                ),
                RvStatus::Ok
            );
            let name = c("H");
            assert_eq!(
                rv_predicates_add_functional(preds, name.as_ptr(), handle.as_ptr(), false),
                RvStatus::Ok
            );
            let text = c("H");
            let mut formula: *mut RvFormula = ptr::null_mut();
            assert_eq!(
                rv_formula_parse(text.as_ptr(), preds, &mut formula),
                RvStatus::Ok
            );
            let data = [2.5];
            let mut trace: *mut RvTrace = ptr::null_mut();
            assert_eq!(
                rv_trace_new(1.0, data.as_ptr(), 1, 1, &mut trace),
                RvStatus::Ok
            );
            let mut rho = 0.0;
            assert_eq!(
                rv_robustness(formula, trace, 0, false, &mut rho),
                RvStatus::Ok
            );
            assert_eq!(rho, 1.0);
            rv_trace_free(trace);
            rv_formula_free(formula);
            rv_predicates_free(preds);
        }
    }

    #[test]
    fn risk_estimators_through_the_abi() {
        unsafe {
            let values: Vec<f64> = (1..=10).map(|i| i as f64).collect();
            let mut s: *mut RvSamples = ptr::null_mut();
            assert_eq!(
                rv_samples_new(values.as_ptr(), values.len(), &mut s),
                RvStatus::Ok
            );

            let mut v = 0.0;
            assert_eq!(rv_empirical_var(s, 0.9, &mut v), RvStatus::Ok);
            assert_eq!(v, 9.0);
            assert_eq!(rv_empirical_cvar(s, 0.9, &mut v), RvStatus::Ok);
            assert_eq!(v, 10.0);
            assert_eq!(rv_mean_risk(s, &mut v), RvStatus::Ok);
            assert_eq!(v, 5.5);
            assert_eq!(rv_empirical_cdf(s, 9.0, &mut v), RvStatus::Ok);
            assert_eq!(v, 0.9);

            // Too few samples for the quantile bound at these levels.
            let mut bound = 0.0;
            let mut level = 0.0;
            assert_eq!(
                rv_var_upper_bound(s, 0.9, 0.05, &mut bound, &mut level),
                RvStatus::InsufficientSamples
            );

            // CVaR bound needs a declared support bound.
            assert_eq!(
                rv_cvar_upper_bound(s, 0.9, 0.05, &mut bound),
                RvStatus::MissingSupportBound
            );
            let mut sb: *mut RvSamples = ptr::null_mut();
            assert_eq!(
                rv_samples_with_bound(values.as_ptr(), values.len(), 10.0, &mut sb),
                RvStatus::Ok
            );
            assert_eq!(rv_cvar_upper_bound(sb, 0.9, 0.05, &mut bound), RvStatus::Ok);
            assert!(bound >= 10.0 - 1e-12);

            rv_samples_free(sb);
            rv_samples_free(s);
        }
    }

    #[test]
    fn gap_helpers_through_the_abi() {
        unsafe {
            let mut schedule = [0.0; 4];
            assert_eq!(
                rv_lipschitz_delta(
                    0.5,
                    1.0,
                    1.0,
                    1.0,
                    0.5,
                    1.0,
                    0.0,
                    0.1,
                    3,
                    schedule.as_mut_ptr()
                ),
                RvStatus::Ok
            );
            assert!((schedule[3] - 0.3).abs() < 1e-12);

            let a = [0.5, 0.0, 0.0, 0.5];
            let mut k = 0.0;
            assert_eq!(rv_linear_iiss_gain(a.as_ptr(), 2, &mut k), RvStatus::Ok);
            assert!((k - 2.0).abs() < 1e-12);

            let bad = [0.9186, 0.3357, -0.3257, 0.3429];
            assert_eq!(
                rv_linear_iiss_gain(bad.as_ptr(), 2, &mut k),
                RvStatus::NotContractive
            );

            let mut verdict = -1;
            assert_eq!(
                rv_compare_controllers(0.1, 0.5, 0.15, &mut verdict),
                RvStatus::Ok
            );
            assert_eq!(verdict, 1);
            assert_eq!(
                rv_compare_controllers(0.1, 0.5, 0.25, &mut verdict),
                RvStatus::Ok
            );
            assert_eq!(verdict, 0);
        }
    }

    #[test]
    fn wasserstein_through_the_abi() {
        unsafe {
            let a = [0.0, 1.0];
            let b = [0.0, 3.0];
            let mut sa: *mut RvSamples = ptr::null_mut();
            let mut sb: *mut RvSamples = ptr::null_mut();
            assert_eq!(rv_samples_new(a.as_ptr(), 2, &mut sa), RvStatus::Ok);
            assert_eq!(rv_samples_new(b.as_ptr(), 2, &mut sb), RvStatus::Ok);
            let mut w = 0.0;
            assert_eq!(rv_wasserstein_1d(sa, sb, &mut w), RvStatus::Ok);
            assert_eq!(w, 1.0);
            rv_samples_free(sa);
            rv_samples_free(sb);
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut out = 0.0;
            assert_eq!(
                rv_empirical_var(ptr::null(), 0.9, &mut out),
                RvStatus::NullPointer
            );
            let version = CStr::from_ptr(rv_version()).to_str().unwrap();
            assert!(!version.is_empty());
        }
    }
}
