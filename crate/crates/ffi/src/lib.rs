//! C ABI for `mirate`.
//!
//! Models are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`MirateStatus`]; on failure the message is
//! available from [`mirate_last_error_message`] on the same thread.
//! Matrices are passed row-major. Symbols are `uint32_t`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use mirate::estimators::{estimate_amir_single_sequence, estimate_mi_continuous, EstimatorConfig};
use mirate::exact::{exact_amir_hidden_pair, exact_amir_joint, exact_mir_hidden_pair, exact_rates_joint_markov};
use mirate::processes::{sample_hidden_pair, sample_joint_pair, HiddenMarkovPair, JointMarkovPair, MarkovChain};
use mirate::{Alphabet, Error, PairedSymbolSequence, RateMethod, RateReport, RealPairedSequence, SymbolSequence};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirateStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad distribution, out-of-range symbol, too little data.
    InvalidInput = 2,
    /// Mathematical precondition failed (no unique stationary distribution, non-Markov marginal).
    Precondition = 3,
    Numeric = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirateMethod {
    Exact = 0,
    Bounded = 1,
    Estimated = 2,
}

/// Rates in bits per step. The output entropy-rate bounds are NaN unless `method` is bounded.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MirateRateReport {
    pub entropy_rate_x: f64,
    pub entropy_rate_y: f64,
    pub entropy_rate_xy: f64,
    pub mir: f64,
    pub amir: f64,
    pub mir_gap_terms: f64,
    pub tolerance: f64,
    pub method: MirateMethod,
    pub converged: bool,
    pub entropy_rate_y_lower: f64,
    pub entropy_rate_y_upper: f64,
}

/// Opaque hidden-Markov pair.
pub struct MirateHmm(HiddenMarkovPair);

/// Opaque jointly-Markov pair.
pub struct MirateJointPair(JointMarkovPair);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MirateStatus {
    match err.exit_code() {
        3 => MirateStatus::Precondition,
        4 => MirateStatus::Numeric,
        _ => MirateStatus::InvalidInput,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> MirateStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MirateStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            MirateStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MirateStatus::Internal
        }
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: caller contract; null is checked here.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller contract; null is checked here.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn read_slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: caller guarantees `len` readable elements.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn write_slice<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: caller guarantees `len` writable elements.
    Ok(unsafe { slice::from_raw_parts_mut(p, len) })
}

fn matrix(p: *const f64, rows: usize, cols: usize, what: &'static str) -> Result<Vec<Vec<f64>>, Failure> {
    let len =
        rows.checked_mul(cols).ok_or_else(|| Failure::Lib(Error::InvalidInput(format!("{what} is too large"))))?;
    Ok(read_slice(p, len, what)?.chunks(cols.max(1)).map(<[f64]>::to_vec).collect())
}

fn symbols(p: *const u32, n: usize, states: usize, what: &'static str) -> Result<SymbolSequence, Failure> {
    let values = read_slice(p, n, what)?.iter().map(|&s| s as usize).collect();
    Ok(SymbolSequence::new(Alphabet::new(states)?, values)?)
}

fn to_c(report: &RateReport) -> MirateRateReport {
    MirateRateReport {
        entropy_rate_x: report.entropy_rate_x,
        entropy_rate_y: report.entropy_rate_y,
        entropy_rate_xy: report.entropy_rate_xy,
        mir: report.mir,
        amir: report.amir,
        mir_gap_terms: report.mir_gap_terms,
        tolerance: report.tolerance,
        method: match report.method {
            RateMethod::Exact => MirateMethod::Exact,
            RateMethod::Bounded => MirateMethod::Bounded,
            RateMethod::Estimated => MirateMethod::Estimated,
        },
        converged: report.converged,
        entropy_rate_y_lower: report.entropy_rate_y_lower.unwrap_or(f64::NAN),
        entropy_rate_y_upper: report.entropy_rate_y_upper.unwrap_or(f64::NAN),
    }
}

fn write_pair(seq: &PairedSymbolSequence, x_out: *mut u32, y_out: *mut u32) -> Result<(), Failure> {
    let xs = write_slice(x_out, seq.len(), "x_out")?;
    let ys = write_slice(y_out, seq.len(), "y_out")?;
    for (slot, &v) in xs.iter_mut().zip(seq.x().values()) {
        *slot = v as u32;
    }
    for (slot, &v) in ys.iter_mut().zip(seq.y().values()) {
        *slot = v as u32;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn mirate_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn mirate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a hidden pair from an `x_states x x_states` transition matrix and an
/// `x_states x y_states` emission matrix.
///
/// # Safety
/// `transition` and `emission` must point to that many doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_hmm_new(
    transition: *const f64,
    x_states: usize,
    emission: *const f64,
    y_states: usize,
    out: *mut *mut MirateHmm,
) -> MirateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let chain = MarkovChain::new(matrix(transition, x_states, x_states, "transition")?, None)?;
        let model = HiddenMarkovPair::new(chain, matrix(emission, x_states, y_states, "emission")?)?;
        *out = Box::into_raw(Box::new(MirateHmm(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`mirate_hmm_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mirate_hmm_free(model: *mut MirateHmm) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_hmm_exact_amir(model: *const MirateHmm, out: *mut f64) -> MirateStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        *out_ref(out, "out")? = exact_amir_hidden_pair(&m.0)?;
        Ok(())
    })
}

/// MIR with the output entropy rate bracketed to within `gap_tolerance`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_hmm_exact_rates(
    model: *const MirateHmm,
    gap_tolerance: f64,
    out: *mut MirateRateReport,
) -> MirateStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let out = out_ref(out, "out")?;
        *out = to_c(&exact_mir_hidden_pair(&m.0, gap_tolerance)?);
        Ok(())
    })
}

/// Writes `n` stationary samples into `x_out` and `y_out`.
///
/// # Safety
/// `model` must be a live handle; `x_out` and `y_out` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn mirate_hmm_sample(
    model: *const MirateHmm,
    n: usize,
    seed: u64,
    x_out: *mut u32,
    y_out: *mut u32,
) -> MirateStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        write_pair(&sample_hidden_pair(&m.0, n, seed)?, x_out, y_out)
    })
}

/// Creates a jointly-Markov pair over states `x * y_states + y` from a square
/// `(x_states * y_states)` transition matrix.
///
/// # Safety
/// `transition` must point to that many doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_joint_pair_new(
    x_states: usize,
    y_states: usize,
    transition: *const f64,
    out: *mut *mut MirateJointPair,
) -> MirateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let states = x_states
            .checked_mul(y_states)
            .ok_or_else(|| Failure::Lib(Error::InvalidInput("alphabet product overflows".into())))?;
        let pair = JointMarkovPair::new(x_states, y_states, matrix(transition, states, states, "transition")?)?;
        *out = Box::into_raw(Box::new(MirateJointPair(pair)));
        Ok(())
    })
}

/// # Safety
/// `pair` must come from [`mirate_joint_pair_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mirate_joint_pair_free(pair: *mut MirateJointPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// # Safety
/// `pair` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_joint_pair_exact_amir(pair: *const MirateJointPair, out: *mut f64) -> MirateStatus {
    guard(|| {
        let p = non_null(pair, "pair")?;
        *out_ref(out, "out")? = exact_amir_joint(&p.0)?;
        Ok(())
    })
}

/// Exact rates; fails with `MIRATE_STATUS_PRECONDITION` when a marginal is not Markov.
///
/// # Safety
/// `pair` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_joint_pair_exact_rates(
    pair: *const MirateJointPair,
    out: *mut MirateRateReport,
) -> MirateStatus {
    guard(|| {
        let p = non_null(pair, "pair")?;
        let out = out_ref(out, "out")?;
        *out = to_c(&exact_rates_joint_markov(&p.0)?);
        Ok(())
    })
}

/// # Safety
/// `pair` must be a live handle; `x_out` and `y_out` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn mirate_joint_pair_sample(
    pair: *const MirateJointPair,
    n: usize,
    seed: u64,
    x_out: *mut u32,
    y_out: *mut u32,
) -> MirateStatus {
    guard(|| {
        let p = non_null(pair, "pair")?;
        write_pair(&sample_joint_pair(&p.0, n, seed)?, x_out, y_out)
    })
}

/// Plug-in AMIR estimate from one paired symbol sequence with history depth `memory`.
///
/// # Safety
/// `x` and `y` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_estimate_amir(
    x: *const u32,
    x_states: usize,
    y: *const u32,
    y_states: usize,
    n: usize,
    memory: usize,
    out: *mut f64,
) -> MirateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let seq = PairedSymbolSequence::new(symbols(x, n, x_states, "x")?, symbols(y, n, y_states, "y")?)?;
        *out = estimate_amir_single_sequence(&seq, &EstimatorConfig::plugin(memory))?.value;
        Ok(())
    })
}

/// kNN (KSG) mutual information estimate of i.i.d. real pairs, in bits.
///
/// # Safety
/// `x` and `y` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mirate_estimate_mi_knn(
    x: *const f64,
    y: *const f64,
    n: usize,
    k: usize,
    out: *mut f64,
) -> MirateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let seq = RealPairedSequence::new(read_slice(x, n, "x")?.to_vec(), read_slice(y, n, "y")?.to_vec())?;
        *out = estimate_mi_continuous(&seq, &EstimatorConfig::knn(k))?.value;
        Ok(())
    })
}
