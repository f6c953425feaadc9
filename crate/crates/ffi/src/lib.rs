//! C ABI for the nodalflow core: load checkpoints and datasets through
//! opaque handles, apply and roll out trained models into caller-owned
//! buffers. Every entry point returns a status code; the last error
//! message is kept per thread and readable via [`nf_last_error_message`].
//!
//! The companion header `include/nodalflow.h` is generated by cbindgen at
//! build time.

use nodalflow::grid::NodalState;
use nodalflow::io::read_dataset;
use nodalflow::model::{load_checkpoint, model_apply, NetworkParams};
use nodalflow::rollout::predict;
use nodalflow::training::TrainHistory;
use nodalflow::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfStatus {
    NfOk = 0,
    /// A pointer argument was null.
    NfNullPointer = 1,
    /// A path argument was not valid UTF-8.
    NfInvalidUtf8 = 2,
    /// A buffer length disagreed with the model or dataset shape.
    NfShapeMismatch = 3,
    /// File missing, unreadable, or not a valid NPMC/NTDF payload.
    NfIoError = 4,
    /// The operation produced non-finite values or otherwise failed
    /// numerically.
    NfNumericalError = 5,
    /// Any other core-library error; see `nf_last_error_message`.
    NfInternalError = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> NfStatus {
    match err {
        Error::ShapeMismatch(_) | Error::InvalidArgument(_) => NfStatus::NfShapeMismatch,
        Error::Io(_)
        | Error::BadMagic { .. }
        | Error::UnsupportedVersion { .. }
        | Error::Truncated { .. } => NfStatus::NfIoError,
        Error::Numerical(_) | Error::NonFinite(_) => NfStatus::NfNumericalError,
        _ => NfStatus::NfInternalError,
    }
}

fn fail(err: &Error) -> NfStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Opaque handle to a loaded model checkpoint.
pub struct NfModel {
    params: NetworkParams,
    #[allow(dead_code)]
    history: TrainHistory,
}

/// Opaque handle to a loaded trajectory dataset.
pub struct NfDataset {
    inner: nodalflow::grid::TrajectoryDataset,
}

/// Returns the message describing the most recent error on the calling
/// thread. The pointer stays valid until the next failing call on the
/// same thread; never free it.
#[no_mangle]
pub extern "C" fn nf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn path_from_c<'a>(ptr: *const c_char) -> Result<&'a Path, NfStatus> {
    if ptr.is_null() {
        set_error("path pointer is null");
        return Err(NfStatus::NfNullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(NfStatus::NfInvalidUtf8)
        }
    }
}

/// Loads an NPMC checkpoint. On success writes a handle to `out` and
/// returns `NfOk`; the handle must be released with [`nf_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nf_model_load(
    path: *const c_char,
    out: *mut *mut NfModel,
) -> NfStatus {
    if out.is_null() {
        set_error("output handle pointer is null");
        return NfStatus::NfNullPointer;
    }
    let path = match path_from_c(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match load_checkpoint(path) {
        Ok((params, history)) => {
            *out = Box::into_raw(Box::new(NfModel { params, history }));
            NfStatus::NfOk
        }
        Err(e) => fail(&e),
    }
}

/// Releases a model handle. Passing null is a no-op.
///
/// # Safety
/// `model` must come from [`nf_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_model_free(model: *mut NfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// State vector length the model consumes and produces (N).
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_model_input_size(model: *const NfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).params.dims.n
}

/// Total trainable parameter count.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_model_param_count(model: *const NfModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).params.dims.param_count()
}

/// One model application: `output = N(input)`. Both buffers must hold
/// exactly `nf_model_input_size` doubles; they may alias.
///
/// # Safety
/// `model`, `input` and `output` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nf_model_apply(
    model: *const NfModel,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> NfStatus {
    if model.is_null() || input.is_null() || output.is_null() {
        set_error("null pointer passed to nf_model_apply");
        return NfStatus::NfNullPointer;
    }
    let params = &(*model).params;
    if len != params.dims.n {
        set_error(&format!(
            "buffer holds {len} values, model wants {}",
            params.dims.n
        ));
        return NfStatus::NfShapeMismatch;
    }
    let x = std::slice::from_raw_parts(input, len);
    match model_apply(params, x) {
        Ok(y) => {
            std::slice::from_raw_parts_mut(output, len).copy_from_slice(&y);
            NfStatus::NfOk
        }
        Err(e) => fail(&e),
    }
}

/// Rolls the model out for `steps` applications from `ic` (length `len`,
/// must equal `nf_model_input_size`). Writes `(steps + 1) * len` doubles
/// to `output`, step-major, starting with the initial condition itself.
/// If the rollout blows up, the remaining steps are filled with NaN and
/// the 1-based index of the first bad step is written to `blowup_step`
/// (0 means no blowup; the pointer may be null if the caller does not
/// care).
///
/// # Safety
/// `output` must be valid for `(steps + 1) * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nf_model_predict(
    model: *const NfModel,
    ic: *const f64,
    len: usize,
    steps: usize,
    dt: f64,
    output: *mut f64,
    blowup_step: *mut usize,
) -> NfStatus {
    if model.is_null() || ic.is_null() || output.is_null() {
        set_error("null pointer passed to nf_model_predict");
        return NfStatus::NfNullPointer;
    }
    let params = &(*model).params;
    if len != params.dims.n {
        set_error(&format!(
            "initial condition holds {len} values, model wants {}",
            params.dims.n
        ));
        return NfStatus::NfShapeMismatch;
    }
    let values = std::slice::from_raw_parts(ic, len).to_vec();
    let state = match NodalState::scalar(values, 0.0) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let prediction = match predict(params, &state, steps, dt) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let out = std::slice::from_raw_parts_mut(output, (steps + 1) * len);
    out.fill(f64::NAN);
    for (k, s) in prediction.sequence.states().iter().enumerate() {
        out[k * len..(k + 1) * len].copy_from_slice(s.values());
    }
    if !blowup_step.is_null() {
        *blowup_step = prediction.blowup_step.unwrap_or(0);
    }
    NfStatus::NfOk
}

/// Loads an NTDF dataset. The handle must be released with
/// [`nf_dataset_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_load(
    path: *const c_char,
    out: *mut *mut NfDataset,
) -> NfStatus {
    if out.is_null() {
        set_error("output handle pointer is null");
        return NfStatus::NfNullPointer;
    }
    let path = match path_from_c(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match read_dataset(path) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(NfDataset { inner }));
            NfStatus::NfOk
        }
        Err(e) => fail(&e),
    }
}

/// Releases a dataset handle. Passing null is a no-op.
///
/// # Safety
/// `dataset` must come from [`nf_dataset_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_free(dataset: *mut NfDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Trajectory count M; 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_len(dataset: *const NfDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).inner.len()
}

/// Steps per trajectory (each sequence has this many + 1 states).
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_n_l(dataset: *const NfDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).inner.n_l()
}

/// Snapshot spacing in time.
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_dt(dataset: *const NfDataset) -> f64 {
    if dataset.is_null() {
        return 0.0;
    }
    (*dataset).inner.dt()
}

/// State vector length (nodes x components).
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_state_size(dataset: *const NfDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    let d = &(*dataset).inner;
    d.grid().len() * d.components()
}

/// Copies state `step` of trajectory `index` into `output` (length `len`
/// == `nf_dataset_state_size`).
///
/// # Safety
/// `output` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nf_dataset_state(
    dataset: *const NfDataset,
    index: usize,
    step: usize,
    output: *mut f64,
    len: usize,
) -> NfStatus {
    if dataset.is_null() || output.is_null() {
        set_error("null pointer passed to nf_dataset_state");
        return NfStatus::NfNullPointer;
    }
    let d = &(*dataset).inner;
    let state_size = d.grid().len() * d.components();
    if len != state_size {
        set_error(&format!("buffer holds {len} values, state is {state_size}"));
        return NfStatus::NfShapeMismatch;
    }
    if index >= d.len() {
        set_error(&format!("trajectory {index} out of range ({})", d.len()));
        return NfStatus::NfShapeMismatch;
    }
    let seq = &d.sequences()[index];
    if step >= seq.states().len() {
        set_error(&format!(
            "step {step} out of range ({})",
            seq.states().len()
        ));
        return NfStatus::NfShapeMismatch;
    }
    std::slice::from_raw_parts_mut(output, len).copy_from_slice(seq.state(step).values());
    NfStatus::NfOk
}
