//! C ABI for the chlorophyll-a retrieval toolkit.
//!
//! The surface mirrors the Rust API at the granularity a host language
//! needs: load or assemble sample tables, fit any of the eight estimators,
//! predict single spectra / batches / whole grid files, round-trip fitted
//! models through JSON or files, and evaluate the band-ratio baseline.
//!
//! # Calling contract
//!
//! * **Handles.** [`ChloraTable`] and [`ChloraModel`] are opaque. Create
//!   them only through this API and release each exactly once with the
//!   matching `*_free` function. `*_free` tolerates `NULL`.
//! * **Statuses.** Fallible functions return a [`ChloraStatus`]; anything
//!   other than `Ok` means the call failed and no out-parameter was
//!   written. [`chlora_last_error_message`] describes the most recent
//!   failure on the calling thread.
//! * **Strings.** Inputs are NUL-terminated UTF-8. Strings returned through
//!   an out-parameter are owned by the caller and must be released with
//!   [`chlora_string_free`]; strings returned directly (version, kind
//!   names, status names) are static and must not be freed.
//! * **Threads.** Handles are immutable after creation, so concurrent
//!   reads and predictions on a shared handle are safe. Creating and
//!   freeing a handle are not synchronized; the error message is
//!   per-thread.
//! * **Panics.** No call unwinds across the boundary: an internal panic is
//!   caught and reported as [`ChloraStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use chlora::baseline::{baseline_chl, coeffs_from_json, BandRatioCoeffs};
use chlora::estimators::{fit, EstimatorSpec, ModelSpec};
use chlora::grid::GridStack;
use chlora::io::{
    decode_model, decode_table, encode_model, encode_table, read_grid, read_model, read_table,
    write_grid, write_model, write_table,
};
use chlora::sample::{Sample, SampleTable, N_BANDS};
use chlora::{Error, FittedModel};

/// Outcome of a fallible call.
///
/// Values 1..=11 map one-to-one onto the library's error classes; the
/// remaining values are produced by the binding layer itself.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChloraStatus {
    /// The call succeeded; out-parameters are valid.
    Ok = 0,
    /// An argument is out of its documented range.
    Argument = 1,
    /// Input data does not match the expected schema.
    Schema = 2,
    /// Shapes or georeferencing of two objects disagree.
    Dimension = 3,
    /// A value is outside the mathematical domain of the operation.
    Domain = 4,
    /// A byte stream is not a valid instance of a file format.
    Format = 5,
    /// A file's declared and actual sizes disagree.
    Length = 6,
    /// A numeric or structural field failed to parse.
    Parse = 7,
    /// A file declares an unsupported format version.
    Version = 8,
    /// A linear system is numerically singular.
    Rank = 9,
    /// The operation is invalid for the object's current state.
    State = 10,
    /// An underlying I/O operation failed.
    Io = 11,
    /// A required pointer argument was NULL.
    NullPointer = 12,
    /// A string argument was not valid UTF-8.
    Utf8 = 13,
    /// An internal panic was caught; this indicates a library bug.
    Panic = 14,
}

/// Opaque handle to an in-memory table of labelled reflectance samples.
pub struct ChloraTable {
    inner: SampleTable,
}

/// Opaque handle to a fitted estimator.
pub struct ChloraModel {
    inner: FittedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("NUL bytes were removed");
    });
}

fn status_of(err: &Error) -> ChloraStatus {
    match err {
        Error::Argument(_) => ChloraStatus::Argument,
        Error::Schema(_) => ChloraStatus::Schema,
        Error::Dimension(_) => ChloraStatus::Dimension,
        Error::Domain(_) => ChloraStatus::Domain,
        Error::Format(_) => ChloraStatus::Format,
        Error::Length(_) => ChloraStatus::Length,
        Error::Parse(_) => ChloraStatus::Parse,
        Error::Version(_) => ChloraStatus::Version,
        Error::Rank(_) => ChloraStatus::Rank,
        Error::State(_) => ChloraStatus::State,
        Error::Io(_) => ChloraStatus::Io,
    }
}

fn fail(err: Error) -> ChloraStatus {
    let status = status_of(&err);
    set_last_error(&err.to_string());
    status
}

/// Run `body`, converting an unwind into [`ChloraStatus::Panic`].
fn guarded<F: FnOnce() -> ChloraStatus>(body: F) -> ChloraStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic; this is a library bug");
            ChloraStatus::Panic
        }
    }
}

macro_rules! try_ffi {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(status) => return status,
        }
    };
}

unsafe fn str_arg<'a>(
    ptr: *const c_char,
    what: &str,
) -> std::result::Result<&'a str, ChloraStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} must not be NULL"));
        return Err(ChloraStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_last_error(&format!("{what} is not valid UTF-8: {e}"));
        ChloraStatus::Utf8
    })
}

unsafe fn ref_arg<'a, T>(ptr: *const T, what: &str) -> std::result::Result<&'a T, ChloraStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} must not be NULL"));
        return Err(ChloraStatus::NullPointer);
    }
    Ok(&*ptr)
}

unsafe fn out_arg<'a, T>(ptr: *mut T, what: &str) -> std::result::Result<&'a mut T, ChloraStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} must not be NULL"));
        return Err(ChloraStatus::NullPointer);
    }
    Ok(&mut *ptr)
}

unsafe fn rrs_arg<'a>(
    ptr: *const f64,
    what: &str,
) -> std::result::Result<&'a [f64; 6], ChloraStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} must not be NULL"));
        return Err(ChloraStatus::NullPointer);
    }
    Ok(&*(ptr as *const [f64; 6]))
}

fn coeffs_by_name(name: &str) -> std::result::Result<BandRatioCoeffs, Error> {
    match name {
        "paper" => Ok(BandRatioCoeffs::paper()),
        "canonical" => Ok(BandRatioCoeffs::canonical()),
        text if text.trim_start().starts_with('{') => coeffs_from_json(text),
        other => Err(Error::Argument(format!(
            "unknown coefficient set {other:?}; expected \"paper\", \"canonical\", or inline JSON"
        ))),
    }
}

/// Library version as a static NUL-terminated string. Never NULL; do not
/// free.
#[no_mangle]
pub extern "C" fn chlora_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Stable lowercase name of a status code ("ok", "argument", ...). Static;
/// do not free.
#[no_mangle]
pub extern "C" fn chlora_status_name(status: ChloraStatus) -> *const c_char {
    let name: &'static str = match status {
        ChloraStatus::Ok => "ok\0",
        ChloraStatus::Argument => "argument\0",
        ChloraStatus::Schema => "schema\0",
        ChloraStatus::Dimension => "dimension\0",
        ChloraStatus::Domain => "domain\0",
        ChloraStatus::Format => "format\0",
        ChloraStatus::Length => "length\0",
        ChloraStatus::Parse => "parse\0",
        ChloraStatus::Version => "version\0",
        ChloraStatus::Rank => "rank\0",
        ChloraStatus::State => "state\0",
        ChloraStatus::Io => "io\0",
        ChloraStatus::NullPointer => "null_pointer\0",
        ChloraStatus::Utf8 => "utf8\0",
        ChloraStatus::Panic => "panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Description of the most recent failure on the calling thread, or an
/// empty string if none. The pointer stays valid until the next failing
/// call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn chlora_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Read a sample-table CSV file into a new table handle.
///
/// On success writes the handle to `out`; release it with
/// [`chlora_table_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_read_csv(
    path: *const c_char,
    out: *mut *mut ChloraTable,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let path = try_ffi!(str_arg(path, "path"));
        match read_table(Path::new(path)) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(ChloraTable { inner: table }));
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse sample-table CSV text into a new table handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_parse_csv(
    text: *const c_char,
    out: *mut *mut ChloraTable,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let text = try_ffi!(str_arg(text, "text"));
        match decode_table(text) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(ChloraTable { inner: table }));
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Build a table handle from dense arrays.
///
/// `rrs` holds `n_rows * 6` doubles, row-major, in canonical band order
/// (412, 443, 490, 510, 555, 670 nm). `chl` may be NULL (no row has a
/// target) or hold `n_rows` doubles where NaN marks a missing target.
///
/// # Safety
/// `rrs` and `chl` must cover the lengths described above (`rrs` may be
/// NULL only when `n_rows` is 0); `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_from_rows(
    rrs: *const f64,
    chl: *const f64,
    n_rows: usize,
    out: *mut *mut ChloraTable,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        if n_rows > 0 && rrs.is_null() {
            set_last_error("rrs must not be NULL when n_rows > 0");
            return ChloraStatus::NullPointer;
        }
        let mut rows = Vec::with_capacity(n_rows);
        for i in 0..n_rows {
            let mut bands = [0.0_f64; N_BANDS];
            std::ptr::copy_nonoverlapping(rrs.add(i * N_BANDS), bands.as_mut_ptr(), N_BANDS);
            let target = if chl.is_null() {
                None
            } else {
                let value = *chl.add(i);
                if value.is_nan() {
                    None
                } else {
                    Some(value)
                }
            };
            rows.push(Sample {
                rrs: bands,
                chl: target,
            });
        }
        *out = Box::into_raw(Box::new(ChloraTable {
            inner: SampleTable::new(rows),
        }));
        ChloraStatus::Ok
    })
}

/// Write a table to a CSV file.
///
/// # Safety
/// `table` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_write_csv(
    table: *const ChloraTable,
    path: *const c_char,
) -> ChloraStatus {
    guarded(|| {
        let table = try_ffi!(ref_arg(table, "table"));
        let path = try_ffi!(str_arg(path, "path"));
        match write_table(Path::new(path), &table.inner) {
            Ok(()) => ChloraStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of rows in a table; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_len(table: *const ChloraTable) -> usize {
    if table.is_null() {
        return 0;
    }
    catch_unwind(AssertUnwindSafe(|| (*table).inner.len())).unwrap_or(0)
}

/// Copy one row out of a table.
///
/// Writes six doubles to `rrs_out` in canonical band order. `chl_out` may
/// be NULL; otherwise it receives the target, or NaN when the row has
/// none.
///
/// # Safety
/// `table` must be a live handle; `rrs_out` must have room for six
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_get(
    table: *const ChloraTable,
    row: usize,
    rrs_out: *mut f64,
    chl_out: *mut f64,
) -> ChloraStatus {
    guarded(|| {
        let table = try_ffi!(ref_arg(table, "table"));
        if rrs_out.is_null() {
            set_last_error("rrs_out must not be NULL");
            return ChloraStatus::NullPointer;
        }
        let Some(sample) = table.inner.rows.get(row) else {
            return fail(Error::Argument(format!(
                "row {row} is out of range for a table of {} rows",
                table.inner.len()
            )));
        };
        std::ptr::copy_nonoverlapping(sample.rrs.as_ptr(), rrs_out, N_BANDS);
        if !chl_out.is_null() {
            *chl_out = sample.chl.unwrap_or(f64::NAN);
        }
        ChloraStatus::Ok
    })
}

/// Serialize a table to CSV text.
///
/// On success writes a NUL-terminated string to `out_csv`; release it
/// with [`chlora_string_free`].
///
/// # Safety
/// `table` must be a live handle and `out_csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_to_csv(
    table: *const ChloraTable,
    out_csv: *mut *mut c_char,
) -> ChloraStatus {
    guarded(|| {
        let out_csv = try_ffi!(out_arg(out_csv, "out_csv"));
        let table = try_ffi!(ref_arg(table, "table"));
        match encode_table(&table.inner) {
            Ok(text) => {
                let c = CString::new(text).expect("table CSV has no NUL bytes");
                *out_csv = c.into_raw();
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a table handle. NULL is ignored.
///
/// # Safety
/// `table` must be NULL or an owned handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn chlora_table_free(table: *mut ChloraTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

fn fit_into(table: &ChloraTable, spec: EstimatorSpec, out: &mut *mut ChloraModel) -> ChloraStatus {
    match fit(&table.inner, &spec) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(ChloraModel { inner: model }));
            ChloraStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fit an estimator described by a JSON spec on a fully labelled table.
///
/// The spec is a flat JSON object tagged by `"model"`, e.g.
/// `{"model": "ridge", "lambda": 1.0}` or
/// `{"model": "forest", "n_estimators": 100, "max_features": 2,
/// "bootstrap": true, "max_depth": null, "min_samples_split": 2,
/// "seed": 42}`. `seed` (default 42) and `log_chl` (default false) are
/// optional on every model. On success writes a model handle to `out`;
/// release it with [`chlora_model_free`].
///
/// # Safety
/// `table` must be a live handle, `spec_json` a NUL-terminated string,
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_fit(
    table: *const ChloraTable,
    spec_json: *const c_char,
    out: *mut *mut ChloraModel,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let table = try_ffi!(ref_arg(table, "table"));
        let text = try_ffi!(str_arg(spec_json, "spec_json"));
        let spec: EstimatorSpec = match serde_json::from_str(text) {
            Ok(spec) => spec,
            Err(e) => return fail(Error::Parse(format!("estimator spec: {e}"))),
        };
        fit_into(table, spec, out)
    })
}

/// Fit an estimator kind with its default hyperparameters.
///
/// `kind` is one of "linear", "ridge", "tree", "bagging", "forest",
/// "extra_trees", "svr", "knn".
///
/// # Safety
/// `table` must be a live handle, `kind` a NUL-terminated string, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_fit_default(
    table: *const ChloraTable,
    kind: *const c_char,
    out: *mut *mut ChloraModel,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let table = try_ffi!(ref_arg(table, "table"));
        let kind = try_ffi!(str_arg(kind, "kind"));
        let model = match ModelSpec::default_for(kind) {
            Ok(model) => model,
            Err(e) => return fail(e),
        };
        fit_into(table, EstimatorSpec::new(model), out)
    })
}

/// Kind name of a fitted model ("linear", ..., "knn") as a static string.
/// Returns NULL for a NULL model; do not free.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_kind(model: *const ChloraModel) -> *const c_char {
    if model.is_null() {
        return std::ptr::null();
    }
    let kind: &'static str = match (*model).inner.spec.model_type() {
        "linear" => "linear\0",
        "ridge" => "ridge\0",
        "tree" => "tree\0",
        "bagging" => "bagging\0",
        "forest" => "forest\0",
        "extra_trees" => "extra_trees\0",
        "svr" => "svr\0",
        _ => "knn\0",
    };
    kind.as_ptr() as *const c_char
}

/// Predict chlorophyll-a (mg/m^3) for one spectrum of six reflectances in
/// canonical band order.
///
/// # Safety
/// `model` must be a live handle, `rrs` must hold six doubles, and
/// `out_chl` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_predict(
    model: *const ChloraModel,
    rrs: *const f64,
    out_chl: *mut f64,
) -> ChloraStatus {
    guarded(|| {
        let model = try_ffi!(ref_arg(model, "model"));
        let rrs = try_ffi!(rrs_arg(rrs, "rrs"));
        let out_chl = try_ffi!(out_arg(out_chl, "out_chl"));
        match model.inner.predict_one(rrs) {
            Ok(value) => {
                *out_chl = value;
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Predict chlorophyll-a for `n_rows` spectra.
///
/// `rrs` holds `n_rows * 6` doubles, row-major; `out_chl` receives
/// `n_rows` doubles. On failure the contents of `out_chl` are
/// unspecified.
///
/// # Safety
/// `model` must be a live handle; `rrs` and `out_chl` must cover the
/// lengths described above (they may be NULL only when `n_rows` is 0).
#[no_mangle]
pub unsafe extern "C" fn chlora_model_predict_batch(
    model: *const ChloraModel,
    rrs: *const f64,
    n_rows: usize,
    out_chl: *mut f64,
) -> ChloraStatus {
    guarded(|| {
        let model = try_ffi!(ref_arg(model, "model"));
        if n_rows == 0 {
            return ChloraStatus::Ok;
        }
        if rrs.is_null() || out_chl.is_null() {
            set_last_error("rrs and out_chl must not be NULL when n_rows > 0");
            return ChloraStatus::NullPointer;
        }
        for i in 0..n_rows {
            let mut bands = [0.0_f64; N_BANDS];
            std::ptr::copy_nonoverlapping(rrs.add(i * N_BANDS), bands.as_mut_ptr(), N_BANDS);
            match model.inner.predict_one(&bands) {
                Ok(value) => *out_chl.add(i) = value,
                Err(e) => return fail(e.with_context(&format!("row {i}"))),
            }
        }
        ChloraStatus::Ok
    })
}

/// Predict a chlorophyll plane for a grid-stack file.
///
/// Reads the stack at `input_path`, predicts every pixel with all six
/// bands present, and writes a chlorophyll-only stack (same geometry,
/// fill value, and time window) to `output_path`.
///
/// # Safety
/// `model` must be a live handle; both paths must be NUL-terminated
/// strings.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_predict_grid_file(
    model: *const ChloraModel,
    input_path: *const c_char,
    output_path: *const c_char,
) -> ChloraStatus {
    guarded(|| {
        let model = try_ffi!(ref_arg(model, "model"));
        let input = try_ffi!(str_arg(input_path, "input_path"));
        let output = try_ffi!(str_arg(output_path, "output_path"));
        let run = || -> chlora::Result<()> {
            let stack = read_grid(Path::new(input))?;
            let chl = model.inner.predict_grid(&stack)?;
            let out_stack =
                GridStack::new(Vec::new(), Some(chl), stack.time_start, stack.time_end)?;
            write_grid(Path::new(output), &out_stack)
        };
        match run() {
            Ok(()) => ChloraStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Write a fitted model to a JSON model file.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_write(
    model: *const ChloraModel,
    path: *const c_char,
) -> ChloraStatus {
    guarded(|| {
        let model = try_ffi!(ref_arg(model, "model"));
        let path = try_ffi!(str_arg(path, "path"));
        match write_model(Path::new(path), &model.inner) {
            Ok(()) => ChloraStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Read a fitted model from a JSON model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_read(
    path: *const c_char,
    out: *mut *mut ChloraModel,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let path = try_ffi!(str_arg(path, "path"));
        match read_model(Path::new(path)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(ChloraModel { inner: model }));
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serialize a fitted model to JSON text.
///
/// On success writes a NUL-terminated string to `out_json`; release it
/// with [`chlora_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_to_json(
    model: *const ChloraModel,
    out_json: *mut *mut c_char,
) -> ChloraStatus {
    guarded(|| {
        let out_json = try_ffi!(out_arg(out_json, "out_json"));
        let model = try_ffi!(ref_arg(model, "model"));
        match encode_model(&model.inner) {
            Ok(text) => {
                let c = CString::new(text).expect("model JSON has no NUL bytes");
                *out_json = c.into_raw();
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Deserialize a fitted model from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_from_json(
    json: *const c_char,
    out: *mut *mut ChloraModel,
) -> ChloraStatus {
    guarded(|| {
        let out = try_ffi!(out_arg(out, "out"));
        let text = try_ffi!(str_arg(json, "json"));
        match decode_model(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(ChloraModel { inner: model }));
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a model handle. NULL is ignored.
///
/// # Safety
/// `model` must be NULL or an owned handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn chlora_model_free(model: *mut ChloraModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Release a string returned through an out-parameter. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string obtained from this API and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn chlora_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluate the maximum-band-ratio baseline on one spectrum.
///
/// `rrs` holds six reflectances in canonical band order. `coeffs` selects
/// the polynomial: NULL or "paper" for the default set, "canonical" for
/// the OC4v4 set with cubic term 0.649, or an inline JSON object
/// `{"a": [...], "numerator": [443, 490, 510], "denominator": 555}`.
///
/// # Safety
/// `rrs` must hold six doubles, `coeffs` must be NULL or a
/// NUL-terminated string, and `out_chl` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chlora_baseline_chl(
    rrs: *const f64,
    coeffs: *const c_char,
    out_chl: *mut f64,
) -> ChloraStatus {
    guarded(|| {
        let rrs = try_ffi!(rrs_arg(rrs, "rrs"));
        let out_chl = try_ffi!(out_arg(out_chl, "out_chl"));
        let coeffs = if coeffs.is_null() {
            BandRatioCoeffs::paper()
        } else {
            let name = try_ffi!(str_arg(coeffs, "coeffs"));
            match coeffs_by_name(name) {
                Ok(c) => c,
                Err(e) => return fail(e),
            }
        };
        let sample = Sample {
            rrs: *rrs,
            chl: None,
        };
        match baseline_chl(&sample, &coeffs) {
            Ok(value) => {
                *out_chl = value;
                ChloraStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
