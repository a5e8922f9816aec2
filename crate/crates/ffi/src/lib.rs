//! C ABI over the urbansense pipeline.
//!
//! Every function returns a [`UsStatus`]. On failure a description is kept
//! per thread and can be fetched with [`us_last_error`]. Strings handed out
//! by the library are NUL-terminated UTF-8 and must be released with
//! [`us_string_free`]; handles are released with their own `_free`.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use urbansense::gazetteer::{filter_by_context, geoparse, load_gazetteer, match_candidates, ContextConfig, Gazetteer};
use urbansense::model::time::parse_flexible;
use urbansense::model::Message;
use urbansense::pipeline::{Pipeline, PipelineConfig};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON, CSV or timestamp input.
    InvalidInput = 3,
    /// The pipeline rejected the operation, e.g. an out-of-order message.
    Pipeline = 4,
    /// A bug inside the library; the handle should not be reused.
    Panic = 5,
}

/// Place index loaded from gazetteer CSV.
pub struct UsGazetteer {
    inner: Gazetteer,
    context: ContextConfig,
}

/// Enrichment plus live analytics state.
pub struct UsPipeline {
    inner: Pipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type Outcome = Result<(), (UsStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> UsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UsStatus::Panic
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> (UsStatus, String) {
    (UsStatus::InvalidInput, e.to_string())
}

fn pipeline_err(e: impl std::fmt::Display) -> (UsStatus, String) {
    (UsStatus::Pipeline, e.to_string())
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn arg_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (UsStatus, String)> {
    if s.is_null() {
        return Err((UsStatus::NullArgument, format!("`{name}` is null")));
    }
    // SAFETY: non-null and NUL-terminated per the caller contract
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| (UsStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome {
    if out.is_null() {
        return Err((UsStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| (UsStatus::Panic, "output contains NUL".to_string()))?;
    // SAFETY: checked non-null above; writable per the caller contract
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, v: &T) -> Outcome {
    let s = serde_json::to_string(v).map_err(pipeline_err)?;
    // SAFETY: forwarded caller contract
    unsafe { put_string(out, s) }
}

/// Library version, e.g. "0.1.0". Free with [`us_string_free`].
#[no_mangle]
pub extern "C" fn us_version() -> *mut c_char {
    CString::new(env!("CARGO_PKG_VERSION")).expect("no NUL in version").into_raw()
}

/// Description of the last failure on this thread, or null if the last
/// call succeeded. Free with [`us_string_free`].
#[no_mangle]
pub extern "C" fn us_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn us_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this library
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Loads a gazetteer from CSV text.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_gazetteer_from_csv(csv: *const c_char, out: *mut *mut UsGazetteer) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let csv = unsafe { arg_str(csv, "csv") }?;
        if out.is_null() {
            return Err((UsStatus::NullArgument, "`out` is null".into()));
        }
        let g = load_gazetteer(csv.as_bytes()).map_err(invalid)?;
        let handle = Box::new(UsGazetteer { inner: g, context: ContextConfig::default() });
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from [`us_gazetteer_from_csv`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn us_gazetteer_free(g: *mut UsGazetteer) {
    if !g.is_null() {
        // SAFETY: produced by Box::into_raw above
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Toponyms in `text` as JSON: `{"matches":[...],"best":"id"|null}`.
///
/// # Safety
/// `g` must be a live handle, `text` a NUL-terminated string and
/// `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_gazetteer_geocode(
    g: *const UsGazetteer,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let g = unsafe { g.as_ref() }.ok_or((UsStatus::NullArgument, "`g` is null".to_string()))?;
        // SAFETY: caller contract
        let text = unsafe { arg_str(text, "text") }?;
        let matches = filter_by_context(match_candidates(text, &g.inner), text, &g.inner, &g.context);
        let best = geoparse(text, &g.inner, &g.context).map(|e| e.id.clone());
        let v = serde_json::json!({"matches": matches, "best": best});
        // SAFETY: caller contract
        unsafe { put_json(out_json, &v) }
    })
}

/// Creates a pipeline from a JSON config, or the embedded defaults when
/// `config_json` is null.
///
/// # Safety
/// `config_json` must be null or NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_new(config_json: *const c_char, out: *mut *mut UsPipeline) -> UsStatus {
    guard(|| {
        if out.is_null() {
            return Err((UsStatus::NullArgument, "`out` is null".into()));
        }
        let cfg = if config_json.is_null() {
            PipelineConfig::default()
        } else {
            // SAFETY: caller contract
            PipelineConfig::from_json(unsafe { arg_str(config_json, "config_json") }?).map_err(invalid)?
        };
        let p = Pipeline::from_config(&cfg).map_err(invalid)?;
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(UsPipeline { inner: p })) };
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`us_pipeline_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_free(p: *mut UsPipeline) {
    if !p.is_null() {
        // SAFETY: produced by Box::into_raw above
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Enriches one message (event-log JSON) and feeds it to the analytics.
/// Writes `{"message": <enriched>, "events": [...]}`. `out_json` may be
/// null to discard the result.
///
/// # Safety
/// `p` must be a live handle, `message_json` NUL-terminated and `out_json`
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_ingest(
    p: *mut UsPipeline,
    message_json: *const c_char,
    out_json: *mut *mut c_char,
) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let p = unsafe { p.as_mut() }.ok_or((UsStatus::NullArgument, "`p` is null".to_string()))?;
        // SAFETY: caller contract
        let raw = unsafe { arg_str(message_json, "message_json") }?;
        let msg: Message = serde_json::from_str(raw).map_err(invalid)?;
        msg.validate().map_err(invalid)?;
        let (enriched, events) = p.inner.apply(msg).map_err(pipeline_err)?;
        if out_json.is_null() {
            return Ok(());
        }
        // SAFETY: caller contract
        unsafe { put_json(out_json, &serde_json::json!({"message": enriched, "events": events})) }
    })
}

/// Closes the open window. Writes the resulting events as a JSON array.
///
/// # Safety
/// `p` must be a live handle; `out_json` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_finish(p: *mut UsPipeline, out_json: *mut *mut c_char) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let p = unsafe { p.as_mut() }.ok_or((UsStatus::NullArgument, "`p` is null".to_string()))?;
        let events = p.inner.engine.finish();
        if out_json.is_null() {
            return Ok(());
        }
        // SAFETY: caller contract
        unsafe { put_json(out_json, &events) }
    })
}

/// Heat surface JSON of the window containing `at` (ISO-8601 or epoch
/// seconds), or of the latest window when `at` is null.
///
/// # Safety
/// `p` must be a live handle; `at` null or NUL-terminated; `out_json`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_surface(
    p: *const UsPipeline,
    at: *const c_char,
    out_json: *mut *mut c_char,
) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let p = unsafe { p.as_ref() }.ok_or((UsStatus::NullArgument, "`p` is null".to_string()))?;
        let at = if at.is_null() {
            None
        } else {
            // SAFETY: caller contract
            Some(parse_flexible(unsafe { arg_str(at, "at") }?).map_err(invalid)?)
        };
        // SAFETY: caller contract
        unsafe { put_json(out_json, &p.inner.engine.surface(at)) }
    })
}

/// Exported analytics snapshot as JSON.
///
/// # Safety
/// `p` must be a live handle; `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn us_pipeline_snapshot(p: *const UsPipeline, out_json: *mut *mut c_char) -> UsStatus {
    guard(|| {
        // SAFETY: caller contract
        let p = unsafe { p.as_ref() }.ok_or((UsStatus::NullArgument, "`p` is null".to_string()))?;
        // SAFETY: caller contract
        unsafe { put_json(out_json, &p.inner.engine.snapshot()) }
    })
}
