//! C ABI over the metavault catalog.
//!
//! Every function returns an [`MvStatus`]; on failure the message is kept
//! per thread and read back with [`mv_last_error_message`]. Strings handed
//! out by the library must be released with [`mv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use metavault::etl::{load_manifest, run_etl, ManifestError};
use metavault::query::{execute, parse_query, plan, ExecError, ParseError, PlanError};
use metavault::storage::{BackendKind, StorageError};
use metavault::vault::{define_schema_tectoniq, Catalog, CatalogError, SteppingClock, Timestamp};
use thiserror::Error;

/// Selects the relational backend.
pub const MV_BACKEND_RELATIONAL: u32 = 0;
/// Selects the document backend.
pub const MV_BACKEND_DOCUMENT: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Query text or manifest did not parse.
    Parse = 3,
    /// Bad input data or an I/O failure.
    Data = 4,
    /// Stored records broke an integrity rule or are corrupt.
    Integrity = 5,
    Schema = 6,
    /// Unknown entity or attribute.
    NotFound = 7,
    /// The operation needs the other backend.
    Unsupported = 8,
    Panic = 99,
}

/// A catalog over one backend. Opaque to C.
pub struct MvCatalog {
    catalog: Catalog,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("argument `{0}` is null")]
    Null(&'static str),
    #[error("argument `{0}` is not valid UTF-8")]
    Utf8(&'static str),
    #[error("unknown backend {0}")]
    Backend(u32),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("{0}")]
    Data(String),
}

impl From<ParseError> for FfiError {
    fn from(e: ParseError) -> Self {
        FfiError::Parse(e.to_string())
    }
}

impl From<ManifestError> for FfiError {
    fn from(e: ManifestError) -> Self {
        FfiError::Parse(e.to_string())
    }
}

fn storage_status(e: &StorageError) -> MvStatus {
    match e {
        StorageError::UnknownEntity(_) | StorageError::UnknownAttribute { .. } => MvStatus::NotFound,
        StorageError::Corrupt { .. } => MvStatus::Integrity,
        StorageError::Schema(_) | StorageError::SchemaText(_) => MvStatus::Schema,
        e if e.is_integrity() => MvStatus::Integrity,
        _ => MvStatus::Data,
    }
}

impl FfiError {
    fn status(&self) -> MvStatus {
        match self {
            FfiError::Null(_) => MvStatus::NullArgument,
            FfiError::Utf8(_) => MvStatus::InvalidUtf8,
            FfiError::Parse(_) => MvStatus::Parse,
            FfiError::Backend(_) | FfiError::Data(_) => MvStatus::Data,
            FfiError::Unsupported(_) => MvStatus::Unsupported,
            FfiError::Storage(e) | FfiError::Catalog(CatalogError::Storage(e)) | FfiError::Exec(ExecError::Storage(e)) => {
                storage_status(e)
            }
            FfiError::Catalog(CatalogError::MissingEntity(_)) => MvStatus::Schema,
            FfiError::Catalog(_) => MvStatus::Data,
            FfiError::Plan(PlanError::UnknownSatellite(_) | PlanError::UnknownAttribute(..)) => MvStatus::NotFound,
            FfiError::Plan(PlanError::MissingEntity(_)) => MvStatus::Schema,
            FfiError::Plan(_) => MvStatus::Parse,
            FfiError::Exec(_) => MvStatus::Schema,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    // Interior NULs cannot cross the boundary; they are dropped.
    let message = CString::new(message.replace('\0', "")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

/// Runs `body`, turning errors and panics into a status and a stored message.
fn guard(body: impl FnOnce() -> Result<(), FfiError>) -> MvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MvStatus::Ok
        }
        Ok(Err(e)) => {
            let status = e.status();
            set_last_error(e.to_string());
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(format!("internal panic: {message}"));
            MvStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(name))
}

unsafe fn catalog_ref<'a>(p: *const MvCatalog) -> Result<&'a MvCatalog, FfiError> {
    p.as_ref().ok_or(FfiError::Null("catalog"))
}

unsafe fn catalog_mut<'a>(p: *mut MvCatalog) -> Result<&'a mut MvCatalog, FfiError> {
    p.as_mut().ok_or(FfiError::Null("catalog"))
}

fn backend_kind(backend: u32) -> Result<BackendKind, FfiError> {
    match backend {
        MV_BACKEND_RELATIONAL => Ok(BackendKind::Relational),
        MV_BACKEND_DOCUMENT => Ok(BackendKind::Document),
        other => Err(FfiError::Backend(other)),
    }
}

unsafe fn put_catalog(out: *mut *mut MvCatalog, catalog: Catalog) {
    *out = Box::into_raw(Box::new(MvCatalog { catalog }));
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> Result<(), FfiError> {
    let text = CString::new(text).map_err(|_| FfiError::Data("output contains a NUL byte".into()))?;
    *out = text.into_raw();
    Ok(())
}

/// Creates an in-memory catalog holding the default schema.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_new(backend: u32, out: *mut *mut MvCatalog) -> MvStatus {
    guard(|| {
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let catalog = Catalog::new(backend_kind(backend)?, &define_schema_tectoniq())?;
        put_catalog(out, catalog);
        Ok(())
    })
}

/// Opens a catalog saved in `dir` by [`mv_catalog_save`] or the CLI.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_open(backend: u32, dir: *const c_char, out: *mut *mut MvCatalog) -> MvStatus {
    guard(|| {
        let dir = str_arg(dir, "dir")?;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let catalog = Catalog::open(backend_kind(backend)?, Path::new(dir))?;
        put_catalog(out, catalog);
        Ok(())
    })
}

/// Writes the catalog's on-disk layout into `dir`.
///
/// # Safety
/// `catalog` must come from this library and `dir` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_save(catalog: *const MvCatalog, dir: *const c_char) -> MvStatus {
    guard(|| {
        let catalog = catalog_ref(catalog)?;
        let dir = str_arg(dir, "dir")?;
        catalog.catalog.save(Path::new(dir))?;
        Ok(())
    })
}

/// Releases a catalog. Null is ignored.
///
/// # Safety
/// `catalog` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_free(catalog: *mut MvCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Ingests every source listed in a corpus manifest.
///
/// Load times start at `load_time_ms` (epoch milliseconds) and advance by
/// one per document. Documents that fail to extract are skipped and counted
/// in `failures_out`. Either out pointer may be null.
///
/// # Safety
/// `catalog` must come from this library, `manifest` be NUL-terminated and
/// non-null out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_ingest(
    catalog: *mut MvCatalog,
    manifest: *const c_char,
    load_time_ms: i64,
    links_out: *mut u64,
    failures_out: *mut u64,
) -> MvStatus {
    guard(|| {
        let catalog = catalog_mut(catalog)?;
        let manifest = load_manifest(Path::new(str_arg(manifest, "manifest")?))?;
        let mut clock = SteppingClock::new(Timestamp::from_millis(load_time_ms), 1);
        let report = run_etl(&manifest, std::slice::from_mut(&mut catalog.catalog), &mut clock);
        if let Some(out) = links_out.as_mut() {
            *out = report.links_inserted as u64;
        }
        if let Some(out) = failures_out.as_mut() {
            *out = report.failures() as u64;
        }
        Ok(())
    })
}

/// Number of document links stored.
///
/// # Safety
/// `catalog` must come from this library and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_link_count(catalog: *const MvCatalog, out: *mut u64) -> MvStatus {
    guard(|| {
        let catalog = catalog_ref(catalog)?;
        let out = out.as_mut().ok_or(FfiError::Null("out"))?;
        *out = catalog.catalog.link_count();
        Ok(())
    })
}

/// Runs a query and returns its rows as JSON lines, one row per line.
///
/// # Safety
/// `catalog` must come from this library, `expr` be NUL-terminated and
/// `out` valid. The result must be released with [`mv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_query(
    catalog: *const MvCatalog,
    expr: *const c_char,
    two_phase: bool,
    out: *mut *mut c_char,
) -> MvStatus {
    guard(|| {
        let catalog = catalog_ref(catalog)?;
        let predicates = parse_query(str_arg(expr, "expr")?)?;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let plan = plan(catalog.catalog.schema(), &predicates, two_phase)?;
        let rows = execute(&plan, catalog.catalog.backend())?;
        put_string(out, rows.to_json_lines())
    })
}

/// Document-model JSON export of one entity, or of all when `entity` is null.
/// Only document catalogs support it.
///
/// # Safety
/// `catalog` must come from this library, `entity` be null or
/// NUL-terminated and `out` valid. Release the result with [`mv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_export(catalog: *const MvCatalog, entity: *const c_char, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let catalog = catalog_ref(catalog)?;
        let entity = if entity.is_null() { None } else { Some(str_arg(entity, "entity")?) };
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let backend = catalog.catalog.backend().as_document().ok_or(FfiError::Unsupported("export needs the document backend"))?;
        let value = match entity {
            Some(e) => backend.export_documents(e)?,
            None => backend.export_all()?,
        };
        let text = serde_json::to_string_pretty(&value).map_err(|e| FfiError::Data(e.to_string()))?;
        put_string(out, text)
    })
}

/// Per-entity storage accounting as CSV.
///
/// # Safety
/// `catalog` must come from this library and `out` be valid. Release the
/// result with [`mv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mv_catalog_storage_report_csv(catalog: *const MvCatalog, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let catalog = catalog_ref(catalog)?;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let mut buf = Vec::new();
        catalog.catalog.backend().storage_report().write_csv(&mut buf).map_err(|e| FfiError::Data(e.to_string()))?;
        put_string(out, String::from_utf8(buf).map_err(|e| FfiError::Data(e.to_string()))?)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mv_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version has an interior NUL"),
    };
    VERSION.as_ptr()
}
