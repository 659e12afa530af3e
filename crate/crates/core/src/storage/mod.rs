//! Backend contract and the two physical models.
//!
//! Both backends hold the same logical vault: [`relational`] stores each
//! entity as a table of length-prefixed binary rows in a vector of 8 KiB
//! pages, [`document`] stores each entity as a collection of compact JSON
//! documents. Both are file-backed; see `docs/storage-layout.md`.

pub mod document;
pub mod filter;
mod integrity;
pub mod relational;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::vault::key::BusinessKey;
use crate::vault::record::{Record, RecordId, SatelliteRecord};
use crate::vault::schema::{SchemaError, VaultSchema};
use crate::vault::schema_text::SchemaTextError;
use crate::vault::value::Timestamp;

pub use document::DocumentBackend;
pub use filter::{EntityFilter, FieldOp, FieldPredicate};
pub use relational::RelationalBackend;
pub use report::{EntityStorage, StorageReport};

/// File name of the schema export kept alongside each backend's data.
pub const SCHEMA_FILE: &str = "schema.vault";

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("schema not initialized")]
    NotInitialized,
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown attribute `{attribute}` on {entity}")]
    UnknownAttribute { entity: String, attribute: String },
    #[error("{entity} is not a {expected} entity")]
    WrongKind { entity: String, expected: &'static str },
    #[error("attribute {entity}.{attribute} expects a {expected} value")]
    AttributeKind { entity: String, attribute: String, expected: &'static str },
    #[error("integrity violation in {entity}: {message}")]
    Integrity { entity: String, message: String },
    #[error("duplicate record {id} in {entity}")]
    Duplicate { entity: String, id: String },
    #[error("{satellite}[{parent}] at {at} is not later than the current version at {latest}")]
    NonMonotonic { satellite: String, parent: String, at: Timestamp, latest: Timestamp },
    #[error("schema change rejected: {0}")]
    Schema(#[from] SchemaError),
    #[error("stored schema unreadable: {0}")]
    SchemaText(#[from] SchemaTextError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: corrupt data: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("invalid export: {0}")]
    Export(String),
}

impl StorageError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StorageError::Io { path: path.to_owned(), source }
    }

    /// True for violations of record-level integrity rules.
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            StorageError::Integrity { .. } | StorageError::Duplicate { .. } | StorageError::NonMonotonic { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    Relational,
    Document,
}

impl BackendKind {
    pub const ALL: [BackendKind; 2] = [BackendKind::Relational, BackendKind::Document];

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Relational => "relational",
            BackendKind::Document => "document",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relational" => Ok(BackendKind::Relational),
            "document" => Ok(BackendKind::Document),
            other => Err(format!("unknown backend `{other}` (expected relational or document)")),
        }
    }
}

/// Storage contract shared by both physical models.
///
/// Writes take `&mut self` and reads `&self`, so a reader never observes a
/// half-applied write; callers wanting concurrent readers share the backend
/// behind a reference or an `RwLock`.
pub trait Backend: Send + Sync + fmt::Debug {
    fn kind(&self) -> BackendKind;

    fn schema(&self) -> Option<&VaultSchema>;

    /// Creates storage for every entity of `schema`. Re-initializing with an
    /// additive evolution adds the new entities and leaves existing data alone.
    fn init_schema(&mut self, schema: &VaultSchema) -> Result<(), StorageError>;

    /// Stores a record after checking referential integrity and identity.
    fn put_record(&mut self, record: Record) -> Result<(), StorageError>;

    fn get_by_key(&self, entity: &str, id: &RecordId) -> Result<Option<Record>, StorageError>;

    /// Full-collection filter; no secondary indexes are consulted.
    fn scan(&self, filter: &EntityFilter) -> Result<Vec<Record>, StorageError>;

    /// Every version of one satellite parent, oldest first, read through the
    /// primary key.
    fn satellite_history(&self, satellite: &str, parent: &BusinessKey) -> Result<Vec<SatelliteRecord>, StorageError>;

    fn count(&self, entity: &str) -> Result<usize, StorageError>;

    fn storage_report(&self) -> StorageReport;

    /// Writes the on-disk layout into `dir`, replacing previous contents.
    fn save(&self, dir: &Path) -> Result<(), StorageError>;

    /// The document model, for its JSON export.
    fn as_document(&self) -> Option<&DocumentBackend> {
        None
    }
}

pub fn new_backend(kind: BackendKind) -> Box<dyn Backend> {
    match kind {
        BackendKind::Relational => Box::new(RelationalBackend::new()),
        BackendKind::Document => Box::new(DocumentBackend::new()),
    }
}

pub fn open_backend(kind: BackendKind, dir: &Path) -> Result<Box<dyn Backend>, StorageError> {
    Ok(match kind {
        BackendKind::Relational => Box::new(RelationalBackend::open(dir)?),
        BackendKind::Document => Box::new(DocumentBackend::open(dir)?),
    })
}

pub(crate) fn check_schema_change(current: Option<&VaultSchema>, next: &VaultSchema) -> Result<(), StorageError> {
    next.validate()?;
    if let Some(current) = current {
        if !next.is_additive_evolution_of(current) {
            return Err(SchemaError::NotAdditive { old: current.version(), new: next.version() }.into());
        }
    }
    Ok(())
}

pub(crate) fn read_schema(dir: &Path) -> Result<VaultSchema, StorageError> {
    let path = dir.join(SCHEMA_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| StorageError::io(&path, e))?;
    Ok(crate::vault::schema_text::import_schema(&text)?)
}

pub(crate) fn write_schema(dir: &Path, schema: &VaultSchema) -> Result<(), StorageError> {
    std::fs::create_dir_all(dir).map_err(|e| StorageError::io(dir, e))?;
    let path = dir.join(SCHEMA_FILE);
    std::fs::write(&path, crate::vault::schema_text::export_schema(schema)).map_err(|e| StorageError::io(&path, e))
}

/// Removes data files of a previous save that the current save does not rewrite.
pub(crate) fn clear_data_files(dir: &Path, extensions: &[&str]) -> Result<(), StorageError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(StorageError::io(dir, e)),
    };
    for entry in entries {
        let path = entry.map_err(|e| StorageError::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if extensions.contains(&ext) {
            std::fs::remove_file(&path).map_err(|e| StorageError::io(&path, e))?;
        }
    }
    Ok(())
}
