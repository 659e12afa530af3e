//! Corpus manifest loading, per-source extraction and ingestion.

pub mod dates;
pub mod dc;
pub mod extract;
pub mod manifest;
pub mod run;

pub use dc::DcRecord;
pub use extract::{extract_book, extract_file, extract_inventory, extract_picture, extract_press, ExtractError, Extracted, RawDocument};
pub use manifest::{load_manifest, parse_manifest, CorpusManifest, ManifestEntry, ManifestError, SourceKind};
pub use run::{extract_manifest, run_etl, run_etl_collect, IngestFailure, IngestReport, SourceReport};
