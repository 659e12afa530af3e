//! Logical model: values, keys, schema, records, documents and the catalog.

pub mod catalog;
pub mod clock;
pub mod document;
pub mod key;
pub mod record;
pub mod schema;
pub mod schema_text;
pub mod value;

pub use catalog::{AsOf, Catalog, CatalogError, InsertOutcome};
pub use clock::{Clock, SteppingClock, SystemClock};
pub use document::{CategoryLabel, DateBlock, DocumentMetadata, LocationBlock, TitleBlock};
pub use key::{BusinessKey, LinkId, SourceRef};
pub use record::{HubRecord, LinkRecord, Record, RecordId, SatelliteRecord};
pub use schema::{define_schema_tectoniq, VaultSchema};
pub use value::{AttrKind, AttributeValue, Timestamp};
