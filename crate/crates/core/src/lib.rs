//! Data-vault metadata catalog for a heterogeneous data lake.
//!
//! Documents extracted from the lake are stored as hubs (business keys),
//! links (one per document) and satellites (historized descriptions) in one
//! of two physical models, and queried by attribute predicates joined across
//! the vault.

pub mod bench;
pub mod etl;
pub mod query;
pub mod storage;
pub mod vault;
