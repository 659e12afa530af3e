//! Writes documents into a backend as hubs, a link and satellites.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::storage::{open_backend, new_backend, Backend, BackendKind, EntityFilter, StorageError};

use super::document::{DocumentError, DocumentMetadata};
use super::key::{make_business_key, BusinessKey, KeyError, LinkId, SourceRef};
use super::record::{present_attributes, HubRecord, LinkRecord, Record, SatelliteRecord};
use super::schema::{names, VaultSchema};
use super::value::{AttributeValue, Timestamp};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("invalid document: {0}")]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("category `{0}` has no registered satellite")]
    UnregisteredCategory(String),
    #[error("{satellite} has no attribute `{attribute}`")]
    UnknownCategoryAttribute { satellite: String, attribute: String },
    #[error("schema lacks entity {0}")]
    MissingEntity(&'static str),
}

/// Point in time at which satellite history is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AsOf {
    #[default]
    Latest,
    At(Timestamp),
}

impl AsOf {
    /// The version current at this point: the latest one not after it.
    pub fn pick<'a>(&self, history: &'a [SatelliteRecord]) -> Option<&'a SatelliteRecord> {
        match self {
            AsOf::Latest => history.last(),
            AsOf::At(t) => history.iter().rev().find(|s| s.datetime <= *t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertOutcome {
    pub link: LinkId,
    pub hubs_created: usize,
    /// Satellite versions written; unchanged descriptions are not rewritten.
    pub satellites_written: usize,
}

/// A vault instance over one backend.
#[derive(Debug)]
pub struct Catalog {
    backend: Box<dyn Backend>,
    next_link: u64,
}

impl Catalog {
    /// Empty catalog with `schema` installed.
    pub fn new(kind: BackendKind, schema: &VaultSchema) -> Result<Self, CatalogError> {
        let mut backend = new_backend(kind);
        backend.init_schema(schema)?;
        Catalog::from_backend(backend)
    }

    pub fn open(kind: BackendKind, dir: &Path) -> Result<Self, CatalogError> {
        Catalog::from_backend(open_backend(kind, dir)?)
    }

    pub fn from_backend(backend: Box<dyn Backend>) -> Result<Self, CatalogError> {
        let schema = backend.schema().ok_or(StorageError::NotInitialized)?;
        let next_link = if schema.link(names::LINK_DOCUMENT).is_some() {
            backend
                .scan(&EntityFilter::all(names::LINK_DOCUMENT))?
                .iter()
                .filter_map(|r| match r {
                    Record::Link(l) => Some(l.id.0),
                    _ => None,
                })
                .max()
                .unwrap_or(0)
                + 1
        } else {
            1
        };
        Ok(Catalog { backend, next_link })
    }

    pub fn save(&self, dir: &Path) -> Result<(), CatalogError> {
        Ok(self.backend.save(dir)?)
    }

    pub fn backend(&self) -> &dyn Backend {
        self.backend.as_ref()
    }

    pub fn backend_mut(&mut self) -> &mut dyn Backend {
        self.backend.as_mut()
    }

    pub fn into_backend(self) -> Box<dyn Backend> {
        self.backend
    }

    pub fn schema(&self) -> &VaultSchema {
        self.backend.schema().expect("catalog backends are initialized")
    }

    /// Installs an additive evolution of the current schema.
    pub fn evolve(&mut self, schema: &VaultSchema) -> Result<(), CatalogError> {
        Ok(self.backend.init_schema(schema)?)
    }

    pub fn link_count(&self) -> u64 {
        self.next_link - 1
    }

    /// Stores one document: its four hubs (reusing existing keys, the
    /// unknown record for a missing date or location), a new link, and the
    /// satellites whose description differs from the current version.
    pub fn insert_document(&mut self, doc: &DocumentMetadata, load_time: Timestamp) -> Result<InsertOutcome, CatalogError> {
        doc.validate()?;
        let schema = self.schema().clone();
        let category_sat = schema
            .dispatch(doc.category.as_str())
            .ok_or_else(|| CatalogError::UnregisteredCategory(doc.category.to_string()))?
            .to_owned();
        let category_def = schema.satellite(&category_sat).ok_or(CatalogError::MissingEntity(names::HUB_CATEGORY))?;
        for name in doc.category_attributes.keys() {
            if category_def.attribute(name).is_none() {
                return Err(CatalogError::UnknownCategoryAttribute { satellite: category_sat.clone(), attribute: name.clone() });
            }
        }
        if schema.link(names::LINK_DOCUMENT).is_none() {
            return Err(CatalogError::MissingEntity(names::LINK_DOCUMENT));
        }

        let mut outcome = InsertOutcome { link: LinkId(self.next_link), hubs_created: 0, satellites_written: 0 };
        let hubs: [(&'static str, Option<String>); 4] = [
            (names::HUB_TITLE, Some(doc.title_natural())),
            (names::HUB_LOCATION, doc.location_natural()),
            (names::HUB_DATE, doc.date_natural()),
            (names::HUB_CATEGORY, Some(doc.category_natural())),
        ];
        let mut members = BTreeMap::new();
        for (hub, natural) in hubs {
            let def = schema.hub(hub).ok_or(CatalogError::MissingEntity(hub))?;
            let (key, natural) = match natural {
                Some(n) => (make_business_key(def, &n)?, n),
                None => (BusinessKey::unknown(), String::new()),
            };
            if self.ensure_hub(hub, &key, natural, load_time, &doc.source)? {
                outcome.hubs_created += 1;
            }
            members.insert(hub.to_owned(), key);
        }

        self.backend.put_record(Record::Link(LinkRecord {
            link: names::LINK_DOCUMENT.to_owned(),
            id: outcome.link,
            members: members.clone(),
            datetime: load_time,
            source: doc.source.clone(),
        }))?;
        self.next_link += 1;

        let mut satellites = vec![(names::SAT_TITLE, &members[names::HUB_TITLE], doc.title_attributes())];
        if doc.date_natural().is_some() {
            satellites.push((names::SAT_DATE, &members[names::HUB_DATE], doc.date_attributes()));
        }
        if doc.location.is_some() {
            satellites.push((names::SAT_LOCATION, &members[names::HUB_LOCATION], doc.location_attributes()));
        }
        let category_attrs: Vec<(String, AttributeValue)> =
            doc.category_attributes.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        satellites.push((category_sat.as_str(), &members[names::HUB_CATEGORY], category_attrs));

        for (sat, parent, attrs) in satellites {
            if self.put_if_changed(sat, parent, present_attributes(attrs), load_time, &doc.source)? {
                outcome.satellites_written += 1;
            }
        }
        Ok(outcome)
    }

    fn ensure_hub(
        &mut self,
        hub: &str,
        key: &BusinessKey,
        natural: String,
        load_time: Timestamp,
        source: &SourceRef,
    ) -> Result<bool, CatalogError> {
        let id = super::record::RecordId::Hub(key.clone());
        if self.backend.get_by_key(hub, &id)?.is_some() {
            return Ok(false);
        }
        self.backend.put_record(Record::Hub(HubRecord {
            hub: hub.to_owned(),
            key: key.clone(),
            natural,
            datetime: load_time,
            source: source.clone(),
        }))?;
        Ok(true)
    }

    fn put_if_changed(
        &mut self,
        satellite: &str,
        parent: &BusinessKey,
        attributes: BTreeMap<String, AttributeValue>,
        load_time: Timestamp,
        source: &SourceRef,
    ) -> Result<bool, CatalogError> {
        let history = self.backend.satellite_history(satellite, parent)?;
        if history.last().is_some_and(|current| current.attributes == attributes) {
            return Ok(false);
        }
        self.backend.put_record(Record::Satellite(SatelliteRecord {
            satellite: satellite.to_owned(),
            parent_key: parent.clone(),
            datetime: load_time,
            attributes,
            source: source.clone(),
        }))?;
        Ok(true)
    }

    /// Appends a new version of a satellite description. Returns false when
    /// the description equals the current version.
    pub fn supersede_satellite(
        &mut self,
        satellite: &str,
        parent: &BusinessKey,
        attributes: BTreeMap<String, AttributeValue>,
        load_time: Timestamp,
        source: &SourceRef,
    ) -> Result<bool, CatalogError> {
        self.put_if_changed(satellite, parent, present_attributes(attributes), load_time, source)
    }

    pub fn history(&self, satellite: &str, parent: &BusinessKey) -> Result<Vec<SatelliteRecord>, CatalogError> {
        Ok(self.backend.satellite_history(satellite, parent)?)
    }

    pub fn current_satellite(
        &self,
        satellite: &str,
        parent: &BusinessKey,
        as_of: AsOf,
    ) -> Result<Option<SatelliteRecord>, CatalogError> {
        let history = self.history(satellite, parent)?;
        Ok(as_of.pick(&history).cloned())
    }
}
