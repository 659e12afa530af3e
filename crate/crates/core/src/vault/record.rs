//! The three stored entity kinds.

use std::collections::BTreeMap;

use super::key::{BusinessKey, LinkId, SourceRef};
use super::value::{AttributeValue, Timestamp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HubRecord {
    pub hub: String,
    pub key: BusinessKey,
    /// Natural value the key was derived from (empty for the unknown record).
    pub natural: String,
    pub datetime: Timestamp,
    pub source: SourceRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkRecord {
    pub link: String,
    pub id: LinkId,
    pub members: BTreeMap<String, BusinessKey>,
    pub datetime: Timestamp,
    pub source: SourceRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatelliteRecord {
    pub satellite: String,
    pub parent_key: BusinessKey,
    pub datetime: Timestamp,
    /// Present values only; absent attributes are omitted.
    pub attributes: BTreeMap<String, AttributeValue>,
    pub source: SourceRef,
}

impl SatelliteRecord {
    pub fn attribute(&self, name: &str) -> Option<&AttributeValue> {
        self.attributes.get(name)
    }
}

/// Drops absent values and normalizes empty lists.
pub fn present_attributes<I>(attributes: I) -> BTreeMap<String, AttributeValue>
where
    I: IntoIterator<Item = (String, AttributeValue)>,
{
    attributes
        .into_iter()
        .map(|(k, v)| (k, v.normalized()))
        .filter(|(_, v)| !v.is_absent())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Hub(HubRecord),
    Link(LinkRecord),
    Satellite(SatelliteRecord),
}

impl Record {
    pub fn entity(&self) -> &str {
        match self {
            Record::Hub(r) => &r.hub,
            Record::Link(r) => &r.link,
            Record::Satellite(r) => &r.satellite,
        }
    }

    pub fn id(&self) -> RecordId {
        match self {
            Record::Hub(r) => RecordId::Hub(r.key.clone()),
            Record::Link(r) => RecordId::Link(r.id),
            Record::Satellite(r) => RecordId::Satellite(r.parent_key.clone(), r.datetime),
        }
    }

    pub fn datetime(&self) -> Timestamp {
        match self {
            Record::Hub(r) => r.datetime,
            Record::Link(r) => r.datetime,
            Record::Satellite(r) => r.datetime,
        }
    }

    pub fn source(&self) -> &SourceRef {
        match self {
            Record::Hub(r) => &r.source,
            Record::Link(r) => &r.source,
            Record::Satellite(r) => &r.source,
        }
    }

    pub fn into_hub(self) -> Option<HubRecord> {
        match self {
            Record::Hub(r) => Some(r),
            _ => None,
        }
    }

    pub fn into_link(self) -> Option<LinkRecord> {
        match self {
            Record::Link(r) => Some(r),
            _ => None,
        }
    }

    pub fn into_satellite(self) -> Option<SatelliteRecord> {
        match self {
            Record::Satellite(r) => Some(r),
            _ => None,
        }
    }
}

/// Identity of a record within its entity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordId {
    Hub(BusinessKey),
    Link(LinkId),
    Satellite(BusinessKey, Timestamp),
}
