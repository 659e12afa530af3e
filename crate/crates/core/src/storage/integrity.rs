//! Write-time rules enforced identically by both backends.

use std::collections::BTreeSet;

use crate::vault::key::{BusinessKey, LinkId};
use crate::vault::record::Record;
use crate::vault::schema::{EntityDef, VaultSchema};
use crate::vault::value::{AttrKind, Timestamp};

use super::StorageError;

/// Existence queries a backend answers from its own representation.
pub(crate) trait RecordLookup {
    fn has_hub(&self, hub: &str, key: &BusinessKey) -> bool;
    fn has_link(&self, link: &str, id: LinkId) -> bool;
    fn latest_version(&self, satellite: &str, parent: &BusinessKey) -> Option<Timestamp>;
}

fn integrity(entity: &str, message: String) -> StorageError {
    StorageError::Integrity { entity: entity.to_owned(), message }
}

pub(crate) fn link_id_of(parent: &BusinessKey) -> Option<LinkId> {
    parent.as_str().strip_prefix("link-")?.parse().ok().map(LinkId)
}

pub(crate) fn check_put(schema: &VaultSchema, lookup: &impl RecordLookup, record: &Record) -> Result<(), StorageError> {
    let entity = record.entity();
    let def = schema.entity(entity).ok_or_else(|| StorageError::UnknownEntity(entity.to_owned()))?;
    match (def, record) {
        (EntityDef::Hub(_), Record::Hub(hub)) => {
            if hub.key.as_str().is_empty() {
                return Err(integrity(entity, "empty business key".into()));
            }
            if lookup.has_hub(entity, &hub.key) {
                return Err(StorageError::Duplicate { entity: entity.to_owned(), id: hub.key.to_string() });
            }
        }
        (EntityDef::Link(def), Record::Link(link)) => {
            if lookup.has_link(entity, link.id) {
                return Err(StorageError::Duplicate { entity: entity.to_owned(), id: link.id.to_string() });
            }
            let declared: BTreeSet<&str> = def.members.iter().map(String::as_str).collect();
            let given: BTreeSet<&str> = link.members.keys().map(String::as_str).collect();
            if declared != given {
                return Err(integrity(entity, format!("member hubs {given:?} do not match {declared:?}")));
            }
            for (hub, key) in &link.members {
                if !lookup.has_hub(hub, key) {
                    return Err(integrity(entity, format!("{hub} has no record with key {key}")));
                }
            }
        }
        (EntityDef::Satellite(def), Record::Satellite(sat)) => {
            let parent_exists = match schema.entity(&def.parent) {
                Some(EntityDef::Hub(_)) => lookup.has_hub(&def.parent, &sat.parent_key),
                Some(EntityDef::Link(_)) => link_id_of(&sat.parent_key).is_some_and(|id| lookup.has_link(&def.parent, id)),
                _ => false,
            };
            if !parent_exists {
                return Err(integrity(entity, format!("{} has no record with key {}", def.parent, sat.parent_key)));
            }
            for (name, value) in &sat.attributes {
                let attr = def.attribute(name).ok_or_else(|| StorageError::UnknownAttribute {
                    entity: entity.to_owned(),
                    attribute: name.clone(),
                })?;
                if value.kind() != Some(attr.kind) {
                    return Err(StorageError::AttributeKind {
                        entity: entity.to_owned(),
                        attribute: name.clone(),
                        expected: attr.kind.as_str(),
                    });
                }
                if attr.kind == AttrKind::TextList && value.texts().is_empty() {
                    return Err(integrity(entity, format!("empty list stored for {name}")));
                }
            }
            if let Some(latest) = lookup.latest_version(entity, &sat.parent_key) {
                if latest == sat.datetime {
                    return Err(StorageError::Duplicate {
                        entity: entity.to_owned(),
                        id: format!("{}@{}", sat.parent_key, sat.datetime),
                    });
                }
                if latest > sat.datetime {
                    return Err(StorageError::NonMonotonic {
                        satellite: entity.to_owned(),
                        parent: sat.parent_key.to_string(),
                        at: sat.datetime,
                        latest,
                    });
                }
            }
        }
        (_, record) => {
            let expected = match record {
                Record::Hub(_) => "hub",
                Record::Link(_) => "link",
                Record::Satellite(_) => "satellite",
            };
            return Err(StorageError::WrongKind { entity: entity.to_owned(), expected });
        }
    }
    Ok(())
}
