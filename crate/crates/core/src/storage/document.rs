//! Document physical model: one collection of JSON documents per entity.
//!
//! Document ids: a hub document uses its business key; a link document its
//! id zero-padded to ten digits; a satellite version `<parent>_<NNN>` where
//! `NNN` is the 1-based version ordinal. Fields use the same names as
//! [`entity_fields`](super::filter::entity_fields); instants are stored as
//! integer epoch milliseconds and text lists as arrays. Absent attributes are
//! omitted.
//!
//! Storage volume per entity: data is the summed compact JSON length of the
//! documents (the `_id` travels as the collection key, not a field), index is
//! `len(_id) + 16` per document for the primary index. On disk each
//! collection is `<entity>.jsonl`, one `{"_id": .., ...fields}` line per
//! document in id order.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::vault::key::{BusinessKey, LinkId, SourceRef};
use crate::vault::record::{HubRecord, LinkRecord, Record, RecordId, SatelliteRecord};
use crate::vault::schema::{EntityDef, EntityKind, VaultSchema};
use crate::vault::value::{AttrKind, AttributeValue, Timestamp};

use super::filter::{entity_fields, key_column, EntityFilter, Matcher, DATETIME_FIELD, SOURCE_FIELD};
use super::integrity::{check_put, RecordLookup};
use super::report::{EntityStorage, StorageReport};
use super::{check_schema_change, clear_data_files, read_schema, write_schema, Backend, BackendKind, StorageError};

pub const INDEX_ENTRY_OVERHEAD: u64 = 16;
const ID_FIELD: &str = "_id";

#[derive(Clone, Debug)]
struct Collection {
    kind: EntityKind,
    /// Field name → kind, in column order.
    fields: Vec<(String, AttrKind)>,
    docs: BTreeMap<String, Map<String, Value>>,
    data_bytes: u64,
}

impl Collection {
    fn field_kind(&self, name: &str) -> Option<AttrKind> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, k)| *k)
    }

    fn insert(&mut self, id: String, doc: Map<String, Value>) {
        self.data_bytes += json_len(&doc);
        if let Some(old) = self.docs.insert(id, doc) {
            self.data_bytes -= json_len(&old);
        }
    }
}

fn json_len(doc: &Map<String, Value>) -> u64 {
    serde_json::to_vec(doc).map(|v| v.len() as u64).unwrap_or(0)
}

fn link_doc_id(id: LinkId) -> String {
    format!("{:010}", id.0)
}

fn version_doc_id(parent: &BusinessKey, ordinal: usize) -> String {
    format!("{parent}_{ordinal:03}")
}

fn value_json(value: &AttributeValue) -> Option<Value> {
    match value {
        AttributeValue::Text(t) => Some(Value::String(t.clone())),
        AttributeValue::TextList(items) => Some(Value::Array(items.iter().cloned().map(Value::String).collect())),
        AttributeValue::Timestamp(ts) => Some(Value::from(ts.as_millis())),
        AttributeValue::Absent => None,
    }
}

fn json_value(kind: AttrKind, value: &Value) -> Result<AttributeValue, String> {
    match (kind, value) {
        (AttrKind::Text, Value::String(s)) => Ok(AttributeValue::Text(s.clone())),
        (AttrKind::TextList, Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| format!("non-string list element {v}")))
            .collect::<Result<Vec<_>, _>>()
            .map(AttributeValue::text_list),
        (AttrKind::Timestamp, Value::Number(n)) => {
            n.as_i64().map(|ms| AttributeValue::Timestamp(Timestamp::from_millis(ms))).ok_or_else(|| format!("bad instant {n}"))
        }
        (kind, other) => Err(format!("expected {kind} value, found {other}")),
    }
}

/// Evaluates a scan predicate on one stored document; the id column comes
/// from the document id.
fn field_matches(coll: &Collection, id: &str, doc: &Map<String, Value>, field: &str, matcher: &Matcher) -> bool {
    if coll.fields.first().is_some_and(|(n, _)| n == field) && coll.kind != EntityKind::Satellite {
        return match coll.kind {
            EntityKind::Link => matcher.text(id.trim_start_matches('0')),
            _ => matcher.text(id),
        };
    }
    match (coll.field_kind(field), doc.get(field)) {
        (Some(AttrKind::Timestamp), Some(Value::Number(n))) => n.as_i64().is_some_and(|ms| matcher.instant(Timestamp::from_millis(ms))),
        (Some(_), Some(Value::String(s))) => matcher.text(s),
        (Some(_), Some(Value::Array(items))) => items.iter().filter_map(Value::as_str).any(|s| matcher.text(s)),
        _ => false,
    }
}

fn encode(schema: &VaultSchema, record: &Record) -> Map<String, Value> {
    let mut doc = Map::new();
    match record {
        Record::Hub(h) => {
            if let Some(def) = schema.hub(&h.hub) {
                doc.insert(def.key_source.clone(), Value::String(h.natural.clone()));
            }
        }
        Record::Link(l) => {
            for (hub, key) in &l.members {
                doc.insert(key_column(hub), Value::String(key.to_string()));
            }
        }
        Record::Satellite(s) => {
            if let Some(def) = schema.satellite(&s.satellite) {
                doc.insert(key_column(&def.parent), Value::String(s.parent_key.to_string()));
            }
            for (name, value) in &s.attributes {
                if let Some(v) = value_json(value) {
                    doc.insert(name.clone(), v);
                }
            }
        }
    }
    doc.insert(DATETIME_FIELD.to_owned(), Value::from(record.datetime().as_millis()));
    doc.insert(SOURCE_FIELD.to_owned(), Value::String(record.source().to_string()));
    doc
}

fn decode(schema: &VaultSchema, entity: &str, id: &str, doc: &Map<String, Value>) -> Result<Record, String> {
    let text = |field: &str| -> Result<String, String> {
        doc.get(field).and_then(Value::as_str).map(str::to_owned).ok_or_else(|| format!("{id}: missing {field}"))
    };
    let datetime = doc
        .get(DATETIME_FIELD)
        .and_then(Value::as_i64)
        .map(Timestamp::from_millis)
        .ok_or_else(|| format!("{id}: missing {DATETIME_FIELD}"))?;
    let source = SourceRef::new(text(SOURCE_FIELD)?).map_err(|e| format!("{id}: {e}"))?;
    let def = schema.entity(entity).ok_or_else(|| format!("unknown entity {entity}"))?;
    Ok(match def {
        EntityDef::Hub(h) => Record::Hub(HubRecord {
            hub: entity.to_owned(),
            key: BusinessKey::from_raw(id),
            natural: text(&h.key_source)?,
            datetime,
            source,
        }),
        EntityDef::Link(l) => Record::Link(LinkRecord {
            link: entity.to_owned(),
            id: LinkId(id.parse().map_err(|_| format!("bad link id {id}"))?),
            members: l
                .members
                .iter()
                .map(|m| text(&key_column(m)).map(|k| (m.clone(), BusinessKey::from_raw(k))))
                .collect::<Result<_, _>>()?,
            datetime,
            source,
        }),
        EntityDef::Satellite(s) => {
            let mut attributes = BTreeMap::new();
            for attr in &s.attributes {
                if let Some(v) = doc.get(&attr.name) {
                    attributes.insert(attr.name.clone(), json_value(attr.kind, v).map_err(|e| format!("{id}: {e}"))?);
                }
            }
            Record::Satellite(SatelliteRecord {
                satellite: entity.to_owned(),
                parent_key: BusinessKey::from_raw(text(&key_column(&s.parent))?),
                datetime,
                attributes,
                source,
            })
        }
    })
}

#[derive(Debug, Default)]
pub struct DocumentBackend {
    schema: Option<VaultSchema>,
    collections: BTreeMap<String, Collection>,
}

impl DocumentBackend {
    pub fn new() -> Self {
        DocumentBackend::default()
    }

    pub fn open(dir: &Path) -> Result<Self, StorageError> {
        let schema = read_schema(dir)?;
        let mut backend = DocumentBackend::new();
        backend.init_schema(&schema)?;
        for (entity, coll) in backend.collections.iter_mut() {
            let path = dir.join(format!("{entity}.jsonl"));
            let file = match std::fs::File::open(&path) {
                Ok(f) => f,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(StorageError::io(&path, e)),
            };
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| StorageError::io(&path, e))?;
                let corrupt = |message: String| StorageError::Corrupt { path: path.clone(), message: format!("line {}: {message}", n + 1) };
                let mut doc: Map<String, Value> = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                let id = match doc.remove(ID_FIELD) {
                    Some(Value::String(id)) => id,
                    _ => return Err(corrupt("missing _id".into())),
                };
                decode(&schema, entity, &id, &doc).map_err(corrupt)?;
                coll.insert(id, doc);
            }
        }
        Ok(backend)
    }

    fn schema_ref(&self) -> Result<&VaultSchema, StorageError> {
        self.schema.as_ref().ok_or(StorageError::NotInitialized)
    }

    fn collection(&self, entity: &str) -> Result<&Collection, StorageError> {
        self.schema_ref()?;
        self.collections.get(entity).ok_or_else(|| StorageError::UnknownEntity(entity.to_owned()))
    }

    fn decode(&self, entity: &str, id: &str, doc: &Map<String, Value>) -> Result<Record, StorageError> {
        decode(self.schema_ref()?, entity, id, doc)
            .map_err(|message| StorageError::Corrupt { path: format!("{entity}.jsonl").into(), message })
    }

    fn versions<'a>(&'a self, coll: &'a Collection, parent: &BusinessKey) -> impl Iterator<Item = (&'a String, &'a Map<String, Value>)> + 'a {
        let prefix = format!("{parent}_");
        let parent = parent.to_string();
        let parent_col = coll.fields[0].0.clone();
        coll.docs
            .range(prefix.clone()..)
            .take_while(move |(id, _)| id.starts_with(&prefix))
            .filter(move |(_, doc)| doc.get(&parent_col).and_then(Value::as_str) == Some(parent.as_str()))
    }

    /// Collection contents as `{"<entity>": {"<_id>": {fields}}}`, ids sorted.
    pub fn export_documents(&self, entity: &str) -> Result<Value, StorageError> {
        let coll = self.collection(entity)?;
        let docs: Map<String, Value> = coll.docs.iter().map(|(id, doc)| (id.clone(), Value::Object(doc.clone()))).collect();
        let mut out = Map::new();
        out.insert(entity.to_owned(), Value::Object(docs));
        Ok(Value::Object(out))
    }

    /// Every collection in one export object.
    pub fn export_all(&self) -> Result<Value, StorageError> {
        let mut out = Map::new();
        for name in self.schema_ref()?.entity_names() {
            if let Value::Object(m) = self.export_documents(name)? {
                out.extend(m);
            }
        }
        Ok(Value::Object(out))
    }

    /// Stores the records of an export, hubs first, then links, then
    /// satellites. Returns the number of records stored.
    pub fn import_documents(&mut self, export: &Value) -> Result<usize, StorageError> {
        let records = decode_export(self.schema_ref()?, export)?;
        let n = records.len();
        for record in records {
            self.put_record(record)?;
        }
        Ok(n)
    }
}

/// Decodes an export object into records, ordered hubs, links, satellites
/// and by document id within each collection.
pub fn decode_export(schema: &VaultSchema, export: &Value) -> Result<Vec<Record>, StorageError> {
    let object = export.as_object().ok_or_else(|| StorageError::Export("top level must be an object".into()))?;
    for name in object.keys() {
        if schema.entity(name).is_none() {
            return Err(StorageError::UnknownEntity(name.clone()));
        }
    }
    let mut records = Vec::new();
    for name in schema.entity_names() {
        let Some(docs) = object.get(name) else { continue };
        let docs = docs.as_object().ok_or_else(|| StorageError::Export(format!("{name} must map ids to documents")))?;
        for (id, doc) in docs {
            let doc = doc.as_object().ok_or_else(|| StorageError::Export(format!("{name}/{id} is not an object")))?;
            records.push(decode(schema, name, id, doc).map_err(StorageError::Export)?);
        }
    }
    Ok(records)
}

impl RecordLookup for DocumentBackend {
    fn has_hub(&self, hub: &str, key: &BusinessKey) -> bool {
        self.collections.get(hub).is_some_and(|c| c.docs.contains_key(key.as_str()))
    }

    fn has_link(&self, link: &str, id: LinkId) -> bool {
        self.collections.get(link).is_some_and(|c| c.docs.contains_key(&link_doc_id(id)))
    }

    fn latest_version(&self, satellite: &str, parent: &BusinessKey) -> Option<Timestamp> {
        let coll = self.collections.get(satellite)?;
        self.versions(coll, parent)
            .filter_map(|(_, doc)| doc.get(DATETIME_FIELD).and_then(Value::as_i64))
            .max()
            .map(Timestamp::from_millis)
    }
}

impl Backend for DocumentBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Document
    }

    fn as_document(&self) -> Option<&DocumentBackend> {
        Some(self)
    }

    fn schema(&self) -> Option<&VaultSchema> {
        self.schema.as_ref()
    }

    fn init_schema(&mut self, schema: &VaultSchema) -> Result<(), StorageError> {
        check_schema_change(self.schema.as_ref(), schema)?;
        for entity in schema.entity_names() {
            if !self.collections.contains_key(entity) {
                let kind = schema.entity(entity).expect("listed").kind();
                let fields = entity_fields(schema, entity)?;
                self.collections.insert(entity.to_owned(), Collection { kind, fields, docs: BTreeMap::new(), data_bytes: 0 });
            }
        }
        self.schema = Some(schema.clone());
        Ok(())
    }

    fn put_record(&mut self, record: Record) -> Result<(), StorageError> {
        let schema = self.schema_ref()?;
        check_put(schema, self, &record)?;
        let doc = encode(schema, &record);
        let id = match &record {
            Record::Hub(h) => h.key.to_string(),
            Record::Link(l) => link_doc_id(l.id),
            Record::Satellite(s) => {
                let coll = self.collection(&s.satellite)?;
                version_doc_id(&s.parent_key, self.versions(coll, &s.parent_key).count() + 1)
            }
        };
        self.collections.get_mut(record.entity()).expect("checked above").insert(id, doc);
        Ok(())
    }

    fn get_by_key(&self, entity: &str, id: &RecordId) -> Result<Option<Record>, StorageError> {
        let coll = self.collection(entity)?;
        let found = match (coll.kind, id) {
            (EntityKind::Hub, RecordId::Hub(k)) => coll.docs.get_key_value(k.as_str()),
            (EntityKind::Link, RecordId::Link(l)) => coll.docs.get_key_value(&link_doc_id(*l)),
            (EntityKind::Satellite, RecordId::Satellite(p, at)) => self
                .versions(coll, p)
                .find(|(_, doc)| doc.get(DATETIME_FIELD).and_then(Value::as_i64) == Some(at.as_millis())),
            _ => None,
        };
        found.map(|(id, doc)| self.decode(entity, id, doc)).transpose()
    }

    fn scan(&self, filter: &EntityFilter) -> Result<Vec<Record>, StorageError> {
        let coll = self.collection(&filter.entity)?;
        filter.validate(self.schema_ref()?)?;
        let matchers: Vec<(&str, Matcher)> = filter.predicates.iter().map(|p| (p.field.as_str(), Matcher::new(&p.op))).collect();
        let mut out = Vec::new();
        for (id, doc) in &coll.docs {
            let keep = matchers.iter().all(|(field, m)| field_matches(coll, id, doc, field, m));
            if keep {
                out.push(self.decode(&filter.entity, id, doc)?);
            }
        }
        Ok(out)
    }

    fn satellite_history(&self, satellite: &str, parent: &BusinessKey) -> Result<Vec<SatelliteRecord>, StorageError> {
        let coll = self.collection(satellite)?;
        if coll.kind != EntityKind::Satellite {
            return Err(StorageError::WrongKind { entity: satellite.to_owned(), expected: "satellite" });
        }
        let mut history = self
            .versions(coll, parent)
            .map(|(id, doc)| Ok(self.decode(satellite, id, doc)?.into_satellite().expect("satellite collection")))
            .collect::<Result<Vec<_>, StorageError>>()?;
        history.sort_by_key(|s| s.datetime);
        Ok(history)
    }

    fn count(&self, entity: &str) -> Result<usize, StorageError> {
        Ok(self.collection(entity)?.docs.len())
    }

    fn storage_report(&self) -> StorageReport {
        let entities = self
            .schema
            .iter()
            .flat_map(|s| s.entity_names())
            .filter_map(|name| {
                self.collections.get(name).map(|c| EntityStorage {
                    entity: name.to_owned(),
                    records: c.docs.len(),
                    data_bytes: c.data_bytes,
                    index_bytes: c.docs.keys().map(|k| k.len() as u64 + INDEX_ENTRY_OVERHEAD).sum(),
                })
            })
            .collect();
        StorageReport { backend: BackendKind::Document, page_size: None, entities }
    }

    fn save(&self, dir: &Path) -> Result<(), StorageError> {
        let schema = self.schema_ref()?;
        clear_data_files(dir, &["jsonl"])?;
        write_schema(dir, schema)?;
        for (entity, coll) in &self.collections {
            let path = dir.join(format!("{entity}.jsonl"));
            let mut out = Vec::new();
            for (id, doc) in &coll.docs {
                let mut line = Map::with_capacity(doc.len() + 1);
                line.insert(ID_FIELD.to_owned(), Value::String(id.clone()));
                line.extend(doc.iter().map(|(k, v)| (k.clone(), v.clone())));
                serde_json::to_writer(&mut out, &line).expect("in-memory write");
                out.push(b'\n');
            }
            let mut file = std::fs::File::create(&path).map_err(|e| StorageError::io(&path, e))?;
            file.write_all(&out).map_err(|e| StorageError::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_padded() {
        assert_eq!(link_doc_id(LinkId(42)), "0000000042");
        assert_eq!(version_doc_id(&BusinessKey::from_raw("ab"), 2), "ab_002");
    }

    #[test]
    fn list_values_roundtrip_through_json() {
        let v = AttributeValue::text_list(["a", "b"]);
        let json = value_json(&v).unwrap();
        assert_eq!(json_value(AttrKind::TextList, &json).unwrap(), v);
        assert!(json_value(AttrKind::Timestamp, &json).is_err());
    }
}
