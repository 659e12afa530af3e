//! Plan execution against any backend.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::storage::filter::{key_column, EntityFilter, FieldOp, FieldPredicate};
use crate::storage::{Backend, StorageError};
use crate::vault::catalog::AsOf;
use crate::vault::document::category_label_of;
use crate::vault::key::{BusinessKey, LinkId, SourceRef};
use crate::vault::record::{LinkRecord, Record, RecordId, SatelliteRecord};
use crate::vault::schema::names;
use crate::vault::value::AttributeValue;

use super::plan::{Leg, QueryPlan};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("plan targets schema version {plan} but the backend holds version {backend}")]
    SchemaMismatch { plan: u32, backend: u32 },
    #[error("execute_two_phase needs a plan built with two_phase = true")]
    NotTwoPhase,
}

pub type Attributes = BTreeMap<String, AttributeValue>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResultRow {
    pub link: LinkId,
    #[serde(serialize_with = "source_uri")]
    pub source: SourceRef,
    /// Current attributes of every joined satellite.
    pub satellites: BTreeMap<String, Attributes>,
    /// Category label the dispatch table could not resolve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unresolved_category: Option<String>,
}

fn source_uri<S: serde::Serializer>(s: &SourceRef, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.uri())
}

/// Rows sorted by link id, no duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResultSet {
    pub rows: Vec<ResultRow>,
}

impl ResultSet {
    pub fn from_rows(mut rows: Vec<ResultRow>) -> Self {
        rows.sort_by_key(|r| r.link);
        rows.dedup_by_key(|r| r.link);
        ResultSet { rows }
    }

    pub fn link_ids(&self) -> Vec<LinkId> {
        self.rows.iter().map(|r| r.link).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One JSON object per row, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("rows serialize"));
            out.push('\n');
        }
        out
    }
}

fn check_version(plan: &QueryPlan, backend: &dyn Backend) -> Result<(), ExecError> {
    let version = backend.schema().ok_or(StorageError::NotInitialized)?.version();
    if version < plan.schema_version {
        return Err(ExecError::SchemaMismatch { plan: plan.schema_version, backend: version });
    }
    Ok(())
}

fn visible(as_of: AsOf, datetime: crate::vault::value::Timestamp) -> bool {
    match as_of {
        AsOf::Latest => true,
        AsOf::At(t) => datetime <= t,
    }
}

fn filters_match(filters: &[FieldPredicate], sat: &SatelliteRecord) -> bool {
    filters.iter().all(|f| f.matches(sat.attribute(&f.field)))
}

/// Joins one leg for `key`: the hub must exist, carry the leg's category
/// label if any, and have a current satellite version passing the filters.
fn join_leg(backend: &dyn Backend, leg: &Leg, key: &BusinessKey, as_of: AsOf) -> Result<Option<Attributes>, ExecError> {
    let Some(Record::Hub(hub)) = backend.get_by_key(&leg.hub, &RecordId::Hub(key.clone()))? else {
        return Ok(None);
    };
    if !visible(as_of, hub.datetime) {
        return Ok(None);
    }
    if let Some(label) = &leg.category {
        if category_label_of(&hub.natural) != Some(label.as_str()) {
            return Ok(None);
        }
    }
    let history = backend.satellite_history(&leg.satellite, key)?;
    Ok(as_of.pick(&history).filter(|cur| filters_match(&leg.filters, cur)).map(|cur| cur.attributes.clone()))
}

fn links(backend: &dyn Backend, plan: &QueryPlan) -> Result<Vec<LinkRecord>, ExecError> {
    Ok(backend
        .scan(&EntityFilter::all(&plan.link))?
        .into_iter()
        .filter_map(Record::into_link)
        .filter(|l| visible(plan.as_of, l.datetime))
        .collect())
}

/// Rows of the plan's join, one per qualifying link.
fn join(plan: &QueryPlan, backend: &dyn Backend) -> Result<Vec<(LinkRecord, ResultRow)>, ExecError> {
    let anchor = &plan.legs[0];
    let scanned = backend.scan(&EntityFilter { entity: anchor.satellite.clone(), predicates: anchor.filters.clone() })?;
    let candidates: BTreeSet<BusinessKey> = scanned
        .into_iter()
        .filter_map(Record::into_satellite)
        .map(|s| s.parent_key)
        .collect();
    let mut qualified: BTreeMap<BusinessKey, Attributes> = BTreeMap::new();
    for key in candidates {
        if let Some(attrs) = join_leg(backend, anchor, &key, plan.as_of)? {
            qualified.insert(key, attrs);
        }
    }

    let mut rows = Vec::new();
    'links: for link in links(backend, plan)? {
        let Some(attrs) = link.members.get(&anchor.hub).and_then(|k| qualified.get(k)) else { continue };
        let mut satellites = BTreeMap::from([(anchor.satellite.clone(), attrs.clone())]);
        for leg in &plan.legs[1..] {
            let Some(key) = link.members.get(&leg.hub) else { continue 'links };
            match join_leg(backend, leg, key, plan.as_of)? {
                Some(attrs) => {
                    satellites.insert(leg.satellite.clone(), attrs);
                }
                None => continue 'links,
            }
        }
        let row = ResultRow { link: link.id, source: link.source.clone(), satellites, unresolved_category: None };
        rows.push((link, row));
    }
    Ok(rows)
}

/// Runs a plan: the anchor satellite is scanned, every other leg is joined
/// per link through primary-key reads. Two-phase plans are delegated to
/// [`execute_two_phase`].
pub fn execute(plan: &QueryPlan, backend: &dyn Backend) -> Result<ResultSet, ExecError> {
    if plan.two_phase {
        return execute_two_phase(plan, backend);
    }
    check_version(plan, backend)?;
    Ok(ResultSet::from_rows(join(plan, backend)?.into_iter().map(|(_, row)| row).collect()))
}

/// Phase 1 resolves the matching documents and their category labels;
/// phase 2 issues, per document, a full-collection filter on the satellite
/// the dispatch table names for that label and merges its current version.
pub fn execute_two_phase(plan: &QueryPlan, backend: &dyn Backend) -> Result<ResultSet, ExecError> {
    if !plan.two_phase {
        return Err(ExecError::NotTwoPhase);
    }
    check_version(plan, backend)?;
    let schema = backend.schema().ok_or(StorageError::NotInitialized)?.clone();

    let mut phase1 = Vec::new();
    for (link, row) in join(plan, backend)? {
        let label = match link.members.get(names::HUB_CATEGORY) {
            Some(key) => match backend.get_by_key(names::HUB_CATEGORY, &RecordId::Hub(key.clone()))? {
                Some(Record::Hub(hub)) => category_label_of(&hub.natural).map(|l| (key.clone(), l.to_owned())),
                _ => None,
            },
            None => None,
        };
        phase1.push((row, label));
    }

    let mut rows = Vec::with_capacity(phase1.len());
    for (mut row, label) in phase1 {
        let Some((key, label)) = label else {
            row.unresolved_category = Some(String::new());
            rows.push(row);
            continue;
        };
        let Some(satellite) = schema.dispatch(&label) else {
            row.unresolved_category = Some(label);
            rows.push(row);
            continue;
        };
        let parent = &schema.satellite(satellite).expect("dispatch targets exist").parent;
        let filter = EntityFilter::all(satellite).with(key_column(parent), FieldOp::Equals(key.to_string()));
        let mut history: Vec<SatelliteRecord> = backend
            .scan(&filter)?
            .into_iter()
            .filter_map(Record::into_satellite)
            .filter(|s| s.parent_key == key)
            .collect();
        history.sort_by_key(|s| s.datetime);
        if let Some(current) = plan.as_of.pick(&history) {
            row.satellites.insert(satellite.to_owned(), current.attributes.clone());
        }
        rows.push(row);
    }
    Ok(ResultSet::from_rows(rows))
}
