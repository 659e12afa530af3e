//! Brute-force reference evaluation over the flat document list.
//!
//! No backend, no plan: every document is visited and every predicate is
//! evaluated with this module's own text normalization and date handling.
//! A satellite's current description is the one carried by the last
//! document (highest link id) that maps to the same hub value.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDate};

use crate::vault::document::DocumentMetadata;
use crate::vault::key::LinkId;
use crate::vault::record::present_attributes;
use crate::vault::schema::names;
use crate::vault::value::AttributeValue;

use super::exec::{Attributes, ResultRow, ResultSet};
use super::predicate::Predicate;

/// The ingested corpus in flat form plus the category dispatch table.
#[derive(Clone, Debug, Default)]
pub struct OracleCorpus {
    pub documents: Vec<(LinkId, DocumentMetadata)>,
    /// Category label → satellite name.
    pub dispatch: BTreeMap<String, String>,
}

fn norm(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn instant_millis(text: &str) -> Option<i64> {
    let t = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.timestamp_millis());
    }
    let date = if t.len() == 4 && t.bytes().all(|b| b.is_ascii_digit()) {
        NaiveDate::from_ymd_opt(t.parse().ok()?, 1, 1)?
    } else {
        NaiveDate::parse_from_str(t, "%Y-%m-%d").ok()?
    };
    Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis())
}

fn texts(value: &AttributeValue) -> Vec<&str> {
    match value {
        AttributeValue::Text(t) => vec![t.as_str()],
        AttributeValue::TextList(items) => items.iter().map(String::as_str).collect(),
        _ => Vec::new(),
    }
}

fn holds(predicate: &Predicate, value: Option<&AttributeValue>) -> bool {
    let Some(value) = value else { return false };
    match predicate {
        Predicate::ContainsWord(_, word) => {
            let needle = norm(word);
            texts(value).iter().any(|t| norm(t).contains(&needle))
        }
        Predicate::Equals(_, expected) => match value {
            AttributeValue::Timestamp(ts) => instant_millis(expected) == Some(ts.as_millis()),
            _ => texts(value).iter().any(|t| norm(t) == norm(expected)),
        },
        Predicate::YearEquals(_, year) => match value {
            AttributeValue::Timestamp(ts) => {
                DateTime::from_timestamp_millis(ts.as_millis()).is_some_and(|d| d.year() == *year)
            }
            _ => false,
        },
        Predicate::CategoryIs(_) => false,
    }
}

impl OracleCorpus {
    pub fn new(documents: Vec<(LinkId, DocumentMetadata)>, dispatch: BTreeMap<String, String>) -> Self {
        OracleCorpus { documents, dispatch }
    }

    /// Satellite name → hub identity → latest description.
    fn current_descriptions(&self) -> BTreeMap<&'static str, BTreeMap<String, Attributes>> {
        let mut out: BTreeMap<&'static str, BTreeMap<String, Attributes>> = BTreeMap::new();
        let mut docs: Vec<&(LinkId, DocumentMetadata)> = self.documents.iter().collect();
        docs.sort_by_key(|(id, _)| *id);
        for (_, doc) in docs {
            out.entry(names::SAT_TITLE)
                .or_default()
                .insert(norm(&doc.title_natural()), present_attributes(doc.title_attributes()));
            if let Some(natural) = doc.date_natural() {
                out.entry(names::SAT_DATE).or_default().insert(norm(&natural), present_attributes(doc.date_attributes()));
            }
            if let Some(natural) = doc.location_natural() {
                out.entry(names::SAT_LOCATION)
                    .or_default()
                    .insert(norm(&natural), present_attributes(doc.location_attributes()));
            }
        }
        out
    }

    /// The document's view of every satellite it reaches.
    fn satellites_of(
        &self,
        doc: &DocumentMetadata,
        current: &BTreeMap<&'static str, BTreeMap<String, Attributes>>,
    ) -> BTreeMap<String, Attributes> {
        let mut out = BTreeMap::new();
        let lookup = |sat: &'static str, natural: Option<String>| {
            natural.and_then(|n| current.get(sat).and_then(|m| m.get(&norm(&n))).cloned())
        };
        if let Some(a) = lookup(names::SAT_TITLE, Some(doc.title_natural())) {
            out.insert(names::SAT_TITLE.to_owned(), a);
        }
        if let Some(a) = lookup(names::SAT_DATE, doc.date_natural()) {
            out.insert(names::SAT_DATE.to_owned(), a);
        }
        if let Some(a) = lookup(names::SAT_LOCATION, doc.location_natural()) {
            out.insert(names::SAT_LOCATION.to_owned(), a);
        }
        if let Some(sat) = self.dispatch.get(doc.category.as_str()) {
            let attrs = present_attributes(doc.category_attributes.iter().map(|(k, v)| (k.clone(), v.clone())));
            out.insert(sat.clone(), attrs);
        }
        out
    }

    /// Evaluates a conjunction; `two_phase` adds each match's category
    /// satellite (or flags an unregistered label).
    pub fn scan(&self, predicates: &[Predicate], two_phase: bool) -> ResultSet {
        let current = self.current_descriptions();
        let mut rows = Vec::new();
        for (link, doc) in &self.documents {
            let reachable = self.satellites_of(doc, &current);
            let mut joined: BTreeMap<String, Attributes> = BTreeMap::new();
            let mut ok = true;
            for p in predicates {
                match p {
                    Predicate::CategoryIs(label) => match self.dispatch.get(label) {
                        Some(sat) if doc.category.as_str() == label => {
                            joined.insert(sat.clone(), reachable[sat].clone());
                        }
                        _ => ok = false,
                    },
                    _ => {
                        let attr = p.attr().expect("attribute predicate");
                        match reachable.get(&attr.entity) {
                            Some(attrs) if holds(p, attrs.get(&attr.attribute)) => {
                                joined.insert(attr.entity.clone(), attrs.clone());
                            }
                            _ => ok = false,
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok || predicates.is_empty() {
                continue;
            }
            let mut unresolved_category = None;
            if two_phase {
                match self.dispatch.get(doc.category.as_str()) {
                    Some(sat) => {
                        joined.insert(sat.clone(), reachable[sat].clone());
                    }
                    None => unresolved_category = Some(doc.category.to_string()),
                }
            }
            rows.push(ResultRow { link: *link, source: doc.source.clone(), satellites: joined, unresolved_category });
        }
        ResultSet::from_rows(rows)
    }
}
