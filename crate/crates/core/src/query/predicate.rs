//! Query predicates and the five reference queries.

use std::fmt;

use serde::Serialize;

use crate::vault::schema::names;

/// `Entity.Attribute` reference to a satellite attribute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AttrRef {
    pub entity: String,
    pub attribute: String,
}

impl AttrRef {
    pub fn new(entity: impl Into<String>, attribute: impl Into<String>) -> Self {
        AttrRef { entity: entity.into(), attribute: attribute.into() }
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.entity, self.attribute)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Predicate {
    /// Case-insensitive substring of the normalized text (any list element).
    ContainsWord(AttrRef, String),
    /// Normalized text equality, or instant equality for timestamps.
    Equals(AttrRef, String),
    /// Calendar year of a timestamp attribute.
    YearEquals(AttrRef, i32),
    /// Document belongs to the category with this label.
    CategoryIs(String),
}

impl Predicate {
    pub fn attr(&self) -> Option<&AttrRef> {
        match self {
            Predicate::ContainsWord(a, _) | Predicate::Equals(a, _) | Predicate::YearEquals(a, _) => Some(a),
            Predicate::CategoryIs(_) => None,
        }
    }
}

fn quote(value: &str) -> String {
    format!("\"{}\"", value.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders in the textual query grammar.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::ContainsWord(a, w) => write!(f, "{a} contains {}", quote(w)),
            Predicate::Equals(a, v) => write!(f, "{a} = {}", quote(v)),
            Predicate::YearEquals(a, y) => write!(f, "{a} year {y}"),
            Predicate::CategoryIs(l) => write!(f, "category = {}", quote(l)),
        }
    }
}

/// Identifies one of the five reference queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryId {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
}

impl QueryId {
    pub const ALL: [QueryId; 5] = [QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4, QueryId::Q5];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryId::Q1 => "Q1",
            QueryId::Q2 => "Q2",
            QueryId::Q3 => "Q3",
            QueryId::Q4 => "Q4",
            QueryId::Q5 => "Q5",
        }
    }

    pub fn two_phase(self) -> bool {
        self == QueryId::Q5
    }

    /// Title contains "factory"; then address "Tourcoing"; then deposit year
    /// 2010; then category book. Q5 reuses Q1's predicate with category
    /// dispatch.
    pub fn predicates(self) -> Vec<Predicate> {
        let title = Predicate::ContainsWord(AttrRef::new(names::SAT_TITLE, "Title"), "factory".into());
        let address = Predicate::Equals(AttrRef::new(names::SAT_LOCATION, "Address"), "Tourcoing".into());
        let year = Predicate::YearEquals(AttrRef::new(names::SAT_DATE, "DepositDate"), 2010);
        let book = Predicate::CategoryIs("book".into());
        match self {
            QueryId::Q1 | QueryId::Q5 => vec![title],
            QueryId::Q2 => vec![title, address],
            QueryId::Q3 => vec![title, address, year],
            QueryId::Q4 => vec![title, address, year, book],
        }
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for QueryId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryId::ALL
            .into_iter()
            .find(|q| q.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown query `{s}` (expected Q1..Q5)"))
    }
}
