//! Attribute predicates evaluated by backend scans.
//!
//! Field names follow the relational column naming: a hub exposes its key
//! column (`Title_id` for `Hub_Title`), its natural-key attribute, `Datetime`
//! and `Source`; a link exposes its id column (`Document_id`), one key column
//! per member hub, `Datetime` and `Source`; a satellite exposes its parent's
//! key column, its declared attributes, `Datetime` and `Source`.

use crate::vault::schema::{EntityDef, VaultSchema};
use crate::vault::value::{normalize_text, normalized_eq, AttrKind, AttributeValue, Timestamp};

use super::StorageError;

pub const DATETIME_FIELD: &str = "Datetime";
pub const SOURCE_FIELD: &str = "Source";

/// `Hub_Title` → `Title_id`, `Link_Document` → `Document_id`.
pub fn key_column(entity: &str) -> String {
    let stem = entity
        .strip_prefix("Hub_")
        .or_else(|| entity.strip_prefix("Link_"))
        .unwrap_or(entity);
    format!("{stem}_id")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldOp {
    /// Case-insensitive substring on normalized text (any element of a list).
    Contains(String),
    /// Normalized equality for text; instant equality for timestamps.
    Equals(String),
    /// Calendar year of a timestamp.
    YearEquals(i32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldPredicate {
    pub field: String,
    pub op: FieldOp,
}

impl FieldPredicate {
    pub fn new(field: impl Into<String>, op: FieldOp) -> Self {
        FieldPredicate { field: field.into(), op }
    }

    pub fn matches(&self, value: Option<&AttributeValue>) -> bool {
        evaluate(&self.op, value)
    }
}

/// A [`FieldOp`] with its operand normalized or parsed once, for scans that
/// evaluate it against many borrowed values.
#[derive(Clone, Debug)]
pub enum Matcher {
    Contains(String),
    Equals { text: String, instant: Option<Timestamp> },
    Year(i32),
}

impl Matcher {
    pub fn new(op: &FieldOp) -> Self {
        match op {
            FieldOp::Contains(word) => Matcher::Contains(normalize_text(word)),
            FieldOp::Equals(text) => Matcher::Equals { text: text.clone(), instant: parse_instant(text) },
            FieldOp::YearEquals(year) => Matcher::Year(*year),
        }
    }

    pub fn text(&self, value: &str) -> bool {
        match self {
            Matcher::Contains(word) => word.is_empty() || normalize_text(value).contains(word.as_str()),
            Matcher::Equals { text, .. } => normalized_eq(value, text),
            Matcher::Year(_) => false,
        }
    }

    pub fn instant(&self, value: Timestamp) -> bool {
        match self {
            Matcher::Contains(_) => false,
            Matcher::Equals { instant, .. } => *instant == Some(value),
            Matcher::Year(year) => value.year() == *year,
        }
    }

    pub fn value(&self, value: Option<&AttributeValue>) -> bool {
        match value {
            None => false,
            Some(AttributeValue::Timestamp(ts)) => self.instant(*ts),
            Some(v) => v.texts().iter().any(|t| self.text(t)),
        }
    }
}

/// Conjunction of predicates over one entity. An empty conjunction matches
/// every record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityFilter {
    pub entity: String,
    pub predicates: Vec<FieldPredicate>,
}

impl EntityFilter {
    pub fn all(entity: impl Into<String>) -> Self {
        EntityFilter { entity: entity.into(), predicates: Vec::new() }
    }

    pub fn with(mut self, field: impl Into<String>, op: FieldOp) -> Self {
        self.predicates.push(FieldPredicate::new(field, op));
        self
    }

    /// Checks that the entity and every referenced field exist.
    pub fn validate(&self, schema: &VaultSchema) -> Result<(), StorageError> {
        let fields = entity_fields(schema, &self.entity)?;
        for p in &self.predicates {
            if !fields.iter().any(|(name, _)| *name == p.field) {
                return Err(StorageError::UnknownAttribute { entity: self.entity.clone(), attribute: p.field.clone() });
            }
        }
        Ok(())
    }
}

/// Field names and kinds exposed by `entity`, in column order.
pub fn entity_fields(schema: &VaultSchema, entity: &str) -> Result<Vec<(String, AttrKind)>, StorageError> {
    let def = schema.entity(entity).ok_or_else(|| StorageError::UnknownEntity(entity.to_owned()))?;
    let mut fields = Vec::new();
    match def {
        EntityDef::Hub(h) => {
            fields.push((key_column(&h.name), AttrKind::Text));
            fields.push((h.key_source.clone(), AttrKind::Text));
        }
        EntityDef::Link(l) => {
            fields.push((key_column(&l.name), AttrKind::Text));
            fields.extend(l.members.iter().map(|m| (key_column(m), AttrKind::Text)));
        }
        EntityDef::Satellite(s) => {
            fields.push((key_column(&s.parent), AttrKind::Text));
            fields.extend(s.attributes.iter().map(|a| (a.name.clone(), a.kind)));
        }
    }
    fields.push((DATETIME_FIELD.to_owned(), AttrKind::Timestamp));
    fields.push((SOURCE_FIELD.to_owned(), AttrKind::Text));
    Ok(fields)
}

/// Parses `YYYY-MM-DD`, a bare year, or RFC 3339 into an instant.
pub fn parse_instant(text: &str) -> Option<Timestamp> {
    let t = text.trim();
    if let Some(ts) = Timestamp::parse_rfc3339(t) {
        return Some(ts);
    }
    let mut parts = t.splitn(3, '-');
    let year: i32 = parts.next()?.parse().ok()?;
    let month: u32 = parts.next().map_or(Some(1), |m| m.parse().ok())?;
    let day: u32 = parts.next().map_or(Some(1), |d| d.parse().ok())?;
    Timestamp::from_ymd(year, month, day)
}

pub fn evaluate(op: &FieldOp, value: Option<&AttributeValue>) -> bool {
    Matcher::new(op).value(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vault::schema::define_schema_tectoniq;

    #[test]
    fn key_columns_follow_relational_naming() {
        assert_eq!(key_column("Hub_Title"), "Title_id");
        assert_eq!(key_column("Link_Document"), "Document_id");
        assert_eq!(key_column("Other"), "Other_id");
    }

    #[test]
    fn fields_of_satellite() {
        let schema = define_schema_tectoniq();
        let names: Vec<_> = entity_fields(&schema, "Sat_Book").unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["Category_id", "Rights", "Publisher", "Datetime", "Source"]);
        let link: Vec<_> = entity_fields(&schema, "Link_Document").unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(link, ["Document_id", "Title_id", "Location_id", "Date_id", "Category_id", "Datetime", "Source"]);
    }

    #[test]
    fn validation() {
        let schema = define_schema_tectoniq();
        EntityFilter::all("Sat_Title").with("Title", FieldOp::Contains("x".into())).validate(&schema).unwrap();
        assert!(matches!(
            EntityFilter::all("Sat_Title").with("Nope", FieldOp::Contains("x".into())).validate(&schema),
            Err(StorageError::UnknownAttribute { .. })
        ));
        assert!(matches!(EntityFilter::all("Sat_Nope").validate(&schema), Err(StorageError::UnknownEntity(_))));
    }

    #[test]
    fn predicate_semantics() {
        let title = AttributeValue::text("Ancienne FACTORY  Motte-Bossut");
        assert!(evaluate(&FieldOp::Contains("factory".into()), Some(&title)));
        assert!(!evaluate(&FieldOp::Contains("usine".into()), Some(&title)));
        assert!(!evaluate(&FieldOp::Contains("factory".into()), None));

        let authors = AttributeValue::text_list(["Petit, Jules", "Chambre de commerce"]);
        assert!(evaluate(&FieldOp::Contains("jules".into()), Some(&authors)));
        assert!(evaluate(&FieldOp::Equals("chambre de COMMERCE".into()), Some(&authors)));

        let addr = AttributeValue::text(" Tourcoing ");
        assert!(evaluate(&FieldOp::Equals("tourcoing".into()), Some(&addr)));
        assert!(!evaluate(&FieldOp::Equals("Tourcoing Nord".into()), Some(&addr)));

        let date = AttributeValue::Timestamp(Timestamp::from_ymd(2010, 6, 1).unwrap());
        assert!(evaluate(&FieldOp::YearEquals(2010), Some(&date)));
        assert!(!evaluate(&FieldOp::YearEquals(2011), Some(&date)));
        assert!(evaluate(&FieldOp::Equals("2010-06-01".into()), Some(&date)));
        assert!(!evaluate(&FieldOp::YearEquals(2010), Some(&addr)));
    }

    #[test]
    fn instants() {
        assert_eq!(parse_instant("2008"), Timestamp::from_ymd(2008, 1, 1));
        assert_eq!(parse_instant("2008-05"), Timestamp::from_ymd(2008, 5, 1));
        assert_eq!(parse_instant("2008-05-07"), Timestamp::from_ymd(2008, 5, 7));
        assert_eq!(parse_instant("[2008]"), None);
        assert_eq!(parse_instant("2008-13-01"), None);
    }
}
