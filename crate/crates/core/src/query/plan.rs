//! Planning: predicates → join legs through the document link.

use thiserror::Error;

use crate::storage::filter::{FieldOp, FieldPredicate};
use crate::vault::catalog::AsOf;
use crate::vault::schema::{names, VaultSchema};

use super::predicate::{AttrRef, Predicate};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("a query needs at least one predicate")]
    Empty,
    #[error("unknown satellite `{0}`")]
    UnknownSatellite(String),
    #[error("{0} has no attribute `{1}`")]
    UnknownAttribute(String, String),
    #[error("{attr} is a {kind} attribute; `{op}` does not apply")]
    KindMismatch { attr: AttrRef, kind: &'static str, op: &'static str },
    #[error("{satellite} hangs off {parent}, which is not a member of {link}")]
    NotJoinable { satellite: String, parent: String, link: String },
    #[error("category `{0}` has no registered satellite")]
    UnregisteredCategory(String),
    #[error("two-phase queries take predicates on the title leg only, found {0}")]
    TwoPhaseLeg(String),
    #[error("schema lacks entity {0}")]
    MissingEntity(&'static str),
}

/// One hub joined through the link together with one of its satellites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    pub hub: String,
    pub satellite: String,
    /// Filters on the satellite's current version.
    pub filters: Vec<FieldPredicate>,
    /// Required category label, checked on the hub's natural value.
    pub category: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub schema_version: u32,
    pub link: String,
    /// The first leg is the anchor, scanned in full.
    pub legs: Vec<Leg>,
    pub two_phase: bool,
    pub as_of: AsOf,
    pub predicates: Vec<Predicate>,
}

impl QueryPlan {
    /// Entities the query reads. A single-leg query names only its hub and
    /// satellite; joins list the link too. Two-phase plans list the category
    /// hub and every satellite the dispatch table may route to.
    pub fn data_sources(&self, schema: &VaultSchema) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |name: &str| {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_owned());
            }
        };
        for leg in &self.legs {
            push(&leg.hub);
            push(&leg.satellite);
        }
        if self.two_phase {
            push(names::HUB_CATEGORY);
            for (_, sat) in schema.dispatch_entries() {
                push(sat);
            }
        }
        if self.legs.len() > 1 || self.two_phase {
            push(&self.link);
        }
        out
    }
}

fn op_for(schema: &VaultSchema, p: &Predicate, attr: &AttrRef) -> Result<FieldOp, PlanError> {
    let sat = schema.satellite(&attr.entity).ok_or_else(|| PlanError::UnknownSatellite(attr.entity.clone()))?;
    let def = sat
        .attribute(&attr.attribute)
        .ok_or_else(|| PlanError::UnknownAttribute(attr.entity.clone(), attr.attribute.clone()))?;
    let is_time = def.kind == crate::vault::value::AttrKind::Timestamp;
    let mismatch = |op| PlanError::KindMismatch { attr: attr.clone(), kind: def.kind.as_str(), op };
    Ok(match p {
        Predicate::ContainsWord(_, w) if !is_time => FieldOp::Contains(w.clone()),
        Predicate::ContainsWord(..) => return Err(mismatch("contains")),
        Predicate::Equals(_, v) => FieldOp::Equals(v.clone()),
        Predicate::YearEquals(_, y) if is_time => FieldOp::YearEquals(*y),
        Predicate::YearEquals(..) => return Err(mismatch("year")),
        Predicate::CategoryIs(_) => unreachable!("category predicates carry no attribute"),
    })
}

pub fn plan(schema: &VaultSchema, predicates: &[Predicate], two_phase: bool) -> Result<QueryPlan, PlanError> {
    plan_as_of(schema, predicates, two_phase, AsOf::Latest)
}

pub fn plan_as_of(schema: &VaultSchema, predicates: &[Predicate], two_phase: bool, as_of: AsOf) -> Result<QueryPlan, PlanError> {
    if predicates.is_empty() {
        return Err(PlanError::Empty);
    }
    let link = schema.link(names::LINK_DOCUMENT).ok_or(PlanError::MissingEntity(names::LINK_DOCUMENT))?;
    if two_phase && schema.hub(names::HUB_CATEGORY).is_none() {
        return Err(PlanError::MissingEntity(names::HUB_CATEGORY));
    }
    let mut legs: Vec<Leg> = Vec::new();
    for p in predicates {
        let (satellite, filter, category) = match p {
            Predicate::CategoryIs(label) => {
                let sat = schema.dispatch(label).ok_or_else(|| PlanError::UnregisteredCategory(label.clone()))?;
                (sat.to_owned(), None, Some(label.clone()))
            }
            _ => {
                let attr = p.attr().expect("attribute predicate");
                let op = op_for(schema, p, attr)?;
                (attr.entity.clone(), Some(FieldPredicate::new(attr.attribute.clone(), op)), None)
            }
        };
        let parent = schema.satellite(&satellite).ok_or_else(|| PlanError::UnknownSatellite(satellite.clone()))?.parent.clone();
        if !link.members.contains(&parent) {
            return Err(PlanError::NotJoinable { satellite, parent, link: link.name.clone() });
        }
        if two_phase && parent == names::HUB_CATEGORY {
            return Err(PlanError::TwoPhaseLeg(satellite));
        }
        let leg = match legs.iter_mut().position(|l| l.satellite == satellite) {
            Some(i) => &mut legs[i],
            None => {
                legs.push(Leg { hub: parent, satellite, filters: Vec::new(), category: None });
                legs.last_mut().expect("just pushed")
            }
        };
        leg.filters.extend(filter);
        if category.is_some() {
            leg.category = category;
        }
    }
    Ok(QueryPlan {
        schema_version: schema.version(),
        link: link.name.clone(),
        legs,
        two_phase,
        as_of,
        predicates: predicates.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::predicate::QueryId;
    use crate::vault::schema::define_schema_tectoniq;

    #[test]
    fn data_source_counts() {
        let schema = define_schema_tectoniq();
        let counts: Vec<usize> = QueryId::ALL
            .iter()
            .map(|q| plan(&schema, &q.predicates(), q.two_phase()).unwrap().data_sources(&schema).len())
            .collect();
        // Q5: Hub_Title, Sat_Title, Hub_Category, four category satellites, link.
        assert_eq!(counts, [2, 5, 7, 9, 8]);
        let q1 = plan(&schema, &QueryId::Q1.predicates(), false).unwrap();
        assert_eq!(q1.data_sources(&schema), ["Hub_Title", "Sat_Title"]);
    }

    #[test]
    fn rejections() {
        let schema = define_schema_tectoniq();
        assert_eq!(plan(&schema, &[], false), Err(PlanError::Empty));
        let bad = Predicate::ContainsWord(AttrRef::new("Sat_Title", "Colour"), "x".into());
        assert!(matches!(plan(&schema, &[bad], false), Err(PlanError::UnknownAttribute(..))));
        let year_on_text = Predicate::YearEquals(AttrRef::new("Sat_Title", "Title"), 2010);
        assert!(matches!(plan(&schema, &[year_on_text], false), Err(PlanError::KindMismatch { .. })));
        let video = Predicate::CategoryIs("video".into());
        assert_eq!(plan(&schema, &[video], false), Err(PlanError::UnregisteredCategory("video".into())));
    }

    #[test]
    fn predicates_on_one_satellite_share_a_leg() {
        let schema = define_schema_tectoniq();
        let preds = [
            Predicate::ContainsWord(AttrRef::new("Sat_Title", "Title"), "a".into()),
            Predicate::ContainsWord(AttrRef::new("Sat_Title", "Keywords"), "b".into()),
        ];
        let p = plan(&schema, &preds, false).unwrap();
        assert_eq!(p.legs.len(), 1);
        assert_eq!(p.legs[0].filters.len(), 2);
    }
}
