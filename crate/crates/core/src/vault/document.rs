//! Flat per-document metadata produced by extraction and consumed by
//! [`Catalog::insert_document`](super::catalog::Catalog::insert_document).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::key::{composite_natural, SourceRef};
use super::value::{AttributeValue, Timestamp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DocumentError {
    #[error("document {0} has no title")]
    MissingTitle(String),
    #[error("document must carry at least one instance source")]
    NoInstances,
    #[error("invalid category label `{0}`")]
    InvalidCategory(String),
}

/// Lower-case source category such as `book` or `inventory`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CategoryLabel(String);

impl CategoryLabel {
    pub const INVENTORY: &'static str = "inventory";
    pub const VOIXDUNORD: &'static str = "voixdunord";
    pub const IRHIS: &'static str = "irhis";
    pub const BOOK: &'static str = "book";

    pub fn new(label: impl Into<String>) -> Result<Self, DocumentError> {
        let label = label.into();
        let ok = !label.is_empty()
            && label.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if ok {
            Ok(CategoryLabel(label))
        } else {
            Err(DocumentError::InvalidCategory(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TitleBlock {
    pub title: String,
    pub authors: Vec<String>,
    pub description: Option<String>,
    pub keywords: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DateBlock {
    pub epoch: Option<String>,
    pub deposit: Option<Timestamp>,
    pub update: Option<Timestamp>,
}

impl DateBlock {
    pub fn is_empty(&self) -> bool {
        self.epoch.is_none() && self.deposit.is_none() && self.update.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocationBlock {
    pub address: String,
    pub additional_info: Option<String>,
    pub reference: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DocumentMetadata {
    /// Identifier of the document within its source (file stem, notice id).
    pub doc_id: String,
    pub title: TitleBlock,
    pub date: DateBlock,
    /// `None` when the document has no address.
    pub location: Option<LocationBlock>,
    pub category: CategoryLabel,
    /// Attributes of the category satellite, keyed by attribute name.
    pub category_attributes: BTreeMap<String, AttributeValue>,
    pub source: SourceRef,
    /// One entry per instance carried by the document; single-instance
    /// documents list their own source.
    pub instances: Vec<SourceRef>,
}

impl DocumentMetadata {
    pub fn validate(&self) -> Result<(), DocumentError> {
        if self.title.title.trim().is_empty() {
            return Err(DocumentError::MissingTitle(self.source.to_string()));
        }
        if self.instances.is_empty() {
            return Err(DocumentError::NoInstances);
        }
        Ok(())
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn title_natural(&self) -> String {
        self.title.title.clone()
    }

    /// `None` when the document has no date information.
    pub fn date_natural(&self) -> Option<String> {
        if self.date.is_empty() {
            return None;
        }
        let day = |ts: Option<Timestamp>| ts.map(|t| t.to_string()).unwrap_or_default();
        let deposit = day(self.date.deposit);
        let update = day(self.date.update);
        Some(composite_natural([self.date.epoch.as_deref().unwrap_or(""), &deposit, &update]))
    }

    pub fn location_natural(&self) -> Option<String> {
        self.location.as_ref().map(|loc| {
            composite_natural([
                loc.address.as_str(),
                loc.additional_info.as_deref().unwrap_or(""),
                loc.reference.as_deref().unwrap_or(""),
            ])
        })
    }

    pub fn category_natural(&self) -> String {
        format!("{}:{}", self.category, self.doc_id)
    }

    pub fn title_attributes(&self) -> Vec<(String, AttributeValue)> {
        let t = &self.title;
        vec![
            ("Title".into(), AttributeValue::text(t.title.trim())),
            ("Authors".into(), AttributeValue::text_list(t.authors.iter().cloned())),
            ("Description".into(), AttributeValue::optional_text(t.description.clone())),
            ("Keywords".into(), AttributeValue::text_list(t.keywords.iter().cloned())),
        ]
    }

    pub fn date_attributes(&self) -> Vec<(String, AttributeValue)> {
        let d = &self.date;
        let ts = |t: Option<Timestamp>| t.map_or(AttributeValue::Absent, AttributeValue::Timestamp);
        vec![
            ("Epoch".into(), AttributeValue::optional_text(d.epoch.clone())),
            ("DepositDate".into(), ts(d.deposit)),
            ("UpdateDate".into(), ts(d.update)),
        ]
    }

    pub fn location_attributes(&self) -> Vec<(String, AttributeValue)> {
        match &self.location {
            None => Vec::new(),
            Some(loc) => vec![
                ("Address".into(), AttributeValue::text(loc.address.clone())),
                ("AdditionalInfo".into(), AttributeValue::optional_text(loc.additional_info.clone())),
                ("Reference".into(), AttributeValue::optional_text(loc.reference.clone())),
            ],
        }
    }
}

/// Category label recorded in a category hub's natural value (`label:doc_id`).
pub fn category_label_of(natural: &str) -> Option<&str> {
    natural.split_once(':').map(|(label, _)| label).filter(|l| !l.is_empty())
}
