//! Dublin Core sidecar records.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::vault::value::AttributeValue;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DcError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("a DC record must be a JSON object")]
    NotAnObject,
    #[error("element `{0}` is not prefix-qualified (expected e.g. dc:title)")]
    Unqualified(String),
    #[error("element `{0}` must be a string or a list of strings")]
    BadValue(String),
}

/// Element name (lowercase, `prefix:name`) → value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DcRecord {
    elements: BTreeMap<String, AttributeValue>,
}

impl DcRecord {
    pub fn parse(text: &str) -> Result<Self, DcError> {
        let value: Value = serde_json::from_str(text).map_err(|e| DcError::Json(e.to_string()))?;
        DcRecord::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self, DcError> {
        let object = value.as_object().ok_or(DcError::NotAnObject)?;
        let mut elements = BTreeMap::new();
        for (name, v) in object {
            let key = name.trim().to_lowercase();
            if !key.split_once(':').is_some_and(|(p, n)| !p.is_empty() && !n.is_empty()) {
                return Err(DcError::Unqualified(name.clone()));
            }
            let value = match v {
                Value::String(s) => AttributeValue::text(s.clone()),
                Value::Array(items) => AttributeValue::text_list(
                    items
                        .iter()
                        .map(|i| i.as_str().map(str::to_owned).ok_or_else(|| DcError::BadValue(name.clone())))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                Value::Null => AttributeValue::Absent,
                _ => return Err(DcError::BadValue(name.clone())),
            };
            if !value.is_absent() {
                elements.insert(key, value);
            }
        }
        Ok(DcRecord { elements })
    }

    pub fn get(&self, element: &str) -> Option<&AttributeValue> {
        self.elements.get(element)
    }

    /// Single text value; list values are joined with `"; "`. Blank → `None`.
    pub fn text(&self, element: &str) -> Option<String> {
        let joined = self.get(element)?.texts().join("; ");
        let trimmed = joined.trim();
        (!trimmed.is_empty()).then(|| trimmed.to_owned())
    }

    /// Every value as a list of trimmed, non-empty strings.
    pub fn list(&self, element: &str) -> Vec<String> {
        self.get(element)
            .map(|v| v.texts().iter().map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    pub fn elements(&self) -> impl Iterator<Item = (&str, &AttributeValue)> {
        self.elements.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Splits a delimited subject string on commas and periods.
pub fn split_keywords(values: &[String]) -> Vec<String> {
    values
        .iter()
        .flat_map(|v| v.split([',', '.']))
        .map(|s| s.trim().to_owned())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_lowercased_and_lists_kept() {
        let r = DcRecord::parse(r#"{"DC:Title": " T ", "dc:creator": ["a", "b"], "dc:type": null}"#).unwrap();
        assert_eq!(r.text("dc:title").as_deref(), Some("T"));
        assert_eq!(r.list("dc:creator"), ["a", "b"]);
        assert_eq!(r.text("dc:creator").as_deref(), Some("a; b"));
        assert!(r.get("dc:type").is_none());
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(DcRecord::parse("[1]"), Err(DcError::NotAnObject));
        assert_eq!(DcRecord::parse(r#"{"title": "x"}"#), Err(DcError::Unqualified("title".into())));
        assert_eq!(DcRecord::parse(r#"{"dc:x": 3}"#), Err(DcError::BadValue("dc:x".into())));
    }

    #[test]
    fn subject_splitting() {
        let k = split_keywords(&["Calais-Marseille, Chemin de fer (France).".into()]);
        assert_eq!(k, ["Calais-Marseille", "Chemin de fer (France)"]);
    }
}
