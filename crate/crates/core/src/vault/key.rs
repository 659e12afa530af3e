//! Business keys, link surrogate ids and source references.
//!
//! A business key is derived from a hub's natural value: the value is
//! normalized (trim, collapse internal whitespace, lower-case) and hashed
//! with SHA-256; the key is the first 16 digest bytes as 32 lowercase hex
//! digits. Composite natural values join their parts with `" | "` before
//! normalization.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::schema::HubDef;
use super::value::normalize_text;

const KEY_BYTES: usize = 16;
const UNKNOWN_KEY: &str = "unknown";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("missing key attribute `{attribute}` for hub {hub}")]
    MissingKeyAttribute { hub: String, attribute: String },
    #[error("source reference must not be empty")]
    EmptySource,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusinessKey(String);

impl BusinessKey {
    /// Key of the designated per-hub record standing in for a missing value.
    pub fn unknown() -> Self {
        BusinessKey(UNKNOWN_KEY.to_owned())
    }

    pub fn is_unknown(&self) -> bool {
        self.0 == UNKNOWN_KEY
    }

    /// Wraps an already-derived key (decoding from storage, parsing input).
    pub fn from_raw(raw: impl Into<String>) -> Self {
        BusinessKey(raw.into())
    }

    /// Parent key used by satellites attached to a link.
    pub fn for_link(id: LinkId) -> Self {
        BusinessKey(format!("link-{}", id.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BusinessKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Derives the business key for `natural_value` in `hub`.
pub fn make_business_key(hub: &HubDef, natural_value: &str) -> Result<BusinessKey, KeyError> {
    let normalized = normalize_text(natural_value);
    if normalized.is_empty() {
        return Err(KeyError::MissingKeyAttribute {
            hub: hub.name.clone(),
            attribute: hub.key_source.clone(),
        });
    }
    let digest = Sha256::digest(normalized.as_bytes());
    Ok(BusinessKey(hex::encode(&digest[..KEY_BYTES])))
}

/// Joins the parts of a composite natural value.
pub fn composite_natural<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    parts.into_iter().collect::<Vec<_>>().join(" | ")
}

/// Surrogate identifier of a link record, assigned in insertion order from 1.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LinkId(pub u64);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Locates a physical file (or a fragment of one) in the lake.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceRef(String);

impl SourceRef {
    pub fn new(uri: impl Into<String>) -> Result<Self, KeyError> {
        let uri = uri.into();
        if uri.trim().is_empty() {
            return Err(KeyError::EmptySource);
        }
        Ok(SourceRef(uri))
    }

    pub fn uri(&self) -> &str {
        &self.0
    }

    /// `uri#fragment`, used for instances embedded in one file.
    pub fn with_fragment(&self, fragment: &str) -> SourceRef {
        SourceRef(format!("{}#{}", self.0, fragment))
    }
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn title_hub() -> HubDef {
        HubDef::new("Hub_Title", "Title")
    }

    #[test]
    fn keys_are_deterministic() {
        let hub = title_hub();
        let text = "Projet de chemin de fer de Calais a Marseille rapport fait a la Chambre de commerce de Boulogne, le 25 novembre 1881";
        let k1 = make_business_key(&hub, text).unwrap();
        let k2 = make_business_key(&hub, text).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(k1.as_str().len(), 32);
        assert!(k1.as_str().bytes().all(|b| b.is_ascii_hexdigit()));
    }

    #[test]
    fn normalization_collapses_case_and_space() {
        let hub = title_hub();
        assert_eq!(
            make_business_key(&hub, "  Factory   A ").unwrap(),
            make_business_key(&hub, "factory a").unwrap()
        );
        assert_ne!(
            make_business_key(&hub, "factory a").unwrap(),
            make_business_key(&hub, "factory b").unwrap()
        );
    }

    #[test]
    fn known_digest() {
        // sha256("factory a") truncated to 16 bytes.
        let key = make_business_key(&title_hub(), "Factory A").unwrap();
        let full = hex::encode(Sha256::digest(b"factory a"));
        assert_eq!(key.as_str(), &full[..32]);
    }

    #[test]
    fn empty_natural_value_rejected() {
        let err = make_business_key(&title_hub(), " \t ").unwrap_err();
        assert_eq!(
            err,
            KeyError::MissingKeyAttribute { hub: "Hub_Title".into(), attribute: "Title".into() }
        );
        assert_eq!(err.to_string(), "missing key attribute `Title` for hub Hub_Title");
    }

    #[test]
    fn unknown_key_never_collides_with_hashes() {
        assert!(BusinessKey::unknown().is_unknown());
        let k = make_business_key(&title_hub(), "unknown").unwrap();
        assert!(!k.is_unknown());
    }

    #[test]
    fn source_ref_rules() {
        assert_eq!(SourceRef::new("  "), Err(KeyError::EmptySource));
        let s = SourceRef::new("voixdunord/dossier.xml").unwrap();
        assert_eq!(s.with_fragment("article-3").uri(), "voixdunord/dossier.xml#article-3");
    }
}
