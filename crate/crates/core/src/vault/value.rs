//! Attribute values and load instants.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};

/// A UTC instant with millisecond precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_millis(millis: i64) -> Self {
        Timestamp(millis)
    }

    pub const fn as_millis(self) -> i64 {
        self.0
    }

    /// Midnight UTC on the given calendar day.
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)?;
        let dt = date.and_hms_opt(0, 0, 0)?;
        Some(Timestamp(Utc.from_utc_datetime(&dt).timestamp_millis()))
    }

    pub fn year(self) -> i32 {
        self.to_datetime().year()
    }

    pub fn plus_millis(self, millis: i64) -> Self {
        Timestamp(self.0 + millis)
    }

    fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0)
            .single()
            .unwrap_or(DateTime::<Utc>::MIN_UTC)
    }

    /// Parses an RFC 3339 instant; offsets are converted to UTC.
    pub fn parse_rfc3339(text: &str) -> Option<Self> {
        DateTime::parse_from_rfc3339(text.trim())
            .ok()
            .map(|dt| Timestamp(dt.with_timezone(&Utc).timestamp_millis()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_datetime().to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

impl FromStr for Timestamp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(ts) = Timestamp::parse_rfc3339(s) {
            return Ok(ts);
        }
        if let Ok(millis) = s.trim().parse::<i64>() {
            return Ok(Timestamp(millis));
        }
        Err(format!("invalid instant `{s}` (expected RFC 3339 or epoch milliseconds)"))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Declared kind of a satellite attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttrKind {
    Text,
    TextList,
    Timestamp,
}

impl AttrKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttrKind::Text => "text",
            AttrKind::TextList => "text-list",
            AttrKind::Timestamp => "timestamp",
        }
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttrKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(AttrKind::Text),
            "text-list" => Ok(AttrKind::TextList),
            "timestamp" => Ok(AttrKind::Timestamp),
            other => Err(format!("unknown attribute kind `{other}`")),
        }
    }
}

/// A single descriptive value held by a satellite.
///
/// Empty text lists normalize to [`AttributeValue::Absent`]; records never
/// store absent values, they simply omit the attribute.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AttributeValue {
    Text(String),
    TextList(Vec<String>),
    Timestamp(Timestamp),
    Absent,
}

impl AttributeValue {
    pub fn text(value: impl Into<String>) -> Self {
        AttributeValue::Text(value.into())
    }

    pub fn text_list<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            AttributeValue::Absent
        } else {
            AttributeValue::TextList(values)
        }
    }

    pub fn optional_text(value: Option<impl Into<String>>) -> Self {
        value.map_or(AttributeValue::Absent, |v| AttributeValue::Text(v.into()))
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, AttributeValue::Absent)
    }

    pub fn kind(&self) -> Option<AttrKind> {
        match self {
            AttributeValue::Text(_) => Some(AttrKind::Text),
            AttributeValue::TextList(_) => Some(AttrKind::TextList),
            AttributeValue::Timestamp(_) => Some(AttrKind::Timestamp),
            AttributeValue::Absent => None,
        }
    }

    /// Applies the empty-list rule.
    pub fn normalized(self) -> Self {
        match self {
            AttributeValue::TextList(v) if v.is_empty() => AttributeValue::Absent,
            other => other,
        }
    }

    /// Text views of the value: one for text, one per element for lists.
    pub fn texts(&self) -> &[String] {
        match self {
            AttributeValue::Text(t) => std::slice::from_ref(t),
            AttributeValue::TextList(v) => v,
            _ => &[],
        }
    }

    pub fn as_timestamp(&self) -> Option<Timestamp> {
        match self {
            AttributeValue::Timestamp(ts) => Some(*ts),
            _ => None,
        }
    }

    /// JSON rendering used by query output: strings, arrays, RFC 3339 strings.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            AttributeValue::Text(t) => serde_json::Value::String(t.clone()),
            AttributeValue::TextList(v) => {
                serde_json::Value::Array(v.iter().cloned().map(serde_json::Value::String).collect())
            }
            AttributeValue::Timestamp(ts) => serde_json::Value::String(ts.to_string()),
            AttributeValue::Absent => serde_json::Value::Null,
        }
    }
}

impl Serialize for AttributeValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Whitespace-trimmed, whitespace-collapsed, lower-cased form of `text`.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

fn normalized_chars(text: &str) -> impl Iterator<Item = char> + '_ {
    let mut words = text.split_whitespace().peekable();
    std::iter::from_fn(move || {
        let word = words.next()?;
        let sep = words.peek().is_some();
        Some(word.chars().flat_map(char::to_lowercase).chain(sep.then_some(' ')))
    })
    .flatten()
}

/// `normalize_text(a) == normalize_text(b)` without allocating.
pub fn normalized_eq(a: &str, b: &str) -> bool {
    let plain = |s: &str| s.bytes().all(|c| c.is_ascii_graphic());
    if plain(a) && plain(b) {
        return a.eq_ignore_ascii_case(b);
    }
    normalized_chars(a).eq(normalized_chars(b))
}

/// Case-insensitive substring test on normalized text.
pub fn normalized_contains(haystack: &str, needle: &str) -> bool {
    let needle = normalize_text(needle);
    if needle.is_empty() {
        return true;
    }
    normalize_text(haystack).contains(needle.as_str())
}
