//! Versioned text form of a [`VaultSchema`].
//!
//! ```text
//! # metavault vault schema
//! format 1
//! version 2
//! hub Hub_Title key=Title since=1
//! link Link_Document members=Hub_Title,Hub_Location since=1
//! satellite Sat_Title parent=Hub_Title since=1
//!   attr Title text
//!   attr Authors text-list
//! dispatch book Sat_Book since=1
//! ```
//!
//! Lines appear in a fixed order (hubs, links, satellites with their
//! attributes, dispatch entries), each group in definition order, so two
//! exports of successive versions diff as pure additions.

use std::collections::BTreeMap;

use thiserror::Error;

use super::schema::{AttributeDef, HubDef, LinkDef, SatelliteDef, SchemaError, VaultSchema, Versioned};

pub const FORMAT_VERSION: u32 = 1;
const HEADER: &str = "# metavault vault schema";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaTextError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid schema: {0}")]
    Invalid(#[from] SchemaError),
}

pub fn export_schema(schema: &VaultSchema) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("format {FORMAT_VERSION}\n"));
    out.push_str(&format!("version {}\n", schema.version()));
    for v in schema.versioned_hubs() {
        out.push_str(&format!("hub {} key={} since={}\n", v.def.name, v.def.key_source, v.since));
    }
    for v in schema.versioned_links() {
        out.push_str(&format!("link {} members={} since={}\n", v.def.name, v.def.members.join(","), v.since));
    }
    for v in schema.versioned_satellites() {
        out.push_str(&format!("satellite {} parent={} since={}\n", v.def.name, v.def.parent, v.since));
        for attr in &v.def.attributes {
            out.push_str(&format!("  attr {} {}\n", attr.name, attr.kind));
        }
    }
    for (label, v) in schema.versioned_dispatch() {
        out.push_str(&format!("dispatch {} {} since={}\n", label, v.def, v.since));
    }
    out
}

struct Fields<'a> {
    line: usize,
    positional: Vec<&'a str>,
    named: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn parse(line: usize, tokens: &[&'a str]) -> Self {
        let mut positional = Vec::new();
        let mut named = BTreeMap::new();
        for tok in tokens {
            match tok.split_once('=') {
                Some((k, v)) => {
                    named.insert(k, v);
                }
                None => positional.push(*tok),
            }
        }
        Fields { line, positional, named }
    }

    fn err(&self, message: impl Into<String>) -> SchemaTextError {
        SchemaTextError::Syntax { line: self.line, message: message.into() }
    }

    fn pos(&self, idx: usize, what: &str) -> Result<&'a str, SchemaTextError> {
        self.positional.get(idx).copied().ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn named(&self, key: &str) -> Result<&'a str, SchemaTextError> {
        self.named.get(key).copied().ok_or_else(|| self.err(format!("missing `{key}=`")))
    }

    fn since(&self, version: u32) -> Result<u32, SchemaTextError> {
        let since: u32 = self.named("since")?.parse().map_err(|_| self.err("`since` must be an integer"))?;
        if since == 0 || since > version {
            return Err(self.err(format!("`since={since}` outside 1..={version}")));
        }
        Ok(since)
    }
}

pub fn import_schema(text: &str) -> Result<VaultSchema, SchemaTextError> {
    let mut version: Option<u32> = None;
    let mut format_seen = false;
    let mut hubs = Vec::new();
    let mut links = Vec::new();
    let mut satellites: Vec<Versioned<SatelliteDef>> = Vec::new();
    let mut dispatch = BTreeMap::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let fields = Fields::parse(line, &tokens[1..]);
        let need_version = |v: Option<u32>| v.ok_or_else(|| fields.err("`version` must precede definitions"));
        match tokens[0] {
            "format" => {
                let f: u32 = fields.pos(0, "format number")?.parse().map_err(|_| fields.err("bad format number"))?;
                if f != FORMAT_VERSION {
                    return Err(fields.err(format!("unsupported format {f}")));
                }
                format_seen = true;
            }
            "version" => {
                if !format_seen {
                    return Err(fields.err("`format` must come first"));
                }
                version = Some(fields.pos(0, "version")?.parse().map_err(|_| fields.err("bad version number"))?);
            }
            "hub" => {
                let v = need_version(version)?;
                let def = HubDef::new(fields.pos(0, "hub name")?, fields.named("key")?);
                hubs.push(Versioned { def, since: fields.since(v)? });
            }
            "link" => {
                let v = need_version(version)?;
                let members = fields.named("members")?.split(',').filter(|m| !m.is_empty());
                let def = LinkDef::new(fields.pos(0, "link name")?, members);
                links.push(Versioned { def, since: fields.since(v)? });
            }
            "satellite" => {
                let v = need_version(version)?;
                let def = SatelliteDef {
                    name: fields.pos(0, "satellite name")?.to_owned(),
                    parent: fields.named("parent")?.to_owned(),
                    attributes: Vec::new(),
                };
                satellites.push(Versioned { def, since: fields.since(v)? });
            }
            "attr" => {
                let sat = satellites.last_mut().ok_or_else(|| fields.err("`attr` outside a satellite"))?;
                let kind = fields.pos(1, "attribute kind")?.parse().map_err(|e: String| fields.err(e))?;
                sat.def.attributes.push(AttributeDef { name: fields.pos(0, "attribute name")?.to_owned(), kind });
            }
            "dispatch" => {
                let v = need_version(version)?;
                let label = fields.pos(0, "category label")?;
                let sat = fields.pos(1, "satellite name")?;
                if dispatch.insert(label.to_owned(), Versioned { def: sat.to_owned(), since: fields.since(v)? }).is_some() {
                    return Err(fields.err(format!("category `{label}` dispatched twice")));
                }
            }
            other => return Err(fields.err(format!("unknown directive `{other}`"))),
        }
    }

    let version = version.ok_or(SchemaTextError::Syntax { line: last_line, message: "missing `version`".into() })?;
    let schema = VaultSchema::from_parts(version, hubs, links, satellites, dispatch);
    schema.validate()?;
    Ok(schema)
}
