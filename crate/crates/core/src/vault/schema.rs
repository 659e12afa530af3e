//! Hub, link and satellite definitions and their additive evolution.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::value::AttrKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("`{0}` is already defined")]
    Duplicate(String),
    #[error("{owner} references unknown entity `{target}`")]
    UnknownReference { owner: String, target: String },
    #[error("link {link} names hub `{hub}` more than once")]
    DuplicateMember { link: String, hub: String },
    #[error("link {0} needs at least two member hubs")]
    TooFewMembers(String),
    #[error("satellite {satellite} declares attribute `{attribute}` twice")]
    DuplicateAttribute { satellite: String, attribute: String },
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("category `{0}` is already dispatched")]
    DuplicateCategory(String),
    #[error("schema version {new} is not an additive evolution of version {old}")]
    NotAdditive { old: u32, new: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HubDef {
    pub name: String,
    /// Name of the natural-key attribute the business key derives from.
    pub key_source: String,
}

impl HubDef {
    pub fn new(name: impl Into<String>, key_source: impl Into<String>) -> Self {
        HubDef { name: name.into(), key_source: key_source.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDef {
    pub name: String,
    pub members: Vec<String>,
}

impl LinkDef {
    pub fn new<I, S>(name: impl Into<String>, members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LinkDef { name: name.into(), members: members.into_iter().map(Into::into).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub kind: AttrKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatelliteDef {
    pub name: String,
    pub parent: String,
    pub attributes: Vec<AttributeDef>,
}

impl SatelliteDef {
    pub fn new<I, S>(name: impl Into<String>, parent: impl Into<String>, attributes: I) -> Self
    where
        I: IntoIterator<Item = (S, AttrKind)>,
        S: Into<String>,
    {
        SatelliteDef {
            name: name.into(),
            parent: parent.into(),
            attributes: attributes
                .into_iter()
                .map(|(name, kind)| AttributeDef { name: name.into(), kind })
                .collect(),
        }
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// A definition tagged with the schema version that introduced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Versioned<T> {
    pub def: T,
    pub since: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityKind {
    Hub,
    Link,
    Satellite,
}

/// Borrowed view of any definition in a schema.
#[derive(Clone, Copy, Debug)]
pub enum EntityDef<'a> {
    Hub(&'a HubDef),
    Link(&'a LinkDef),
    Satellite(&'a SatelliteDef),
}

impl EntityDef<'_> {
    pub fn kind(&self) -> EntityKind {
        match self {
            EntityDef::Hub(_) => EntityKind::Hub,
            EntityDef::Link(_) => EntityKind::Link,
            EntityDef::Satellite(_) => EntityKind::Satellite,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            EntityDef::Hub(h) => &h.name,
            EntityDef::Link(l) => &l.name,
            EntityDef::Satellite(s) => &s.name,
        }
    }
}

/// The catalog shape. Versions only grow; definitions are never removed or
/// changed once added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VaultSchema {
    version: u32,
    hubs: Vec<Versioned<HubDef>>,
    links: Vec<Versioned<LinkDef>>,
    satellites: Vec<Versioned<SatelliteDef>>,
    dispatch: BTreeMap<String, Versioned<String>>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Attribute names that would shadow the universal `Datetime`/`Source`
/// fields or a key column.
fn reserved_attribute(name: &str) -> bool {
    name == "Datetime" || name == "Source" || name.ends_with("_id")
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl VaultSchema {
    /// An empty version-0 schema; every `evolve_*` call bumps the version.
    pub fn empty() -> Self {
        VaultSchema {
            version: 0,
            hubs: Vec::new(),
            links: Vec::new(),
            satellites: Vec::new(),
            dispatch: BTreeMap::new(),
        }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn hubs(&self) -> impl Iterator<Item = &HubDef> {
        self.hubs.iter().map(|v| &v.def)
    }

    pub fn links(&self) -> impl Iterator<Item = &LinkDef> {
        self.links.iter().map(|v| &v.def)
    }

    pub fn satellites(&self) -> impl Iterator<Item = &SatelliteDef> {
        self.satellites.iter().map(|v| &v.def)
    }

    pub(crate) fn versioned_hubs(&self) -> &[Versioned<HubDef>] {
        &self.hubs
    }

    pub(crate) fn versioned_links(&self) -> &[Versioned<LinkDef>] {
        &self.links
    }

    pub(crate) fn versioned_satellites(&self) -> &[Versioned<SatelliteDef>] {
        &self.satellites
    }

    pub(crate) fn versioned_dispatch(&self) -> &BTreeMap<String, Versioned<String>> {
        &self.dispatch
    }

    pub fn hub(&self, name: &str) -> Option<&HubDef> {
        self.hubs().find(|h| h.name == name)
    }

    pub fn link(&self, name: &str) -> Option<&LinkDef> {
        self.links().find(|l| l.name == name)
    }

    pub fn satellite(&self, name: &str) -> Option<&SatelliteDef> {
        self.satellites().find(|s| s.name == name)
    }

    pub fn entity(&self, name: &str) -> Option<EntityDef<'_>> {
        self.hub(name)
            .map(EntityDef::Hub)
            .or_else(|| self.link(name).map(EntityDef::Link))
            .or_else(|| self.satellite(name).map(EntityDef::Satellite))
    }

    /// Entity names in definition order: hubs, links, satellites.
    pub fn entity_names(&self) -> Vec<&str> {
        self.hubs()
            .map(|h| h.name.as_str())
            .chain(self.links().map(|l| l.name.as_str()))
            .chain(self.satellites().map(|s| s.name.as_str()))
            .collect()
    }

    pub fn satellites_of<'a>(&'a self, parent: &'a str) -> impl Iterator<Item = &'a SatelliteDef> + 'a {
        self.satellites().filter(move |s| s.parent == parent)
    }

    /// Category label → category satellite table.
    pub fn dispatch(&self, label: &str) -> Option<&str> {
        self.dispatch.get(label).map(|v| v.def.as_str())
    }

    pub fn dispatch_entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.dispatch.iter().map(|(k, v)| (k.as_str(), v.def.as_str()))
    }

    fn name_taken(&self, name: &str) -> bool {
        self.entity(name).is_some()
    }

    fn check_new_name(&self, name: &str) -> Result<(), SchemaError> {
        if !valid_name(name) {
            return Err(SchemaError::InvalidName(name.to_owned()));
        }
        if self.name_taken(name) {
            return Err(SchemaError::Duplicate(name.to_owned()));
        }
        Ok(())
    }

    pub fn evolve_add_hub(&self, def: HubDef) -> Result<VaultSchema, SchemaError> {
        self.check_new_name(&def.name)?;
        if !valid_name(&def.key_source) || reserved_attribute(&def.key_source) {
            return Err(SchemaError::InvalidName(def.key_source));
        }
        let mut next = self.clone();
        next.version += 1;
        next.hubs.push(Versioned { def, since: next.version });
        Ok(next)
    }

    pub fn evolve_add_link(&self, def: LinkDef) -> Result<VaultSchema, SchemaError> {
        self.check_new_name(&def.name)?;
        if def.members.len() < 2 {
            return Err(SchemaError::TooFewMembers(def.name));
        }
        let mut seen = HashSet::new();
        for member in &def.members {
            if !seen.insert(member.as_str()) {
                return Err(SchemaError::DuplicateMember { link: def.name.clone(), hub: member.clone() });
            }
            if self.hub(member).is_none() {
                return Err(SchemaError::UnknownReference { owner: def.name.clone(), target: member.clone() });
            }
        }
        let mut next = self.clone();
        next.version += 1;
        next.links.push(Versioned { def, since: next.version });
        Ok(next)
    }

    pub fn evolve_add_satellite(&self, def: SatelliteDef) -> Result<VaultSchema, SchemaError> {
        self.check_new_name(&def.name)?;
        match self.entity(&def.parent) {
            Some(EntityDef::Hub(_)) | Some(EntityDef::Link(_)) => {}
            _ => {
                return Err(SchemaError::UnknownReference { owner: def.name.clone(), target: def.parent.clone() })
            }
        }
        let mut seen = HashSet::new();
        for attr in &def.attributes {
            if !valid_name(&attr.name) || reserved_attribute(&attr.name) {
                return Err(SchemaError::InvalidName(attr.name.clone()));
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(SchemaError::DuplicateAttribute {
                    satellite: def.name.clone(),
                    attribute: attr.name.clone(),
                });
            }
        }
        let mut next = self.clone();
        next.version += 1;
        next.satellites.push(Versioned { def, since: next.version });
        Ok(next)
    }

    /// Registers the category satellite that documents labelled `label` load into.
    pub fn evolve_register_category(&self, label: &str, satellite: &str) -> Result<VaultSchema, SchemaError> {
        if !valid_label(label) {
            return Err(SchemaError::InvalidName(label.to_owned()));
        }
        if self.dispatch.contains_key(label) {
            return Err(SchemaError::DuplicateCategory(label.to_owned()));
        }
        if self.satellite(satellite).is_none() {
            return Err(SchemaError::UnknownReference { owner: format!("category {label}"), target: satellite.to_owned() });
        }
        let mut next = self.clone();
        next.version += 1;
        next.dispatch.insert(label.to_owned(), Versioned { def: satellite.to_owned(), since: next.version });
        Ok(next)
    }

    /// Adds a category satellite and its dispatch entry in one version step.
    pub fn evolve_add_category(&self, label: &str, def: SatelliteDef) -> Result<VaultSchema, SchemaError> {
        let name = def.name.clone();
        let mut next = self.evolve_add_satellite(def)?.evolve_register_category(label, &name)?;
        next.version = self.version + 1;
        for s in &mut next.satellites {
            if s.def.name == name {
                s.since = next.version;
            }
        }
        if let Some(entry) = next.dispatch.get_mut(label) {
            entry.since = next.version;
        }
        Ok(next)
    }

    /// Checks referential closure and per-definition invariants.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let mut rebuilt = VaultSchema::empty();
        for h in self.hubs() {
            rebuilt = rebuilt.evolve_add_hub(h.clone())?;
        }
        for l in self.links() {
            rebuilt = rebuilt.evolve_add_link(l.clone())?;
        }
        for s in self.satellites() {
            rebuilt = rebuilt.evolve_add_satellite(s.clone())?;
        }
        for (label, sat) in self.dispatch_entries() {
            rebuilt = rebuilt.evolve_register_category(label, sat)?;
        }
        Ok(())
    }

    /// True when every definition of `older` is present, unchanged, here.
    pub fn is_additive_evolution_of(&self, older: &VaultSchema) -> bool {
        self.version >= older.version
            && older.hubs.iter().all(|v| self.hubs.contains(v))
            && older.links.iter().all(|v| self.links.contains(v))
            && older.satellites.iter().all(|v| self.satellites.contains(v))
            && older.dispatch.iter().all(|(k, v)| self.dispatch.get(k) == Some(v))
    }

    /// The schema as it stood at `version`.
    pub fn at_version(&self, version: u32) -> VaultSchema {
        VaultSchema {
            version: version.min(self.version),
            hubs: self.hubs.iter().filter(|v| v.since <= version).cloned().collect(),
            links: self.links.iter().filter(|v| v.since <= version).cloned().collect(),
            satellites: self.satellites.iter().filter(|v| v.since <= version).cloned().collect(),
            dispatch: self
                .dispatch
                .iter()
                .filter(|(_, v)| v.since <= version)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub(crate) fn from_parts(
        version: u32,
        hubs: Vec<Versioned<HubDef>>,
        links: Vec<Versioned<LinkDef>>,
        satellites: Vec<Versioned<SatelliteDef>>,
        dispatch: BTreeMap<String, Versioned<String>>,
    ) -> Self {
        VaultSchema { version, hubs, links, satellites, dispatch }
    }
}

/// Entity names of the industrial-heritage metadata vault.
pub mod names {
    pub const HUB_TITLE: &str = "Hub_Title";
    pub const HUB_DATE: &str = "Hub_Date";
    pub const HUB_LOCATION: &str = "Hub_Location";
    pub const HUB_CATEGORY: &str = "Hub_Category";
    pub const LINK_DOCUMENT: &str = "Link_Document";
    pub const SAT_TITLE: &str = "Sat_Title";
    pub const SAT_DATE: &str = "Sat_Date";
    pub const SAT_LOCATION: &str = "Sat_Location";
    pub const SAT_IRHIS: &str = "Sat_IRHIS";
    pub const SAT_VOIXDUNORD: &str = "Sat_VoixDuNord";
    pub const SAT_INVENTORY: &str = "Sat_Inventory";
    pub const SAT_BOOK: &str = "Sat_Book";
}

/// Version-1 schema: four hubs, `Link_Document` over all of them, and seven
/// satellites, with the four source categories dispatched to their satellites.
pub fn define_schema_tectoniq() -> VaultSchema {
    use names::*;
    use AttrKind::{Text, TextList, Timestamp};

    let hubs = [
        HubDef::new(HUB_TITLE, "Title"),
        HubDef::new(HUB_DATE, "Date"),
        HubDef::new(HUB_LOCATION, "Location"),
        HubDef::new(HUB_CATEGORY, "Category"),
    ];
    let link = LinkDef::new(LINK_DOCUMENT, [HUB_TITLE, HUB_LOCATION, HUB_DATE, HUB_CATEGORY]);
    let satellites = [
        SatelliteDef::new(
            SAT_TITLE,
            HUB_TITLE,
            [("Title", Text), ("Authors", TextList), ("Description", Text), ("Keywords", TextList)],
        ),
        SatelliteDef::new(
            SAT_DATE,
            HUB_DATE,
            [("Epoch", Text), ("DepositDate", Timestamp), ("UpdateDate", Timestamp)],
        ),
        SatelliteDef::new(
            SAT_LOCATION,
            HUB_LOCATION,
            [("Address", Text), ("AdditionalInfo", Text), ("Reference", Text)],
        ),
        SatelliteDef::new(SAT_IRHIS, HUB_CATEGORY, [("CodePhoto", Text), ("Provenance", Text)]),
        SatelliteDef::new(SAT_VOIXDUNORD, HUB_CATEGORY, [("Language", Text), ("Note", TextList)]),
        SatelliteDef::new(SAT_INVENTORY, HUB_CATEGORY, [("Property", Text), ("Link", Text)]),
        SatelliteDef::new(SAT_BOOK, HUB_CATEGORY, [("Rights", Text), ("Publisher", Text)]),
    ];
    let dispatch = [
        ("irhis", SAT_IRHIS),
        ("voixdunord", SAT_VOIXDUNORD),
        ("inventory", SAT_INVENTORY),
        ("book", SAT_BOOK),
    ];

    let v = |def| Versioned { def, since: 1 };
    let schema = VaultSchema::from_parts(
        1,
        hubs.into_iter().map(v).collect(),
        vec![Versioned { def: link, since: 1 }],
        satellites.into_iter().map(|def| Versioned { def, since: 1 }).collect(),
        dispatch
            .into_iter()
            .map(|(label, sat)| (label.to_owned(), Versioned { def: sat.to_owned(), since: 1 }))
            .collect(),
    );
    debug_assert!(schema.validate().is_ok());
    schema
}

#[cfg(test)]
mod tests {
    use super::names::*;
    use super::*;

    #[test]
    fn tectoniq_shape() {
        let schema = define_schema_tectoniq();
        assert_eq!(schema.version(), 1);
        assert_eq!(schema.hubs().count(), 4);
        assert_eq!(schema.links().count(), 1);
        assert_eq!(schema.satellites().count(), 7);
        assert_eq!(schema.entity_names().len(), 12);
        schema.validate().unwrap();

        let link = schema.link(LINK_DOCUMENT).unwrap();
        assert_eq!(link.members.len(), 4);
        let book = schema.satellite(SAT_BOOK).unwrap();
        let attrs: Vec<_> = book.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(attrs, ["Rights", "Publisher"]);
        assert_eq!(book.parent, HUB_CATEGORY);
        assert_eq!(schema.dispatch("book"), Some(SAT_BOOK));
        assert_eq!(schema.dispatch("video"), None);
    }

    #[test]
    fn add_satellite_bumps_version() {
        let v1 = define_schema_tectoniq();
        let v2 = v1
            .evolve_add_satellite(SatelliteDef::new("Sat_NewSource", HUB_CATEGORY, [("Curator", AttrKind::Text)]))
            .unwrap();
        assert_eq!(v2.version(), 2);
        assert_eq!(v2.satellites().count(), 8);
        assert!(v2.is_additive_evolution_of(&v1));
        assert!(!v1.is_additive_evolution_of(&v2));
        assert_eq!(v2.at_version(1), v1);
    }

    #[test]
    fn satellite_with_missing_parent_rejected() {
        let err = define_schema_tectoniq()
            .evolve_add_satellite(SatelliteDef::new("Sat_X", "Hub_Missing", [("A", AttrKind::Text)]))
            .unwrap_err();
        assert!(matches!(err, SchemaError::UnknownReference { .. }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let v1 = define_schema_tectoniq();
        assert_eq!(
            v1.evolve_add_satellite(SatelliteDef::new(SAT_BOOK, HUB_CATEGORY, [("A", AttrKind::Text)])),
            Err(SchemaError::Duplicate(SAT_BOOK.into()))
        );
        assert_eq!(v1.evolve_add_hub(HubDef::new(HUB_TITLE, "T")), Err(SchemaError::Duplicate(HUB_TITLE.into())));
        let dup_attr = v1.evolve_add_satellite(SatelliteDef::new(
            "Sat_X",
            HUB_TITLE,
            [("A", AttrKind::Text), ("A", AttrKind::Text)],
        ));
        assert!(matches!(dup_attr, Err(SchemaError::DuplicateAttribute { .. })));
    }

    #[test]
    fn hub_and_link_evolution() {
        let v1 = define_schema_tectoniq();
        let v2 = v1.evolve_add_hub(HubDef::new("Hub_Author", "Author")).unwrap();
        assert_eq!(v2.version(), 2);
        let v3 = v2.evolve_add_link(LinkDef::new("Link_Authorship", [HUB_TITLE, "Hub_Author"])).unwrap();
        assert_eq!(v3.version(), 3);
        assert!(v3.is_additive_evolution_of(&v1));

        // link over a hub that does not exist yet
        assert!(matches!(
            v1.evolve_add_link(LinkDef::new("Link_Authorship", [HUB_TITLE, "Hub_Author"])),
            Err(SchemaError::UnknownReference { .. })
        ));
        assert!(matches!(
            v2.evolve_add_link(LinkDef::new("Link_Dup", [HUB_TITLE, HUB_TITLE])),
            Err(SchemaError::DuplicateMember { .. })
        ));
        assert!(matches!(
            v2.evolve_add_link(LinkDef::new("Link_One", [HUB_TITLE])),
            Err(SchemaError::TooFewMembers(_))
        ));
    }

    #[test]
    fn category_evolution_is_one_step() {
        let v1 = define_schema_tectoniq();
        let v2 = v1
            .evolve_add_category("newsource", SatelliteDef::new("Sat_NewSource", HUB_CATEGORY, [("Curator", AttrKind::Text)]))
            .unwrap();
        assert_eq!(v2.version(), 2);
        assert_eq!(v2.dispatch("newsource"), Some("Sat_NewSource"));
        assert!(v2.is_additive_evolution_of(&v1));
        assert_eq!(
            v2.evolve_register_category("newsource", SAT_BOOK),
            Err(SchemaError::DuplicateCategory("newsource".into()))
        );
        assert!(v1.evolve_register_category("Bad Label", SAT_BOOK).is_err());
    }

    #[test]
    fn invalid_identifiers_rejected() {
        let v1 = define_schema_tectoniq();
        assert!(matches!(v1.evolve_add_hub(HubDef::new("9hub", "K")), Err(SchemaError::InvalidName(_))));
        assert!(matches!(v1.evolve_add_hub(HubDef::new("Hub X", "K")), Err(SchemaError::InvalidName(_))));
        assert!(matches!(
            v1.evolve_add_satellite(SatelliteDef::new("Sat_X", "Hub_Title", [("Source", AttrKind::Text)])),
            Err(SchemaError::InvalidName(_))
        ));
        assert!(matches!(
            v1.evolve_add_satellite(SatelliteDef::new("Sat_X", "Hub_Title", [("Title_id", AttrKind::Text)])),
            Err(SchemaError::InvalidName(_))
        ));
    }
}
