//! Per-source extractors turning lake files into [`DocumentMetadata`].
//!
//! Inventory notices and press dossiers are XML; pictures are JPEG files
//! described by an optional Dublin Core sidecar (`<stem>.json` next to the
//! image); books are described by Dublin Core records `<stem>.json` standing
//! for `<stem>.pdf`. See `docs/corpus-formats.md` for the element lists.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::vault::document::{CategoryLabel, DateBlock, DocumentError, DocumentMetadata, LocationBlock, TitleBlock};
use crate::vault::key::SourceRef;
use crate::vault::value::AttributeValue;

use super::dates::parse_source_date;
use super::dc::{split_keywords, DcError, DcRecord};
use super::manifest::SourceKind;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("{uri}: {source}")]
    Io { uri: String, source: std::io::Error },
    #[error("{uri}: malformed XML: {message}")]
    Xml { uri: String, message: String },
    #[error("{uri}: unexpected root element <{found}>, expected <{expected}>")]
    Root { uri: String, expected: &'static str, found: String },
    #[error("{uri}: not a JPEG file")]
    NotJpeg { uri: String },
    #[error("{uri}: {source}")]
    Dc { uri: String, source: DcError },
    #[error("{uri}: {source}")]
    Document { uri: String, source: DocumentError },
}

/// A lake file read into memory.
#[derive(Clone, Debug)]
pub struct RawDocument {
    pub kind: SourceKind,
    pub path: PathBuf,
    /// Path relative to the manifest directory, `/`-separated.
    pub uri: String,
    pub bytes: Vec<u8>,
    pub size: u64,
    pub modified: Option<std::time::SystemTime>,
}

impl RawDocument {
    pub fn read(kind: SourceKind, path: &Path, base_dir: &Path) -> Result<Self, ExtractError> {
        let uri = relative_uri(path, base_dir);
        let io = |source| ExtractError::Io { uri: uri.clone(), source };
        let bytes = std::fs::read(path).map_err(io)?;
        let meta = std::fs::metadata(path).map_err(io)?;
        Ok(RawDocument { kind, path: path.to_owned(), uri, size: bytes.len() as u64, bytes, modified: meta.modified().ok() })
    }

    /// In-memory document, for tests and generated corpora.
    pub fn from_bytes(kind: SourceKind, uri: impl Into<String>, bytes: Vec<u8>) -> Self {
        let uri = uri.into();
        RawDocument { kind, path: PathBuf::from(&uri), uri, size: bytes.len() as u64, bytes, modified: None }
    }

    fn stem(&self) -> String {
        self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| self.uri.clone())
    }

    fn text(&self) -> Result<&str, ExtractError> {
        std::str::from_utf8(&self.bytes).map_err(|e| ExtractError::Xml { uri: self.uri.clone(), message: e.to_string() })
    }
}

pub(crate) fn relative_uri(path: &Path, base_dir: &Path) -> String {
    let rel = path.strip_prefix(base_dir).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

/// Documents extracted from one file, plus non-fatal warnings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extracted {
    pub documents: Vec<DocumentMetadata>,
    pub warnings: Vec<String>,
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn non_empty(text: Option<String>) -> Option<String> {
    text.map(|t| collapse(&t)).filter(|t| !t.is_empty())
}

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn child_text(node: Node, name: &str) -> Option<String> {
    non_empty(child(node, name).map(|c| c.text().unwrap_or("").to_owned()))
}

fn child_texts(node: Node, list: &str, item: &str) -> Vec<String> {
    child(node, list)
        .into_iter()
        .flat_map(|l| l.children().filter(move |c| c.has_tag_name(item)))
        .filter_map(|c| non_empty(c.text().map(str::to_owned)))
        .collect()
}

fn parse_xml<'a>(raw: &RawDocument, text: &'a str, root: &'static str) -> Result<Document<'a>, ExtractError> {
    let doc = Document::parse(text).map_err(|e| ExtractError::Xml { uri: raw.uri.clone(), message: e.to_string() })?;
    let found = doc.root_element().tag_name().name();
    if found != root {
        return Err(ExtractError::Root { uri: raw.uri.clone(), expected: root, found: found.to_owned() });
    }
    Ok(doc)
}

fn location_of(node: Node) -> Option<LocationBlock> {
    let loc = child(node, "location")?;
    Some(LocationBlock {
        address: child_text(loc, "address")?,
        additional_info: child_text(loc, "info"),
        reference: child_text(loc, "reference"),
    })
}

fn source_ref(uri: &str) -> Result<SourceRef, ExtractError> {
    SourceRef::new(uri).map_err(|_| ExtractError::Document { uri: uri.to_owned(), source: DocumentError::NoInstances })
}

fn finish(raw: &RawDocument, doc: DocumentMetadata) -> Result<DocumentMetadata, ExtractError> {
    doc.validate().map_err(|source| ExtractError::Document { uri: raw.uri.clone(), source })?;
    Ok(doc)
}

fn label(name: &str) -> CategoryLabel {
    CategoryLabel::new(name).expect("built-in labels are valid")
}

fn text_attr(value: Option<String>) -> AttributeValue {
    AttributeValue::optional_text(value)
}

/// One `<notice>` per file.
pub fn extract_inventory(raw: &RawDocument) -> Result<Extracted, ExtractError> {
    let text = raw.text()?;
    let xml = parse_xml(raw, text, "notice")?;
    let notice = xml.root_element();
    let dates = child(notice, "dates");
    let date = |name: &str| dates.and_then(|d| child_text(d, name));
    let source = source_ref(&raw.uri)?;
    let doc = DocumentMetadata {
        doc_id: notice.attribute("id").map(str::to_owned).unwrap_or_else(|| raw.stem()),
        title: TitleBlock {
            title: child_text(notice, "title").unwrap_or_default(),
            authors: child_texts(notice, "authors", "author"),
            description: child_text(notice, "description"),
            keywords: child_texts(notice, "keywords", "keyword"),
        },
        date: DateBlock {
            epoch: date("epoch"),
            deposit: date("deposit").as_deref().and_then(parse_source_date),
            update: date("update").as_deref().and_then(parse_source_date),
        },
        location: location_of(notice),
        category: label(CategoryLabel::INVENTORY),
        category_attributes: BTreeMap::from([
            ("Property".to_owned(), text_attr(child_text(notice, "property"))),
            ("Link".to_owned(), text_attr(child_text(notice, "link"))),
        ]),
        instances: vec![source.clone()],
        source,
    };
    Ok(Extracted { documents: vec![finish(raw, doc)?], warnings: Vec::new() })
}

/// A `<dossier>` of `<article>` elements: one document whose instances are
/// the articles (`<file>#article-N`, 1-based). The article headlines form
/// the `Note` list.
pub fn extract_press(raw: &RawDocument) -> Result<Extracted, ExtractError> {
    let text = raw.text()?;
    let xml = parse_xml(raw, text, "dossier")?;
    let dossier = xml.root_element();
    let articles: Vec<Node> = dossier.children().filter(|c| c.has_tag_name("article")).collect();
    if articles.is_empty() {
        return Ok(Extracted { documents: Vec::new(), warnings: vec![format!("{}: dossier has no articles", raw.uri)] });
    }
    let source = source_ref(&raw.uri)?;
    let instances = (1..=articles.len()).map(|n| source.with_fragment(&format!("article-{n}"))).collect();
    let notes: Vec<String> = articles.iter().filter_map(|a| child_text(*a, "headline")).collect();
    let doc = DocumentMetadata {
        doc_id: dossier.attribute("id").map(str::to_owned).unwrap_or_else(|| raw.stem()),
        title: TitleBlock {
            title: child_text(dossier, "title").unwrap_or_default(),
            authors: child_texts(dossier, "authors", "author"),
            description: child_text(dossier, "description"),
            keywords: child_texts(dossier, "keywords", "keyword"),
        },
        date: DateBlock {
            epoch: child_text(dossier, "epoch"),
            deposit: child_text(dossier, "date").as_deref().and_then(parse_source_date),
            update: None,
        },
        location: location_of(dossier),
        category: label(CategoryLabel::VOIXDUNORD),
        category_attributes: BTreeMap::from([
            ("Language".to_owned(), text_attr(child_text(dossier, "language"))),
            ("Note".to_owned(), AttributeValue::text_list(notes)),
        ]),
        source,
        instances,
    };
    Ok(Extracted { documents: vec![finish(raw, doc)?], warnings: Vec::new() })
}

const JPEG_MAGIC: [u8; 3] = [0xFF, 0xD8, 0xFF];

/// One photo or plan. Without a sidecar the title is the file stem.
pub fn extract_picture(raw: &RawDocument, sidecar: Option<&DcRecord>) -> Result<Extracted, ExtractError> {
    if !raw.bytes.starts_with(&JPEG_MAGIC) {
        return Err(ExtractError::NotJpeg { uri: raw.uri.clone() });
    }
    let empty = DcRecord::default();
    let dc = sidecar.unwrap_or(&empty);
    let source = source_ref(&raw.uri)?;
    let doc = DocumentMetadata {
        doc_id: raw.stem(),
        title: TitleBlock {
            title: non_empty(dc.text("dc:title")).unwrap_or_else(|| raw.stem()),
            authors: dc.list("dc:creator"),
            description: non_empty(dc.text("dc:description")),
            keywords: split_keywords(&dc.list("dc:subject")),
        },
        date: DateBlock { epoch: None, deposit: dc.text("dc:date").as_deref().and_then(parse_source_date), update: None },
        location: non_empty(dc.text("dc:coverage"))
            .map(|address| LocationBlock { address, additional_info: None, reference: None }),
        category: label(CategoryLabel::IRHIS),
        category_attributes: BTreeMap::from([
            ("CodePhoto".to_owned(), text_attr(non_empty(dc.text("dc:identifier")))),
            ("Provenance".to_owned(), text_attr(non_empty(dc.text("dc:source")))),
        ]),
        instances: vec![source.clone()],
        source,
    };
    Ok(Extracted { documents: vec![finish(raw, doc)?], warnings: Vec::new() })
}

/// One book, described by the Dublin Core record in `raw`. The document's
/// source is the PDF the record stands for.
pub fn extract_book(raw: &RawDocument, dc: &DcRecord) -> Result<DocumentMetadata, ExtractError> {
    let pdf_uri = match raw.uri.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}.pdf"),
        None => format!("{}.pdf", raw.uri),
    };
    let title = non_empty(dc.text("dc:title"));
    let annotations: Vec<String> = [("source", "dc:source"), ("language", "dc:language"), ("format", "dc:format")]
        .into_iter()
        .filter_map(|(label, element)| non_empty(dc.text(element)).map(|v| format!("{label}: {v}")))
        .collect();
    let description = non_empty(dc.text("dc:description"))
        .into_iter()
        .chain((!annotations.is_empty()).then(|| annotations.join("; ")))
        .collect::<Vec<_>>();
    let source = source_ref(&pdf_uri)?;
    let doc = DocumentMetadata {
        doc_id: raw.stem(),
        title: TitleBlock {
            title: title.unwrap_or_default(),
            authors: dc.list("dc:creator"),
            description: (!description.is_empty()).then(|| description.join("; ")),
            keywords: split_keywords(&dc.list("dc:subject")),
        },
        date: DateBlock { epoch: None, deposit: dc.text("dc:date").as_deref().and_then(parse_source_date), update: None },
        location: non_empty(dc.text("dc:coverage"))
            .map(|address| LocationBlock { address, additional_info: None, reference: None }),
        category: label(CategoryLabel::BOOK),
        category_attributes: BTreeMap::from([
            ("Rights".to_owned(), text_attr(non_empty(dc.text("dc:rights")))),
            ("Publisher".to_owned(), text_attr(non_empty(dc.text("dc:publisher")))),
        ]),
        instances: vec![source.clone()],
        source,
    };
    finish(raw, doc)
}

/// Reads the sidecar of a picture, if any.
pub fn picture_sidecar(picture: &Path, uri: &str) -> Result<Option<DcRecord>, ExtractError> {
    let path = picture.with_extension("json");
    match std::fs::read_to_string(&path) {
        Ok(text) => DcRecord::parse(&text).map(Some).map_err(|source| ExtractError::Dc { uri: uri.to_owned(), source }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(ExtractError::Io { uri: uri.to_owned(), source }),
    }
}

/// Extracts one file of any kind, reading sidecars from disk.
pub fn extract_file(raw: &RawDocument) -> Result<Extracted, ExtractError> {
    match raw.kind {
        SourceKind::Inventory => extract_inventory(raw),
        SourceKind::VoixDuNord => extract_press(raw),
        SourceKind::Irhis => {
            let sidecar = picture_sidecar(&raw.path, &raw.uri)?;
            extract_picture(raw, sidecar.as_ref())
        }
        SourceKind::Book => {
            let dc = DcRecord::parse(raw.text()?).map_err(|source| ExtractError::Dc { uri: raw.uri.clone(), source })?;
            Ok(Extracted { documents: vec![extract_book(raw, &dc)?], warnings: Vec::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOTICE: &str = r#"<notice id="IA59000001">
  <title>   Filature
     Motte-Bossut  </title>
  <authors><author>Service de l'Inventaire</author></authors>
  <keywords><keyword>filature</keyword><keyword>coton</keyword></keywords>
  <dates><epoch>4e quart 19e siècle</epoch><deposit>2010-05-02</deposit></dates>
  <property>propriété privée</property>
</notice>"#;

    #[test]
    fn inventory_notice() {
        let raw = RawDocument::from_bytes(SourceKind::Inventory, "inventory/a.xml", NOTICE.into());
        let out = extract_inventory(&raw).unwrap();
        let doc = &out.documents[0];
        assert_eq!(doc.doc_id, "IA59000001");
        assert_eq!(doc.title.title, "Filature Motte-Bossut");
        assert_eq!(doc.title.keywords, ["filature", "coton"]);
        assert!(doc.location.is_none());
        assert_eq!(doc.date.deposit.map(|t| t.year()), Some(2010));
        assert_eq!(doc.category_attributes["Property"], AttributeValue::text("propriété privée"));
        assert!(doc.category_attributes["Link"].is_absent());
    }

    #[test]
    fn malformed_xml_fails() {
        let raw = RawDocument::from_bytes(SourceKind::Inventory, "inventory/b.xml", b"<notice><title>x</notice>".to_vec());
        assert!(matches!(extract_inventory(&raw), Err(ExtractError::Xml { .. })));
        let raw = RawDocument::from_bytes(SourceKind::Inventory, "inventory/c.xml", b"<notice/>".to_vec());
        assert!(matches!(extract_inventory(&raw), Err(ExtractError::Document { .. })));
    }

    #[test]
    fn press_dossier() {
        let xml = r#"<dossier id="vdn"><title>Textile</title><language>fre</language>
            <article n="1"><headline>Un</headline></article><article n="2"><headline>Deux</headline></article></dossier>"#;
        let raw = RawDocument::from_bytes(SourceKind::VoixDuNord, "voixdunord/d.xml", xml.into());
        let doc = &extract_press(&raw).unwrap().documents[0];
        assert_eq!(doc.instance_count(), 2);
        assert_eq!(doc.instances[1].uri(), "voixdunord/d.xml#article-2");
        assert_eq!(doc.category_attributes["Note"], AttributeValue::text_list(["Un", "Deux"]));

        let empty = RawDocument::from_bytes(SourceKind::VoixDuNord, "voixdunord/e.xml", b"<dossier><title>T</title></dossier>".to_vec());
        let out = extract_press(&empty).unwrap();
        assert!(out.documents.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn picture_fallbacks() {
        let raw = RawDocument::from_bytes(SourceKind::Irhis, "irhis/IRHIS_0042.jpg", vec![0xFF, 0xD8, 0xFF, 0xE0]);
        let doc = &extract_picture(&raw, None).unwrap().documents[0];
        assert_eq!(doc.title.title, "IRHIS_0042");
        let dc = DcRecord::parse(r#"{"dc:title": "Usine", "dc:identifier": "PH-7"}"#).unwrap();
        let doc = &extract_picture(&raw, Some(&dc)).unwrap().documents[0];
        assert_eq!(doc.title.title, "Usine");
        assert_eq!(doc.category_attributes["CodePhoto"], AttributeValue::text("PH-7"));
        let bad = RawDocument::from_bytes(SourceKind::Irhis, "irhis/x.jpg", b"GIF89a".to_vec());
        assert!(matches!(extract_picture(&bad, None), Err(ExtractError::NotJpeg { .. })));
    }

    #[test]
    fn book_without_title_is_rejected() {
        let raw = RawDocument::from_bytes(SourceKind::Book, "books/x.json", Vec::new());
        let dc = DcRecord::parse(r#"{"dc:creator": "Someone"}"#).unwrap();
        assert!(matches!(extract_book(&raw, &dc), Err(ExtractError::Document { .. })));
    }
}
