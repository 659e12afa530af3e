use std::collections::BTreeMap;

use metavault::bench::generator::{sample_book_record, SAMPLE_BOOK_ID};
use metavault::etl::{extract_book, DcRecord, RawDocument, SourceKind};
use metavault::storage::{BackendKind, EntityFilter, StorageError};
use metavault::vault::key::make_business_key;
use metavault::vault::schema::names;
use metavault::vault::{
    define_schema_tectoniq, AsOf, AttributeValue, BusinessKey, Catalog, CatalogError, CategoryLabel, DateBlock, DocumentMetadata,
    LocationBlock, Record, SourceRef, Timestamp, TitleBlock,
};

fn at(s: i64) -> Timestamp {
    Timestamp::from_millis(1_600_000_000_000 + s * 1000)
}

fn doc(id: &str, title: &str, town: Option<&str>, year: Option<i32>) -> DocumentMetadata {
    let uri = SourceRef::new(format!("inventory/{id}.xml")).unwrap();
    DocumentMetadata {
        doc_id: id.into(),
        title: TitleBlock { title: title.into(), authors: vec![], description: None, keywords: vec![] },
        date: DateBlock { epoch: None, deposit: year.and_then(|y| Timestamp::from_ymd(y, 1, 1)), update: None },
        location: town.map(|t| LocationBlock { address: t.into(), additional_info: None, reference: None }),
        category: CategoryLabel::new("inventory").unwrap(),
        category_attributes: BTreeMap::from([("Property".to_owned(), AttributeValue::text("propriété privée"))]),
        source: uri.clone(),
        instances: vec![uri],
    }
}

fn catalogs() -> Vec<Catalog> {
    BackendKind::ALL.iter().map(|&k| Catalog::new(k, &define_schema_tectoniq()).unwrap()).collect()
}

fn key(hub: &str, natural: &str) -> BusinessKey {
    make_business_key(define_schema_tectoniq().hub(hub).unwrap(), natural).unwrap()
}

#[test]
fn documents_sharing_a_town_share_its_hub() {
    for mut c in catalogs() {
        let a = c.insert_document(&doc("A", "Filature A", Some("Tourcoing"), Some(1900)), at(1)).unwrap();
        let b = c.insert_document(&doc("B", "Filature B", Some("Tourcoing"), Some(1900)), at(2)).unwrap();
        assert_eq!((a.link.0, b.link.0), (1, 2));
        assert_eq!((a.hubs_created, b.hubs_created), (4, 2));
        let backend = c.backend();
        assert_eq!(backend.count(names::HUB_LOCATION).unwrap(), 1);
        assert_eq!(backend.count(names::HUB_DATE).unwrap(), 1);
        assert_eq!(backend.count(names::LINK_DOCUMENT).unwrap(), 2);
        // Title, date, location and category for A; B repeats date and location.
        assert_eq!((a.satellites_written, b.satellites_written), (4, 2));
    }
}

#[test]
fn missing_blocks_point_at_the_unknown_hub_records() {
    for mut c in catalogs() {
        c.insert_document(&doc("A", "Tissage", None, None), at(1)).unwrap();
        c.insert_document(&doc("B", "Peignage", None, None), at(2)).unwrap();
        let links = c.backend().scan(&EntityFilter::all(names::LINK_DOCUMENT)).unwrap();
        for link in links.into_iter().filter_map(Record::into_link) {
            assert!(link.members[names::HUB_DATE].is_unknown());
            assert!(link.members[names::HUB_LOCATION].is_unknown());
        }
        assert_eq!(c.backend().count(names::HUB_LOCATION).unwrap(), 1);
        assert_eq!(c.backend().count(names::SAT_LOCATION).unwrap(), 0);
        assert_eq!(c.backend().count(names::SAT_DATE).unwrap(), 0);
    }
}

#[test]
fn reinserting_a_document_adds_only_a_link() {
    for mut c in catalogs() {
        let d = doc("A", "Filature", Some("Lille"), Some(1900));
        c.insert_document(&d, at(1)).unwrap();
        let again = c.insert_document(&d, at(2)).unwrap();
        assert_eq!((again.hubs_created, again.satellites_written), (0, 0));
        assert_eq!(c.link_count(), 2);
    }
}

#[test]
fn sample_book_populates_sat_book() {
    let raw = RawDocument::from_bytes(SourceKind::Book, format!("books/{SAMPLE_BOOK_ID}.json"), Vec::new());
    let dc = DcRecord::from_json(&sample_book_record()).unwrap();
    let book = extract_book(&raw, &dc).unwrap();
    for mut c in catalogs() {
        c.insert_document(&book, at(1)).unwrap();
        let sats = c.backend().scan(&EntityFilter::all(names::SAT_BOOK)).unwrap();
        assert_eq!(sats.len(), 1);
        let sat = sats.into_iter().next().unwrap().into_satellite().unwrap();
        assert_eq!(sat.attribute("Rights"), Some(&AttributeValue::text("domaine public")));
        assert_eq!(sat.attribute("Publisher"), Some(&AttributeValue::text("Villeneuve d'Ascq : SCD Lille 3")));
        assert_eq!(sat.datetime, at(1));
    }
}

#[test]
fn rejected_documents() {
    for mut c in catalogs() {
        let untitled = doc("A", "   ", None, None);
        assert!(matches!(c.insert_document(&untitled, at(1)), Err(CatalogError::Document(_))));
        let mut video = doc("V", "Film", None, None);
        video.category = CategoryLabel::new("video").unwrap();
        assert!(matches!(c.insert_document(&video, at(1)), Err(CatalogError::UnregisteredCategory(_))));
        let mut odd = doc("O", "Filature", None, None);
        odd.category_attributes.insert("Colour".into(), AttributeValue::text("red"));
        assert!(matches!(c.insert_document(&odd, at(1)), Err(CatalogError::UnknownCategoryAttribute { .. })));
        assert_eq!(c.link_count(), 0);
    }
}

#[test]
fn superseding_a_location() {
    for mut c in catalogs() {
        let d = doc("A", "Filature", Some("Lille"), None);
        c.insert_document(&d, at(10)).unwrap();
        let parent = key(names::HUB_LOCATION, &d.location_natural().unwrap());
        let src = SourceRef::new("corrections.txt").unwrap();
        let moved = BTreeMap::from([("Address".to_owned(), AttributeValue::text("Tourcoing"))]);
        assert!(c.supersede_satellite(names::SAT_LOCATION, &parent, moved.clone(), at(20), &src).unwrap());
        assert!(!c.supersede_satellite(names::SAT_LOCATION, &parent, moved.clone(), at(25), &src).unwrap());

        let address = |as_of| {
            c.current_satellite(names::SAT_LOCATION, &parent, as_of)
                .unwrap()
                .and_then(|s| s.attribute("Address").cloned())
        };
        assert_eq!(address(AsOf::Latest), Some(AttributeValue::text("Tourcoing")));
        assert_eq!(address(AsOf::At(at(19))), Some(AttributeValue::text("Lille")));
        assert_eq!(address(AsOf::At(at(9))), None);

        let back = BTreeMap::from([("Address".to_owned(), AttributeValue::text("Roubaix"))]);
        let err = c.supersede_satellite(names::SAT_LOCATION, &parent, back.clone(), at(15), &src).unwrap_err();
        assert!(matches!(err, CatalogError::Storage(StorageError::NonMonotonic { .. })), "{err}");
        c.supersede_satellite(names::SAT_LOCATION, &parent, back, at(30), &src).unwrap();
        let history = c.history(names::SAT_LOCATION, &parent).unwrap();
        let times: Vec<_> = history.iter().map(|s| s.datetime).collect();
        assert_eq!(times, [at(10), at(20), at(30)]);
    }
}

#[test]
fn no_history_means_no_current_version() {
    for c in catalogs() {
        let parent = key(names::HUB_TITLE, "nothing");
        assert_eq!(c.current_satellite(names::SAT_TITLE, &parent, AsOf::Latest).unwrap(), None);
    }
}

#[test]
fn reopened_catalogs_continue_link_numbering() {
    for mut c in catalogs() {
        let kind = c.backend().kind();
        c.insert_document(&doc("A", "Filature", None, None), at(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.save(dir.path()).unwrap();
        let mut reopened = Catalog::open(kind, dir.path()).unwrap();
        let next = reopened.insert_document(&doc("B", "Tissage", None, None), at(2)).unwrap();
        assert_eq!(next.link.0, 2, "{kind}");
    }
}
