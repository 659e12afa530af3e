use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metavault::bench::generate_scaled_corpus;
use metavault::etl::{load_manifest, parse_manifest, run_etl, SourceKind};
use metavault::storage::BackendKind;
use metavault::vault::schema::names;
use metavault::vault::{define_schema_tectoniq, Catalog, SteppingClock, Timestamp};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tectoniq")
}

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn shipped_fixture_is_the_seed_42_generator_output() {
    let generated = generate_scaled_corpus(1, 42);
    assert_eq!(files_under(&fixture_dir()), generated.files);
}

#[test]
fn generator_is_deterministic_per_seed() {
    assert_eq!(generate_scaled_corpus(2, 7), generate_scaled_corpus(2, 7));
    assert_ne!(generate_scaled_corpus(1, 7).files, generate_scaled_corpus(1, 8).files);
    let c = generate_scaled_corpus(3, 1);
    assert_eq!((c.expected_documents(), c.expected_instances()), (735, 822));
}

fn copy_tree(from: &Path, to: &Path) {
    for (rel, bytes) in files_under(from) {
        let dest = to.join(rel);
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::write(dest, bytes).unwrap();
    }
}

fn ingest(manifest: &Path) -> (metavault::etl::IngestReport, Vec<Catalog>) {
    let manifest = load_manifest(manifest).unwrap();
    let mut catalogs: Vec<Catalog> = BackendKind::ALL.iter().map(|&k| Catalog::new(k, &define_schema_tectoniq()).unwrap()).collect();
    let mut clock = SteppingClock::new(Timestamp::from_millis(0), 10);
    let report = run_etl(&manifest, &mut catalogs, &mut clock);
    (report, catalogs)
}

#[test]
fn one_corrupt_notice_fails_alone() {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixture_dir(), dir.path());
    std::fs::write(dir.path().join("inventory/IA59000007.xml"), "<notice id=\"IA59000007\"><title>cut off").unwrap();

    let (report, catalogs) = ingest(&dir.path().join("manifest.txt"));
    let inventory = report.source(SourceKind::Inventory).unwrap();
    assert_eq!((inventory.files, inventory.documents), (49, 48));
    assert_eq!(inventory.failures.len(), 1);
    assert_eq!(inventory.failures[0].uri, "inventory/IA59000007.xml");
    assert_eq!(report.documents(), 244);
    assert_eq!(report.count_mismatches(), [("inventory".to_owned(), 49, 48)]);
    for c in &catalogs {
        assert_eq!(c.backend().count(names::LINK_DOCUMENT).unwrap(), 244);
    }
}

#[test]
fn empty_manifest_inserts_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.txt");
    std::fs::write(&path, "# nothing listed\n").unwrap();
    let (report, catalogs) = ingest(&path);
    assert_eq!((report.documents(), report.instances(), report.failures(), report.links_inserted), (0, 0, 0, 0));
    assert!(catalogs.iter().all(|c| c.link_count() == 0));
}

#[test]
fn dossier_without_articles_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("press")).unwrap();
    std::fs::write(
        dir.path().join("press/empty.xml"),
        "<dossier id=\"d1\"><title>Dossier vide</title><date>2001-02-03</date></dossier>",
    )
    .unwrap();
    std::fs::write(dir.path().join("manifest.txt"), "voixdunord press\n").unwrap();
    let (report, _) = ingest(&dir.path().join("manifest.txt"));
    let press = report.source(SourceKind::VoixDuNord).unwrap();
    assert_eq!((press.files, press.documents, press.failures.len(), press.warnings.len()), (1, 0, 0, 1));
}

#[test]
fn manifest_errors_carry_positions() {
    let err = parse_manifest("inventory inv 49\nvideo clips 3\n", Path::new(".")).unwrap_err();
    assert!(err.to_string().starts_with("line 2, column 1"), "{err}");
    let err = parse_manifest("book \"unterminated 1\n", Path::new(".")).unwrap_err();
    assert!(err.to_string().starts_with("line 1"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("manifest.txt"), "book missing-dir\n").unwrap();
    assert!(load_manifest(&dir.path().join("manifest.txt")).is_err());
}

#[test]
fn reingesting_the_fixture_adds_links_but_no_duplicate_hubs() {
    let manifest = load_manifest(&fixture_dir().join("manifest.txt")).unwrap();
    let mut catalogs = vec![Catalog::new(BackendKind::Document, &define_schema_tectoniq()).unwrap()];
    let mut clock = SteppingClock::new(Timestamp::from_millis(0), 10);
    run_etl(&manifest, &mut catalogs, &mut clock);
    let hubs_before = catalogs[0].backend().count(names::HUB_TITLE).unwrap();
    let sats_before = catalogs[0].backend().count(names::SAT_TITLE).unwrap();
    let second = run_etl(&manifest, &mut catalogs, &mut clock);
    assert_eq!(second.failures(), 0);
    assert_eq!(catalogs[0].link_count(), 490);
    assert_eq!(catalogs[0].backend().count(names::HUB_TITLE).unwrap(), hubs_before);
    // Unchanged descriptions add no satellite versions.
    assert_eq!(catalogs[0].backend().count(names::SAT_TITLE).unwrap(), sats_before);
}
