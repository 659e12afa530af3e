use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metavault::bench::BenchFixture;
use metavault::query::QueryId;
use metavault::storage::BackendKind;
use metavault::vault::define_schema_tectoniq;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tectoniq/manifest.txt")
}

fn metavault(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metavault"))
        .args(args)
        .env("METAVAULT_DATA_DIR", data_dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ingested() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = metavault(dir.path(), &["schema", "init"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = metavault(dir.path(), &["ingest", manifest().to_str().unwrap(), "--load-time", "2021-01-01"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["links_inserted"], 245);
    dir
}

#[test]
fn query_output_matches_the_oracle() {
    let dir = ingested();
    let fixture = BenchFixture::from_manifest(&manifest(), &define_schema_tectoniq(), &[BackendKind::Document]).unwrap();
    for (q, expr, two_phase) in [
        (QueryId::Q1, "Sat_Title.Title contains factory", false),
        (QueryId::Q4, "Sat_Title.Title contains factory and Sat_Location.Address = Tourcoing and Sat_Date.DepositDate year 2010 and category is book", false),
        (QueryId::Q5, "Sat_Title.Title contains factory", true),
    ] {
        let expected = fixture.oracle.scan(&q.predicates(), q.two_phase()).to_json_lines();
        for backend in ["relational", "document"] {
            let mut args = vec!["query", expr, "--backend", backend];
            if two_phase {
                args.push("--two-phase");
            }
            let out = metavault(dir.path(), &args);
            assert_eq!(code(&out), 0);
            assert_eq!(stdout(&out), expected, "{q} on {backend}");
        }
    }
}

#[test]
fn repeated_reads_are_byte_identical() {
    let dir = ingested();
    for args in [
        &["query", "Sat_Location.Address = Tourcoing"][..],
        &["export", "Sat_Book"],
        &["report"],
        &["schema", "show"],
    ] {
        let a = metavault(dir.path(), args);
        let b = metavault(dir.path(), args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert!(!a.stdout.is_empty(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn report_and_export_formats() {
    let dir = ingested();
    let report = stdout(&metavault(dir.path(), &["report"]));
    assert!(report.starts_with("entity,relational_bytes,document_bytes\n"));
    assert!(report.lines().last().unwrap().starts_with("Total,"));
    let rel = stdout(&metavault(dir.path(), &["report", "--backend", "relational"]));
    assert!(rel.starts_with("entity,data_bytes,index_bytes,total_bytes\n"));
    let export: serde_json::Value = serde_json::from_str(&stdout(&metavault(dir.path(), &["export", "Sat_Book"]))).unwrap();
    assert_eq!(export["Sat_Book"].as_object().unwrap().len(), 165);
}

#[test]
fn exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&metavault(empty.path(), &["frobnicate"])), 2);
    assert_eq!(code(&metavault(empty.path(), &["query"])), 2);
    assert_eq!(code(&metavault(empty.path(), &["query", "Title contains x"])), 2);
    assert_eq!(code(&metavault(empty.path(), &["query", "Sat_Title.Title contains x"])), 3);
    assert_eq!(code(&metavault(empty.path(), &["ingest", "/nonexistent/manifest"])), 3);

    let dir = ingested();
    assert_eq!(code(&metavault(dir.path(), &["schema", "init"])), 3);
    assert_eq!(code(&metavault(dir.path(), &["query", "Sat_Title.Colour contains x"])), 3);
    assert_eq!(code(&metavault(dir.path(), &["export", "Hub_Nope"])), 3);

    let tbl = dir.path().join("relational/Sat_Title.tbl");
    let mut bytes = std::fs::read(&tbl).unwrap();
    bytes[4] ^= 0x7f;
    std::fs::write(&tbl, bytes).unwrap();
    let out = metavault(dir.path(), &["query", "Sat_Title.Title contains factory"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn data_dir_flag_overrides_the_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = metavault(env_dir.path(), &["--data-dir", flag_dir.path().to_str().unwrap(), "schema", "init"]);
    assert_eq!(code(&out), 0);
    assert!(flag_dir.path().join("relational/schema.vault").exists());
    assert!(!env_dir.path().join("relational").exists());
}

#[test]
fn schema_evolution_from_a_file() {
    let dir = ingested();
    let current = stdout(&metavault(dir.path(), &["schema", "show"]));
    let evolved = current.replace("version 1\n", "version 2\n")
        + "satellite Sat_Note parent=Hub_Title since=2\n  attr Note text\n";
    let path = dir.path().join("v2.vault");
    std::fs::write(&path, evolved).unwrap();
    let out = metavault(dir.path(), &["schema", "evolve", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let shown = stdout(&metavault(dir.path(), &["schema", "show"]));
    assert!(shown.contains("version 2") && shown.contains("Sat_Note"));

    let old = dir.path().join("v1.vault");
    std::fs::write(&old, current).unwrap();
    assert_eq!(code(&metavault(dir.path(), &["schema", "evolve", old.to_str().unwrap()])), 3);
    let q1 = metavault(dir.path(), &["query", "Sat_Title.Title contains factory"]);
    assert_eq!(stdout(&q1).lines().count(), 49);
}

#[test]
fn a_held_lock_blocks_writers() {
    let dir = ingested();
    let lock = std::fs::File::options().write(true).open(dir.path().join("LOCK")).unwrap();
    lock.lock().unwrap();
    let out = metavault(dir.path(), &["ingest", manifest().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
    lock.unlock().unwrap();
}

#[test]
fn bench_writes_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.json");
    std::fs::write(&config, r#"{"repetitions": 2, "warmup": 0, "queries": ["Q1", "Q5"]}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = metavault(dir.path(), &["bench", "--config", config.to_str().unwrap(), "--backend", "document", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("document,Q") && l.ends_with(",2")));
    assert!(out_dir.join("plot.dat").exists() && out_dir.join("storage-document.csv").exists());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"repetitions": 0}"#).unwrap();
    assert_eq!(code(&metavault(dir.path(), &["bench", "--config", bad.to_str().unwrap()])), 2);

    let stress = metavault(dir.path(), &["bench", "--stress", "2", "--rounds", "1", "--queries", "Q2"]);
    assert_eq!(code(&stress), 0, "{}", String::from_utf8_lossy(&stress.stderr));
}
