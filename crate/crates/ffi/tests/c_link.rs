//! Builds a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

use metavault::query::parse_query;
use metavault::query::plan;
use metavault::storage::BackendKind;
use metavault::vault::{define_schema_tectoniq, Catalog, SteppingClock, Timestamp};

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

fn expected_rows(manifest: &std::path::Path) -> usize {
    let manifest = metavault::etl::load_manifest(manifest).unwrap();
    let mut catalogs = [Catalog::new(BackendKind::Document, &define_schema_tectoniq()).unwrap()];
    metavault::etl::run_etl(&manifest, &mut catalogs, &mut SteppingClock::new(Timestamp::from_millis(0), 1));
    let predicates = parse_query("Sat_Location.Address = Tourcoing and category is book").unwrap();
    let p = plan(catalogs[0].schema(), &predicates, false).unwrap();
    metavault::query::execute(&p, catalogs[0].backend()).unwrap().len()
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_owned());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipping");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libmetavault_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let work = tempfile::tempdir().unwrap();
    let exe = work.path().join("c_program");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c_program.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());

    let manifest = crate_dir.join("../../fixtures/tectoniq/manifest.txt");
    let out = Command::new(&exe).arg(&manifest).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = format!(
        "version={} links=245 failures=0 rows={}\n",
        env!("CARGO_PKG_VERSION"),
        expected_rows(&manifest)
    );
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}
