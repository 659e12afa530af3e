use metavault::bench::BenchFixture;
use metavault::query::{execute, plan, QueryId};
use metavault::storage::BackendKind;

#[test]
fn generated_corpus_round_trip() {
    let fixture = BenchFixture::generated(1, 42, &BackendKind::ALL).unwrap();
    assert_eq!(fixture.ingest.failures(), 0, "{:?}", fixture.ingest);
    assert_eq!(fixture.ingest.links_inserted, 245);
    assert_eq!(fixture.ingest.instances(), 274);
    for q in QueryId::ALL {
        let want = fixture.oracle.scan(&q.predicates(), q.two_phase());
        for kind in BackendKind::ALL {
            let backend = fixture.backend(kind).unwrap();
            let p = plan(backend.schema().unwrap(), &q.predicates(), q.two_phase()).unwrap();
            let got = execute(&p, backend).unwrap();
            assert_eq!(got, want, "{kind} {q}");
        }
        eprintln!("{q}: {} rows", want.len());
    }
}
