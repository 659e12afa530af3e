//! Timed, oracle-validated query runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::etl::{load_manifest, run_etl_collect, IngestReport, ManifestError};
use crate::query::{execute, plan, ExecError, OracleCorpus, PlanError, QueryId, ResultSet};
use crate::storage::{Backend, BackendKind, StorageReport};
use crate::vault::catalog::{Catalog, CatalogError};
use crate::vault::clock::SteppingClock;
use crate::vault::schema::{define_schema_tectoniq, VaultSchema};
use crate::vault::value::Timestamp;

use super::generator::generate_scaled_corpus;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("{backend} {query}: result differs from the oracle (expected {expected} rows, got {actual})")]
    OracleMismatch { backend: BackendKind, query: String, expected: usize, actual: usize },
    #[error("no catalog loaded for the {0} backend")]
    MissingBackend(BackendKind),
}

/// Also readable from a JSON file; absent fields take their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub repetitions: usize,
    pub warmup: usize,
    pub queries: Vec<QueryId>,
    pub backends: Vec<BackendKind>,
    pub scale: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repetitions: 100,
            warmup: 3,
            queries: QueryId::ALL.to_vec(),
            backends: BackendKind::ALL.to_vec(),
            scale: 1,
            seed: 42,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if self.scale == 0 {
            return Err(BenchError::Config("scale must be at least 1".into()));
        }
        if self.backends.is_empty() {
            return Err(BenchError::Config("no backend selected".into()));
        }
        Ok(())
    }
}

/// Latency statistics in microseconds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub samples: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl Stats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Stats { samples: 0, mean: 0.0, min: 0.0, max: 0.0, stddev: 0.0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Summation rounding can push the mean a hair outside [min, max].
        Stats { samples: n, mean: mean.clamp(min, max), min, max, stddev: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryTiming {
    pub backend: BackendKind,
    pub query: QueryId,
    pub result_rows: usize,
    pub stats: Stats,
    /// Per-repetition latencies in microseconds, in run order.
    pub samples_us: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub timings: Vec<QueryTiming>,
    pub storage: Vec<StorageReport>,
    pub environment: String,
    /// Soft-check violations.
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn timing(&self, backend: BackendKind, query: QueryId) -> Option<&QueryTiming> {
        self.timings.iter().find(|t| t.backend == backend && t.query == query)
    }
}

impl Serialize for QueryId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for QueryId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub fn environment_note() -> String {
    format!(
        "{}-{} cpus={} build={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
        if cfg!(debug_assertions) { "debug" } else { "optimized" },
    )
}

/// Catalogs holding the same corpus on each backend, plus its oracle.
#[derive(Debug)]
pub struct BenchFixture {
    pub catalogs: Vec<Catalog>,
    pub oracle: OracleCorpus,
    pub ingest: IngestReport,
}

/// Load time of the first document ingested into a fixture.
pub const FIXTURE_EPOCH: Timestamp = Timestamp::from_millis(1_600_000_000_000);

impl BenchFixture {
    /// Ingests the manifest at `manifest` into one catalog per backend.
    pub fn from_manifest(manifest: &Path, schema: &VaultSchema, backends: &[BackendKind]) -> Result<Self, BenchError> {
        let manifest = load_manifest(manifest)?;
        let mut catalogs = backends.iter().map(|&k| Catalog::new(k, schema)).collect::<Result<Vec<_>, _>>()?;
        let mut clock = SteppingClock::new(FIXTURE_EPOCH, 1000);
        let (ingest, documents) = run_etl_collect(&manifest, &mut catalogs, &mut clock);
        let dispatch = schema.dispatch_entries().map(|(l, s)| (l.to_owned(), s.to_owned())).collect();
        Ok(BenchFixture { catalogs, oracle: OracleCorpus::new(documents, dispatch), ingest })
    }

    /// Generates the scaled corpus into a temporary directory and ingests it.
    pub fn generated(scale: usize, seed: u64, backends: &[BackendKind]) -> Result<Self, BenchError> {
        let dir = tempfile::tempdir()?;
        let manifest = generate_scaled_corpus(scale, seed).write_to(dir.path())?;
        BenchFixture::from_manifest(&manifest, &define_schema_tectoniq(), backends)
    }

    pub fn backend(&self, kind: BackendKind) -> Result<&dyn Backend, BenchError> {
        self.catalogs
            .iter()
            .find(|c| c.backend().kind() == kind)
            .map(Catalog::backend)
            .ok_or(BenchError::MissingBackend(kind))
    }
}

fn expected_results(fixture: &BenchFixture, queries: &[QueryId]) -> BTreeMap<QueryId, ResultSet> {
    queries.iter().map(|&q| (q, fixture.oracle.scan(&q.predicates(), q.two_phase()))).collect()
}

fn check(backend: BackendKind, query: QueryId, expected: &ResultSet, actual: &ResultSet) -> Result<(), BenchError> {
    if expected != actual {
        return Err(BenchError::OracleMismatch {
            backend,
            query: query.to_string(),
            expected: expected.len(),
            actual: actual.len(),
        });
    }
    Ok(())
}

/// Runs warmups then timed repetitions of every query, in query order, per
/// backend. Each run's result is compared with the oracle outside the timed
/// region; a mismatch aborts.
pub fn run_benchmark(config: &BenchConfig, fixture: &BenchFixture) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let expected = expected_results(fixture, &config.queries);
    let mut timings = Vec::new();
    let mut storage = Vec::new();
    for &kind in &config.backends {
        let backend = fixture.backend(kind)?;
        let schema = backend.schema().expect("fixture catalogs are initialized");
        for &query in &config.queries {
            let plan = plan(schema, &query.predicates(), query.two_phase())?;
            let want = &expected[&query];
            for _ in 0..config.warmup {
                check(kind, query, want, &execute(&plan, backend)?)?;
            }
            let mut samples = Vec::with_capacity(config.repetitions);
            for _ in 0..config.repetitions {
                let started = Instant::now();
                let result = execute(&plan, backend)?;
                let elapsed = started.elapsed();
                check(kind, query, want, &result)?;
                samples.push(elapsed.as_nanos() as f64 / 1000.0);
            }
            timings.push(QueryTiming {
                backend: kind,
                query,
                result_rows: want.len(),
                stats: Stats::from_samples(&samples),
                samples_us: samples,
            });
        }
        storage.push(backend.storage_report());
    }
    let mut report = BenchReport { config: config.clone(), timings, storage, environment: environment_note(), warnings: Vec::new() };
    report.warnings = two_phase_warnings(&report);
    Ok(report)
}

/// Q5 is expected to be slower on average than each of Q1–Q4.
pub fn two_phase_warnings(report: &BenchReport) -> Vec<String> {
    let mut warnings = Vec::new();
    for &kind in &report.config.backends {
        let Some(q5) = report.timing(kind, QueryId::Q5) else { continue };
        for q in [QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4] {
            if let Some(t) = report.timing(kind, q) {
                if q5.stats.mean <= t.stats.mean {
                    warnings.push(format!(
                        "{kind}: Q5 mean {:.1} us does not exceed {q} mean {:.1} us",
                        q5.stats.mean, t.stats.mean
                    ));
                }
            }
        }
    }
    warnings
}

/// Concurrent-reader stress: `readers` threads run every query `rounds`
/// times against each backend, validating results. Returns the number of
/// validated executions; timings are not collected.
pub fn run_stress(config: &BenchConfig, fixture: &BenchFixture, readers: usize, rounds: usize) -> Result<usize, BenchError> {
    config.validate()?;
    let expected = expected_results(fixture, &config.queries);
    let mut total = 0;
    for &kind in &config.backends {
        let backend = fixture.backend(kind)?;
        let schema = backend.schema().expect("fixture catalogs are initialized");
        let plans = config
            .queries
            .iter()
            .map(|&q| plan(schema, &q.predicates(), q.two_phase()).map(|p| (q, p)))
            .collect::<Result<Vec<_>, _>>()?;
        let outcomes: Vec<Result<usize, BenchError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..readers.max(1))
                .map(|_| {
                    scope.spawn(|| {
                        let mut runs = 0;
                        for _ in 0..rounds {
                            for (q, p) in &plans {
                                check(kind, *q, &expected[q], &execute(p, backend)?)?;
                                runs += 1;
                            }
                        }
                        Ok(runs)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("reader thread panicked")).collect()
        });
        for o in outcomes {
            total += o?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_stats_collapse() {
        let s = Stats::from_samples(&[5.0]);
        assert_eq!((s.mean, s.min, s.max, s.stddev), (5.0, 5.0, 5.0, 0.0));
        let s = Stats::from_samples(&[1.0, 3.0]);
        assert_eq!((s.mean, s.min, s.max, s.stddev), (2.0, 1.0, 3.0, 1.0));
    }

    #[test]
    fn rejects_degenerate_configs() {
        let c = BenchConfig { repetitions: 0, ..BenchConfig::default() };
        assert!(c.validate().is_err());
        let c = BenchConfig { scale: 0, ..BenchConfig::default() };
        assert!(c.validate().is_err());
    }
}
