//! `metavault` command-line interface.
//!
//! Catalog location: `--data-dir`, else `$METAVAULT_DATA_DIR`, else
//! `./metavault-data`. Results go to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 integrity, 5 oracle mismatch.

use std::fs::{File, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metavault::bench::{emit_report, generate_scaled_corpus, run_benchmark, run_stress, BenchConfig, BenchError, BenchFixture};
use metavault::etl::dates::parse_source_date;
use metavault::etl::{load_manifest, run_etl, ManifestError};
use metavault::query::{execute, parse_query, plan_as_of, ExecError, PlanError, QueryId};
use metavault::storage::{BackendKind, DocumentBackend, StorageError, SCHEMA_FILE};
use metavault::vault::schema_text::{export_schema, import_schema, SchemaTextError};
use metavault::vault::{define_schema_tectoniq, AsOf, Catalog, CatalogError, Clock, SteppingClock, SystemClock, Timestamp, VaultSchema};

const DEFAULT_DATA_DIR: &str = "metavault-data";
const LOCK_FILE: &str = "LOCK";

#[derive(Debug, Parser)]
#[command(name = "metavault", version, about = "Data-vault metadata catalog over a relational and a document backend")]
struct Cli {
    /// Catalog directory [default: ./metavault-data]
    #[arg(long, global = true, env = "METAVAULT_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create, evolve or print the vault schema.
    #[command(subcommand)]
    Schema(SchemaCommand),
    /// Load every source listed in a corpus manifest into both backends.
    Ingest {
        manifest: PathBuf,
        /// Load time of the first document (epoch millis, RFC 3339 or
        /// YYYY-MM-DD); later documents step by one millisecond. Defaults to
        /// the wall clock.
        #[arg(long, value_parser = parse_instant)]
        load_time: Option<Timestamp>,
    },
    /// Run a conjunctive query and print matching documents as JSON lines.
    Query {
        expr: String,
        /// Also fetch each match's category satellite.
        #[arg(long)]
        two_phase: bool,
        #[arg(long, default_value = "relational")]
        backend: BackendKind,
        /// Read satellites as they were at this instant.
        #[arg(long, value_parser = parse_instant)]
        as_of: Option<Timestamp>,
    },
    /// Print the document-model export of one entity (every entity if omitted).
    Export { entity: Option<String> },
    /// Time the reference queries on a generated or manifest corpus.
    Bench(BenchArgs),
    /// Print the storage footprint as CSV.
    Report {
        /// Per-entity data/index breakdown for one backend instead of the
        /// side-by-side totals.
        #[arg(long)]
        backend: Option<BackendKind>,
    },
    /// Write the synthetic corpus and its manifest.
    GenCorpus {
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SchemaCommand {
    /// Initialize an empty catalog, with the built-in schema or one read from a file.
    Init { file: Option<PathBuf> },
    /// Install an additive evolution of the current schema read from a file.
    Evolve { file: PathBuf },
    /// Print the current schema in text form.
    Show,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON file with BenchConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated query ids, e.g. Q1,Q5.
    #[arg(long, value_delimiter = ',')]
    queries: Option<Vec<QueryId>>,
    #[arg(long, value_delimiter = ',')]
    backend: Option<Vec<BackendKind>>,
    /// Benchmark this corpus instead of the generated one.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Run the concurrent-reader check with this many threads instead of timing.
    #[arg(long)]
    stress: Option<usize>,
    #[arg(long, default_value_t = 10, requires = "stress")]
    rounds: usize,
}

fn parse_instant(text: &str) -> Result<Timestamp, String> {
    if let Ok(millis) = text.parse::<i64>() {
        return Ok(Timestamp::from_millis(millis));
    }
    parse_source_date(text).ok_or_else(|| format!("`{text}` is not epoch millis, RFC 3339 or YYYY-MM-DD"))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Integrity(String),
    OracleMismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Integrity(_) => 4,
            Failure::OracleMismatch(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Integrity(m) | Failure::OracleMismatch(m) => m,
        }
    }
}

impl From<StorageError> for Failure {
    fn from(e: StorageError) -> Self {
        if e.is_integrity() || matches!(e, StorageError::Corrupt { .. }) {
            Failure::Integrity(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Storage(e) => e.into(),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::OracleMismatch { .. } => Failure::OracleMismatch(e.to_string()),
            BenchError::Catalog(e) => e.into(),
            BenchError::Exec(ExecError::Storage(e)) => e.into(),
            BenchError::Config(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<ExecError> for Failure {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Storage(e) => e.into(),
            other => Failure::Data(other.to_string()),
        }
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Data(e.to_string())
            }
        }
    )*};
}

data_errors!(ManifestError, PlanError, SchemaTextError, serde_json::Error, csv::Error);

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

/// Advisory lock on the data directory, released on drop.
struct DirLock(#[allow(dead_code)] File);

impl DirLock {
    fn acquire(dir: &Path, exclusive: bool) -> Result<Self, Failure> {
        if !exclusive && !dir.is_dir() {
            return Err(Failure::Data(format!("no catalog in {}", dir.display())));
        }
        std::fs::create_dir_all(dir).map_err(io_failure(dir))?;
        let path = dir.join(LOCK_FILE);
        let file = File::options().create(true).truncate(false).write(true).open(&path).map_err(io_failure(&path))?;
        let locked = if exclusive { file.try_lock() } else { file.try_lock_shared() };
        match locked {
            Ok(()) => Ok(DirLock(file)),
            Err(TryLockError::WouldBlock) => {
                Err(Failure::Data(format!("{} is locked by another metavault process", dir.display())))
            }
            Err(TryLockError::Error(e)) => Err(io_failure(&path)(e)),
        }
    }
}

fn backend_dir(data_dir: &Path, kind: BackendKind) -> PathBuf {
    data_dir.join(kind.as_str())
}

fn is_initialized(data_dir: &Path) -> bool {
    BackendKind::ALL.iter().any(|&k| backend_dir(data_dir, k).join(SCHEMA_FILE).exists())
}

fn existing_backend_dir(data_dir: &Path, kind: BackendKind) -> Result<PathBuf, Failure> {
    let dir = backend_dir(data_dir, kind);
    if !dir.join(SCHEMA_FILE).exists() {
        return Err(Failure::Data(format!(
            "no catalog in {}; run `metavault schema init` first",
            data_dir.display()
        )));
    }
    Ok(dir)
}

fn open_catalog(data_dir: &Path, kind: BackendKind) -> Result<Catalog, Failure> {
    Ok(Catalog::open(kind, &existing_backend_dir(data_dir, kind)?)?)
}

fn open_all(data_dir: &Path) -> Result<Vec<Catalog>, Failure> {
    BackendKind::ALL.iter().map(|&k| open_catalog(data_dir, k)).collect()
}

fn save_all(data_dir: &Path, catalogs: &[Catalog]) -> Result<(), Failure> {
    for c in catalogs {
        c.save(&backend_dir(data_dir, c.backend().kind()))?;
    }
    Ok(())
}

fn read_schema(path: &Path) -> Result<VaultSchema, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_failure(path))?;
    Ok(import_schema(&text)?)
}

fn schema_command(data_dir: &Path, command: SchemaCommand, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        SchemaCommand::Init { file } => {
            let _lock = DirLock::acquire(data_dir, true)?;
            if is_initialized(data_dir) {
                return Err(Failure::Data(format!("{} already holds a catalog", data_dir.display())));
            }
            let schema = match file {
                Some(path) => read_schema(&path)?,
                None => define_schema_tectoniq(),
            };
            let catalogs = BackendKind::ALL.iter().map(|&k| Catalog::new(k, &schema)).collect::<Result<Vec<_>, _>>()?;
            save_all(data_dir, &catalogs)?;
            eprintln!("initialized {} at schema version {}", data_dir.display(), schema.version());
        }
        SchemaCommand::Evolve { file } => {
            let _lock = DirLock::acquire(data_dir, true)?;
            let schema = read_schema(&file)?;
            let mut catalogs = open_all(data_dir)?;
            for c in &mut catalogs {
                if !schema.is_additive_evolution_of(c.schema()) {
                    return Err(Failure::Data(format!(
                        "{} is not an additive evolution of schema version {}",
                        file.display(),
                        c.schema().version()
                    )));
                }
                c.evolve(&schema)?;
            }
            save_all(data_dir, &catalogs)?;
            eprintln!("schema now at version {}", schema.version());
        }
        SchemaCommand::Show => {
            let _lock = DirLock::acquire(data_dir, false)?;
            let catalog = open_catalog(data_dir, BackendKind::Relational)?;
            write_out(out, export_schema(catalog.schema()).as_bytes())?;
        }
    }
    Ok(())
}

fn ingest(data_dir: &Path, manifest: &Path, load_time: Option<Timestamp>, out: &mut dyn Write) -> Result<(), Failure> {
    let _lock = DirLock::acquire(data_dir, true)?;
    let manifest = load_manifest(manifest)?;
    let mut catalogs = open_all(data_dir)?;
    let mut clock: Box<dyn Clock> = match load_time {
        Some(t) => Box::new(SteppingClock::new(t, 1)),
        None => Box::new(SystemClock::default()),
    };
    let report = run_etl(&manifest, &mut catalogs, clock.as_mut());
    save_all(data_dir, &catalogs)?;

    for (source, s) in &report.sources {
        for f in &s.failures {
            eprintln!("{source}: {}: {}", f.uri, f.message);
        }
        for w in &s.warnings {
            eprintln!("{source}: warning: {w}");
        }
    }
    for (source, expected, actual) in report.count_mismatches() {
        eprintln!("{source}: manifest expects {expected} instances, found {actual}");
    }
    eprintln!(
        "ingested {} documents ({} instances) from {} files in {} ms, {} failures",
        report.documents(),
        report.instances(),
        report.files(),
        report.elapsed.as_millis(),
        report.failures()
    );
    // Elapsed time stays on stderr so the payload is reproducible.
    let mut payload = serde_json::to_value(&report)?;
    if let Some(map) = payload.as_object_mut() {
        map.remove("elapsed_ms");
    }
    let mut line = serde_json::to_string(&payload)?;
    line.push('\n');
    write_out(out, line.as_bytes())
}

fn query(
    data_dir: &Path,
    expr: &str,
    two_phase: bool,
    backend: BackendKind,
    as_of: Option<Timestamp>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let predicates = parse_query(expr).map_err(|e| Failure::Usage(format!("query: {e}")))?;
    let _lock = DirLock::acquire(data_dir, false)?;
    let catalog = open_catalog(data_dir, backend)?;
    let as_of = as_of.map_or(AsOf::Latest, AsOf::At);
    let plan = plan_as_of(catalog.schema(), &predicates, two_phase, as_of)?;
    let result = execute(&plan, catalog.backend())?;
    eprintln!("{} rows", result.len());
    write_out(out, result.to_json_lines().as_bytes())
}

fn export(data_dir: &Path, entity: Option<&str>, out: &mut dyn Write) -> Result<(), Failure> {
    let _lock = DirLock::acquire(data_dir, false)?;
    let backend = DocumentBackend::open(&existing_backend_dir(data_dir, BackendKind::Document)?)?;
    let value = match entity {
        Some(e) => backend.export_documents(e)?,
        None => backend.export_all()?,
    };
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_out(out, text.as_bytes())
}

fn report(data_dir: &Path, backend: Option<BackendKind>, out: &mut dyn Write) -> Result<(), Failure> {
    let _lock = DirLock::acquire(data_dir, false)?;
    let mut buf = Vec::new();
    match backend {
        Some(kind) => open_catalog(data_dir, kind)?.backend().storage_report().write_csv(&mut buf)?,
        None => {
            let reports = open_all(data_dir)?.iter().map(|c| c.backend().storage_report()).collect::<Vec<_>>();
            metavault::bench::emit::write_storage_comparison(&reports, &mut buf)?;
        }
    }
    write_out(out, &buf)
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_failure(path))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => BenchConfig::default(),
    };
    if let Some(v) = args.repetitions {
        config.repetitions = v;
    }
    if let Some(v) = args.warmup {
        config.warmup = v;
    }
    if let Some(v) = args.scale {
        config.scale = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.queries {
        config.queries = v;
    }
    if let Some(v) = args.backend {
        config.backends = v;
    }
    config.validate()?;

    let fixture = match &args.manifest {
        Some(m) => BenchFixture::from_manifest(m, &define_schema_tectoniq(), &config.backends)?,
        None => BenchFixture::generated(config.scale, config.seed, &config.backends)?,
    };
    eprintln!("fixture: {} documents, {} failures", fixture.ingest.documents(), fixture.ingest.failures());

    if let Some(readers) = args.stress {
        let runs = run_stress(&config, &fixture, readers, args.rounds)?;
        eprintln!("stress: {runs} executions across {readers} readers matched the oracle");
        return Ok(());
    }
    let report = run_benchmark(&config, &fixture)?;
    for t in &report.timings {
        eprintln!("{:<10} {} rows={:<5} mean={:.1}us", t.backend.as_str(), t.query, t.result_rows, t.stats.mean);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for path in emit_report(&report, &args.out).map_err(io_failure(&args.out))? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn gen_corpus(scale: usize, seed: u64, out_dir: &Path) -> Result<(), Failure> {
    if scale == 0 {
        return Err(Failure::Usage("scale must be at least 1".into()));
    }
    let corpus = generate_scaled_corpus(scale, seed);
    let manifest = corpus.write_to(out_dir).map_err(io_failure(out_dir))?;
    eprintln!(
        "wrote {} documents ({} instances); manifest {}",
        corpus.expected_documents(),
        corpus.expected_instances(),
        manifest.display()
    );
    Ok(())
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    out.write_all(bytes).and_then(|()| out.flush()).map_err(|e| Failure::Data(format!("stdout: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let data_dir = cli.data_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Schema(c) => schema_command(&data_dir, c, &mut stdout),
        Command::Ingest { manifest, load_time } => ingest(&data_dir, &manifest, load_time, &mut stdout),
        Command::Query { expr, two_phase, backend, as_of } => query(&data_dir, &expr, two_phase, backend, as_of, &mut stdout),
        Command::Export { entity } => export(&data_dir, entity.as_deref(), &mut stdout),
        Command::Bench(args) => bench(args),
        Command::Report { backend } => report(&data_dir, backend, &mut stdout),
        Command::GenCorpus { scale, seed, out } => gen_corpus(scale, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("metavault: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
