//! Benchmark protocol: synthetic corpora, timed oracle-checked runs and
//! report files.

pub mod emit;
pub mod generator;
pub mod runner;

pub use emit::emit_report;
pub use generator::{generate_scaled_corpus, GeneratedCorpus};
pub use runner::{run_benchmark, run_stress, BenchConfig, BenchError, BenchFixture, BenchReport, QueryTiming, Stats};
