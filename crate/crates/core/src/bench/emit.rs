//! Report files.
//!
//! * `bench.csv`: `backend,query,statistic,value_us,samples`, one row per
//!   backend × query × statistic (mean, min, max, stddev).
//! * `plot.dat`: one block per (backend, query), headed by
//!   `# <backend> <query>`, with `repetition latency_us` lines; blocks are
//!   separated by two blank lines (gnuplot `index` convention).
//! * `storage.csv`: `entity,<backend>_bytes...` per entity plus `Total`.
//! * `storage-<backend>.csv`: `entity,data_bytes,index_bytes,total_bytes`.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::storage::StorageReport;

use super::runner::BenchReport;

pub fn write_bench_csv<W: Write>(report: &BenchReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["backend", "query", "statistic", "value_us", "samples"])?;
    for t in &report.timings {
        let s = &t.stats;
        for (name, value) in [("mean", s.mean), ("min", s.min), ("max", s.max), ("stddev", s.stddev)] {
            w.write_record([
                t.backend.as_str(),
                t.query.as_str(),
                name,
                &format!("{value:.3}"),
                &s.samples.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_plot_data<W: Write>(report: &BenchReport, mut out: W) -> std::io::Result<()> {
    for (i, t) in report.timings.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {} {}", t.backend, t.query)?;
        for (n, us) in t.samples_us.iter().enumerate() {
            writeln!(out, "{} {us:.3}", n + 1)?;
        }
    }
    Ok(())
}

/// Side-by-side total bytes per entity for every backend.
pub fn write_storage_comparison<W: Write>(reports: &[StorageReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["entity".to_owned()];
    header.extend(reports.iter().map(|r| format!("{}_bytes", r.backend)));
    w.write_record(&header)?;
    let entities: Vec<&str> = reports.first().map(|r| r.entities.iter().map(|e| e.entity.as_str()).collect()).unwrap_or_default();
    for entity in entities {
        let mut row = vec![entity.to_owned()];
        row.extend(reports.iter().map(|r| r.entity(entity).map_or(0, |e| e.total_bytes()).to_string()));
        w.write_record(&row)?;
    }
    let mut total = vec!["Total".to_owned()];
    total.extend(reports.iter().map(|r| r.total_bytes().to_string()));
    w.write_record(&total)?;
    w.flush()?;
    Ok(())
}

/// Writes every report file into `dir` and returns their paths.
pub fn emit_report(report: &BenchReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_err = |e: csv::Error| std::io::Error::other(e.to_string());
    let mut written = Vec::new();

    let path = dir.join("bench.csv");
    write_bench_csv(report, std::fs::File::create(&path)?).map_err(csv_err)?;
    written.push(path);

    let path = dir.join("plot.dat");
    write_plot_data(report, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    written.push(path);

    let path = dir.join("storage.csv");
    write_storage_comparison(&report.storage, std::fs::File::create(&path)?).map_err(csv_err)?;
    written.push(path);

    for s in &report.storage {
        let path = dir.join(format!("storage-{}.csv", s.backend));
        s.write_csv(std::fs::File::create(&path)?).map_err(csv_err)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::runner::{BenchConfig, QueryTiming, Stats};
    use crate::query::QueryId;
    use crate::storage::BackendKind;

    fn report(timings: Vec<QueryTiming>) -> BenchReport {
        BenchReport { config: BenchConfig::default(), timings, storage: Vec::new(), environment: String::new(), warnings: Vec::new() }
    }

    #[test]
    fn empty_query_set_is_header_only() {
        let mut buf = Vec::new();
        write_bench_csv(&report(Vec::new()), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "backend,query,statistic,value_us,samples\n");
    }

    #[test]
    fn one_row_per_statistic() {
        let t = QueryTiming {
            backend: BackendKind::Document,
            query: QueryId::Q2,
            result_rows: 3,
            stats: Stats::from_samples(&[1.0, 3.0]),
            samples_us: vec![1.0, 3.0],
        };
        let r = report(vec![t]);
        let mut buf = Vec::new();
        write_bench_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("document,Q2,stddev,1.000,2"));
        let mut plot = Vec::new();
        write_plot_data(&r, &mut plot).unwrap();
        assert_eq!(String::from_utf8(plot).unwrap(), "# document Q2\n1 1.000\n2 3.000\n");
    }
}
