//! Manifest-driven ingestion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::vault::catalog::Catalog;
use crate::vault::clock::Clock;
use crate::vault::document::DocumentMetadata;
use crate::vault::key::LinkId;

use super::extract::{extract_file, relative_uri, ExtractError, Extracted, RawDocument};
use super::manifest::{CorpusManifest, ManifestEntry, SourceKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IngestFailure {
    pub uri: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SourceReport {
    pub files: usize,
    /// Documents stored, one link each.
    pub documents: usize,
    /// Instances carried by the stored documents.
    pub instances: usize,
    pub expected_instances: Option<usize>,
    pub failures: Vec<IngestFailure>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub sources: BTreeMap<String, SourceReport>,
    /// Links added to the catalog during the run.
    pub links_inserted: usize,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

impl IngestReport {
    pub fn source(&self, kind: SourceKind) -> Option<&SourceReport> {
        self.sources.get(kind.as_str())
    }

    pub fn documents(&self) -> usize {
        self.sources.values().map(|s| s.documents).sum()
    }

    pub fn instances(&self) -> usize {
        self.sources.values().map(|s| s.instances).sum()
    }

    pub fn failures(&self) -> usize {
        self.sources.values().map(|s| s.failures.len()).sum()
    }

    pub fn files(&self) -> usize {
        self.sources.values().map(|s| s.files).sum()
    }

    /// Sources whose instance count differs from the manifest's expectation.
    pub fn count_mismatches(&self) -> Vec<(String, usize, usize)> {
        self.sources
            .iter()
            .filter_map(|(k, s)| s.expected_instances.filter(|&e| e != s.instances).map(|e| (k.clone(), e, s.instances)))
            .collect()
    }
}

/// Files a manifest entry stands for, sorted by path. Directories list the
/// kind's payload extension; pictures' `.json` sidecars are not payloads.
pub fn entry_files(entry: &ManifestEntry) -> std::io::Result<Vec<PathBuf>> {
    if entry.resolved.is_file() {
        return Ok(vec![entry.resolved.clone()]);
    }
    let ext = entry.kind.extension();
    let mut files: Vec<PathBuf> = std::fs::read_dir(&entry.resolved)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)))
        .collect();
    files.sort();
    Ok(files)
}

/// Outcome of extracting one file.
#[derive(Debug)]
pub struct FileExtraction {
    pub kind: SourceKind,
    pub uri: String,
    pub result: Result<Extracted, ExtractError>,
}

/// Reads and extracts every file of the manifest, in parallel, returned in
/// manifest then path order.
pub fn extract_manifest(manifest: &CorpusManifest) -> Vec<FileExtraction> {
    let mut tasks: Vec<(SourceKind, PathBuf)> = Vec::new();
    let mut listing_failures = Vec::new();
    for entry in &manifest.entries {
        match entry_files(entry) {
            Ok(files) => tasks.extend(files.into_iter().map(|f| (entry.kind, f))),
            Err(source) => listing_failures.push(FileExtraction {
                kind: entry.kind,
                uri: relative_uri(&entry.resolved, &manifest.base_dir),
                result: Err(ExtractError::Io { uri: entry.path.clone(), source }),
            }),
        }
    }
    let base: &Path = &manifest.base_dir;
    let mut out: Vec<FileExtraction> = tasks
        .par_iter()
        .map(|(kind, path)| {
            let uri = relative_uri(path, base);
            let result = RawDocument::read(*kind, path, base).and_then(|raw| extract_file(&raw));
            FileExtraction { kind: *kind, uri, result }
        })
        .collect();
    out.extend(listing_failures);
    out
}

/// Ingests a manifest into every catalog, giving each document the same
/// load time in all of them. Returns the report and the stored documents
/// with their link ids (taken from the first catalog).
pub fn run_etl_collect(
    manifest: &CorpusManifest,
    catalogs: &mut [Catalog],
    clock: &mut dyn Clock,
) -> (IngestReport, Vec<(LinkId, DocumentMetadata)>) {
    let started = Instant::now();
    let mut report = IngestReport::default();
    for entry in &manifest.entries {
        let source = report.sources.entry(entry.kind.as_str().to_owned()).or_default();
        if let Some(n) = entry.expected_instances {
            *source.expected_instances.get_or_insert(0) += n;
        }
    }
    let mut stored = Vec::new();
    for file in extract_manifest(manifest) {
        let source = report.sources.entry(file.kind.as_str().to_owned()).or_default();
        source.files += 1;
        let extracted = match file.result {
            Ok(e) => e,
            Err(e) => {
                source.failures.push(IngestFailure { uri: file.uri, message: e.to_string() });
                continue;
            }
        };
        source.warnings.extend(extracted.warnings);
        for doc in extracted.documents {
            let load_time = clock.now();
            let mut link = None;
            let mut failure = None;
            for catalog in catalogs.iter_mut() {
                match catalog.insert_document(&doc, load_time) {
                    Ok(outcome) => {
                        link.get_or_insert(outcome.link);
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            match (failure, link) {
                (Some(message), _) => source.failures.push(IngestFailure { uri: doc.source.to_string(), message }),
                (None, Some(link)) => {
                    source.documents += 1;
                    source.instances += doc.instance_count();
                    report.links_inserted += 1;
                    stored.push((link, doc));
                }
                (None, None) => {}
            }
        }
    }
    report.elapsed = started.elapsed();
    (report, stored)
}

pub fn run_etl(manifest: &CorpusManifest, catalogs: &mut [Catalog], clock: &mut dyn Clock) -> IngestReport {
    run_etl_collect(manifest, catalogs, clock).0
}
