//! Corpus manifest: one source per line.
//!
//! ```text
//! # comment
//! <kind> <path> [<expected-instances>]
//! ```
//!
//! `kind` is one of `inventory`, `voixdunord`, `irhis`, `book`. `path` is a
//! file or directory relative to the manifest's directory and may be double
//! quoted when it contains spaces. Blank lines and `#` comments are ignored.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: path {path} does not exist")]
    MissingPath { line: usize, path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKind {
    Inventory,
    VoixDuNord,
    Irhis,
    Book,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [SourceKind::Inventory, SourceKind::VoixDuNord, SourceKind::Irhis, SourceKind::Book];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Inventory => "inventory",
            SourceKind::VoixDuNord => "voixdunord",
            SourceKind::Irhis => "irhis",
            SourceKind::Book => "book",
        }
    }

    /// File extension of the payloads listed from a source directory.
    pub fn extension(self) -> &'static str {
        match self {
            SourceKind::Inventory | SourceKind::VoixDuNord => "xml",
            SourceKind::Irhis => "jpg",
            SourceKind::Book => "json",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown source kind `{s}` (expected inventory, voixdunord, irhis or book)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub kind: SourceKind,
    /// Path as written in the manifest.
    pub path: String,
    /// Path resolved against the manifest directory.
    pub resolved: PathBuf,
    pub expected_instances: Option<usize>,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

pub fn load_manifest(path: &Path) -> Result<CorpusManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_owned(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let manifest = parse_manifest(&text, base)?;
    for e in &manifest.entries {
        if !e.resolved.exists() {
            return Err(ManifestError::MissingPath { line: e.line, path: e.resolved.clone() });
        }
    }
    Ok(manifest)
}

/// Parses manifest text without touching the file system.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<CorpusManifest, ManifestError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields = split_fields(raw).map_err(|(column, message)| ManifestError::Parse { line, column, message })?;
        if fields.is_empty() {
            continue;
        }
        let err = |column: usize, message: String| ManifestError::Parse { line, column, message };
        let (kind_col, kind) = &fields[0];
        let kind: SourceKind = kind.parse().map_err(|m| err(*kind_col, m))?;
        let Some((_, path)) = fields.get(1) else {
            return Err(err(raw.len() + 1, format!("missing path after `{kind}`")));
        };
        let expected_instances = match fields.get(2) {
            None => None,
            Some((col, n)) => Some(n.parse::<usize>().map_err(|_| err(*col, format!("expected an instance count, found `{n}`")))?),
        };
        if let Some((col, extra)) = fields.get(3) {
            return Err(err(*col, format!("unexpected field `{extra}`")));
        }
        entries.push(ManifestEntry {
            kind,
            resolved: base_dir.join(path),
            path: path.clone(),
            expected_instances,
            line,
        });
    }
    Ok(CorpusManifest { base_dir: base_dir.to_owned(), entries })
}

/// Whitespace-separated fields with 1-based start columns; `#` starts a
/// comment outside quotes.
fn split_fields(line: &str) -> Result<Vec<(usize, String)>, (usize, String)> {
    let mut fields = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            break;
        }
        let mut field = String::new();
        if c == '"' {
            chars.next();
            loop {
                match chars.next() {
                    Some((_, '"')) => break,
                    Some((_, ch)) => field.push(ch),
                    None => return Err((start + 1, "unterminated quote".into())),
                }
            }
        } else {
            while let Some(&(_, ch)) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                field.push(ch);
                chars.next();
            }
        }
        fields.push((start + 1, field));
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_sources() {
        let text = "# corpus\ninventory inventory 49\nvoixdunord voixdunord/dossier.xml 30\n\nirhis \"irhis pics\" 30 # photos\nbook books\n";
        let m = parse_manifest(text, Path::new("/c")).unwrap();
        assert_eq!(m.entries.len(), 4);
        assert_eq!(m.entries[2].path, "irhis pics");
        assert_eq!(m.entries[2].resolved, Path::new("/c/irhis pics"));
        assert_eq!(m.entries[3].expected_instances, None);
        assert_eq!(m.entries[0].expected_instances, Some(49));
    }

    #[test]
    fn unknown_kind_reports_position() {
        let err = parse_manifest("inventory a\n  video clips 3\n", Path::new(".")).unwrap_err();
        match err {
            ManifestError::Parse { line, column, message } => {
                assert_eq!((line, column), (2, 3));
                assert!(message.contains("video"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn bad_count_and_missing_path() {
        assert!(matches!(parse_manifest("book b x", Path::new(".")), Err(ManifestError::Parse { column: 8, .. })));
        assert!(matches!(parse_manifest("book", Path::new(".")), Err(ManifestError::Parse { line: 1, .. })));
        assert!(parse_manifest("", Path::new(".")).unwrap().entries.is_empty());
    }
}
