//! Labeled file lists: JSON Lines, with a CSV import shim.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> ManifestError {
    ManifestError::Malformed { path: path.to_owned(), line, reason: reason.into() }
}

/// Reads a manifest; `.csv` files go through the shim, anything else is
/// JSON Lines. Relative paths are resolved against the manifest directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_owned(), source })?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut entries = if is_csv { parse_csv(path, &text)? } else { parse_jsonl(path, &text)? };
    let base = path.parent().unwrap_or(Path::new(""));
    for e in &mut entries {
        if e.path.is_relative() {
            e.path = base.join(&e.path);
        }
    }
    validate(path, &entries)?;
    Ok(entries)
}

pub fn parse_jsonl(path: &Path, text: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: ManifestEntry = serde_json::from_str(line).map_err(|e| malformed(path, i + 1, e.to_string()))?;
        out.push(e);
    }
    Ok(out)
}

/// Header row naming `path` and `label`, optionally `split`.
pub fn parse_csv(path: &Path, text: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ManifestEntry>().enumerate() {
        out.push(row.map_err(|e| malformed(path, i + 2, e.to_string()))?);
    }
    Ok(out)
}

fn validate(path: &Path, entries: &[ManifestEntry]) -> Result<(), ManifestError> {
    let mut seen = HashSet::new();
    for (i, e) in entries.iter().enumerate() {
        if e.label.is_empty() {
            return Err(malformed(path, i + 1, "empty label"));
        }
        if !seen.insert(&e.path) {
            return Err(malformed(path, i + 1, format!("duplicate path {}", e.path.display())));
        }
    }
    Ok(())
}

pub fn write_jsonl(mut w: impl Write, entries: &[ManifestEntry]) -> std::io::Result<()> {
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_and_csv_agree() {
        let p = Path::new("m");
        let a = parse_jsonl(p, "{\"path\":\"a.mp4\",\"label\":\"x\"}\n\n{\"path\":\"b.mp4\",\"label\":\"y\",\"split\":\"test\"}\n").unwrap();
        let b = parse_csv(p, "path,label,split\na.mp4,x,\nb.mp4,y,test\n").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].split.as_deref(), Some("test"));
        assert_eq!(b[1], a[1]);
        assert_eq!(b[0].path, a[0].path);
    }

    #[test]
    fn rejects_duplicates_and_empty_labels() {
        let p = Path::new("m");
        let dup = parse_jsonl(p, "{\"path\":\"a\",\"label\":\"x\"}\n{\"path\":\"a\",\"label\":\"y\"}\n").unwrap();
        assert!(validate(p, &dup).is_err());
        let empty = parse_jsonl(p, "{\"path\":\"a\",\"label\":\"\"}\n").unwrap();
        assert!(validate(p, &empty).is_err());
        assert!(parse_jsonl(p, "{\"path\":1}\n").is_err());
    }
}
