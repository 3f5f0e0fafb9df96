//! Line-oriented manifest: `<clip_dir>\t<label>\t<split>\t<source_id>`.
//! Clip directories are resolved relative to the manifest's directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::io::write_atomic;
use super::{read_clip_dir, Clip, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path as written in the manifest.
    pub clip_dir: PathBuf,
    pub label: Label,
    pub split: Split,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.clip_dir)
    }

    pub fn load_clip(&self, entry: &ManifestEntry) -> Result<Clip> {
        read_clip_dir(&self.resolve(entry), entry.label, &entry.source_id)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(perr(
                lineno,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let label: Label = fields[1].parse().map_err(|e: Error| perr(lineno, e.to_string()))?;
        let split: Split = fields[2].parse().map_err(|e: Error| perr(lineno, e.to_string()))?;
        if fields[0].is_empty() || fields[3].is_empty() {
            return Err(perr(lineno, "empty clip path or source id".into()));
        }
        entries.push(ManifestEntry {
            clip_dir: PathBuf::from(fields[0]),
            label,
            split,
            source_id: fields[3].to_string(),
        });
    }

    let mut seen: HashMap<&str, Split> = HashMap::new();
    for e in &entries {
        match seen.get(e.source_id.as_str()) {
            Some(&s) if s != e.split => {
                return Err(Error::SplitViolation {
                    source_id: e.source_id.clone(),
                })
            }
            _ => {
                seen.insert(&e.source_id, e.split);
            }
        }
    }

    for e in &entries {
        let ann = root.join(&e.clip_dir).join("annotations.csv");
        if !ann.is_file() {
            return Err(Error::MissingAsset(ann));
        }
    }

    Ok(Manifest { root, entries })
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            e.clip_dir.display(),
            e.label.as_str(),
            e.split.as_str(),
            e.source_id
        ));
    }
    write_atomic(path, out.as_bytes())
}
