use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["utt_id", "speaker_id", "audio_path"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceRecord {
    pub utt_id: String,
    pub speaker_id: String,
    /// POSIX-style path relative to the manifest root.
    pub audio_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<UtteranceRecord>,
    pub root_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(records: Vec<UtteranceRecord>, root_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if r.utt_id.is_empty() || r.speaker_id.is_empty() {
                return Err(Error::Validation(format!(
                    "empty utt_id or speaker_id in record {r:?}"
                )));
            }
            if !seen.insert(r.utt_id.as_str()) {
                return Err(Error::Validation(format!("duplicate utt_id '{}'", r.utt_id)));
            }
        }
        Ok(Self {
            records,
            root_dir: root_dir.into(),
        })
    }

    pub fn resolve(&self, record: &UtteranceRecord) -> PathBuf {
        self.root_dir.join(&record.audio_path)
    }

    pub fn get(&self, utt_id: &str) -> Option<&UtteranceRecord> {
        self.records.iter().find(|r| r.utt_id == utt_id)
    }
}

/// Loads a `utt_id,speaker_id,audio_path` CSV; paths resolve against `root_dir`.
pub fn load_manifest(path: impl AsRef<Path>, root_dir: impl Into<PathBuf>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .clone();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != HEADER {
        let missing: Vec<&str> = HEADER.iter().copied().filter(|h| !got.contains(h)).collect();
        return Err(Error::Schema(format!(
            "{}: header must be exactly '{}' (got '{}'; missing: {:?})",
            path.display(),
            HEADER.join(","),
            got.join(","),
            missing
        )));
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Schema(format!("{} row {}: {e}", path.display(), i + 2)))?;
        records.push(UtteranceRecord {
            utt_id: row[0].trim().to_string(),
            speaker_id: row[1].trim().to_string(),
            audio_path: row[2].trim().to_string(),
        });
    }
    if records.is_empty() {
        log::warn!("{}: manifest has no records", path.display());
    }
    DatasetManifest::new(records, root_dir)
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(HEADER).map_err(|e| csv_io(path, e))?;
    for r in &manifest.records {
        w.write_record([&r.utt_id, &r.speaker_id, &r.audio_path])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Schema(format!("{}: {other:?}", path.display())),
    }
}
