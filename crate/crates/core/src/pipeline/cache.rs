//! On-disk cache of raw platform payloads, one file per zone, document type and day.
//!
//! Layout: `{root}/{zone}/{doc_type}/{YYYY-MM-DD}.xml` with a `.json` sidecar
//! holding the fetch time and the SHA-256 of the payload. Entries are never
//! rewritten; the hash is checked on every read.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::timefmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub zone: String,
    pub date: NaiveDate,
    pub document_type: String,
    pub payload: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
    pub sha256: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    zone: String,
    date: NaiveDate,
    document_type: String,
    fetched_at: String,
    sha256: String,
    bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn payload_path(&self, zone: &str, doc_type: &str, date: NaiveDate) -> PathBuf {
        self.root
            .join(zone)
            .join(doc_type)
            .join(format!("{}.xml", date.format("%Y-%m-%d")))
    }

    fn sidecar_path(payload: &Path) -> PathBuf {
        payload.with_extension("json")
    }

    pub fn contains(&self, zone: &str, doc_type: &str, date: NaiveDate) -> bool {
        Self::sidecar_path(&self.payload_path(zone, doc_type, date)).is_file()
    }

    /// The cached entry, verified against its recorded hash.
    pub fn get(&self, zone: &str, doc_type: &str, date: NaiveDate) -> Result<Option<CacheEntry>> {
        let path = self.payload_path(zone, doc_type, date);
        let side = Self::sidecar_path(&path);
        if !side.is_file() {
            return Ok(None);
        }
        let corrupt = |reason: String| Error::CorruptCache {
            path: path.clone(),
            reason,
        };
        let meta: Sidecar = serde_json::from_slice(&fs::read(&side)?)
            .map_err(|e| corrupt(format!("sidecar: {e}")))?;
        let payload = fs::read(&path).map_err(|e| corrupt(e.to_string()))?;
        let actual = sha256_hex(&payload);
        if actual != meta.sha256 {
            return Err(corrupt(format!("hash {actual} does not match recorded {}", meta.sha256)));
        }
        if meta.zone != zone || meta.document_type != doc_type || meta.date != date {
            return Err(corrupt("sidecar describes a different day".into()));
        }
        let fetched_at = timefmt::parse_utc(&meta.fetched_at).map_err(|e| corrupt(e.to_string()))?;
        Ok(Some(CacheEntry {
            zone: meta.zone,
            date,
            document_type: meta.document_type,
            payload,
            fetched_at,
            sha256: meta.sha256,
        }))
    }

    /// Stores a payload unless the day is already cached, and returns the
    /// entry that is on disk afterwards.
    pub fn put(
        &self,
        zone: &str,
        doc_type: &str,
        date: NaiveDate,
        payload: Vec<u8>,
        fetched_at: DateTime<Utc>,
    ) -> Result<CacheEntry> {
        if let Some(existing) = self.get(zone, doc_type, date)? {
            return Ok(existing);
        }
        let path = self.payload_path(zone, doc_type, date);
        let dir = path.parent().expect("payload path has a parent");
        fs::create_dir_all(dir)?;
        let sha256 = sha256_hex(&payload);
        let meta = Sidecar {
            zone: zone.to_string(),
            date,
            document_type: doc_type.to_string(),
            fetched_at: timefmt::format_utc(fetched_at),
            sha256: sha256.clone(),
            bytes: payload.len(),
        };
        // payload first, sidecar last: an entry exists once its sidecar does
        write_atomically(&path, &payload)?;
        write_atomically(&Self::sidecar_path(&path), &serde_json::to_vec_pretty(&meta)?)?;
        Ok(CacheEntry {
            zone: zone.to_string(),
            date,
            document_type: doc_type.to_string(),
            payload,
            fetched_at: timefmt::parse_utc(&meta.fetched_at)?,
            sha256,
        })
    }
}

pub(crate) fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
