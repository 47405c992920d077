//! Content-addressed result cache. Keys hash the resolved configuration
//! together with the tool version; entries are written to a temporary file
//! and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::run::{TOOL, VERSION};

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "ZETAGLUE_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheEntry {
    pub version: String,
    pub key: String,
    pub pass: bool,
    pub json: String,
    pub csv: String,
}

pub fn key(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_string(&(TOOL, VERSION, cfg)).expect("configuration serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn default_dir(out: &Path) -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join(TOOL);
    }
    if let Some(home) = std::env::var_os("HOME") {
        return PathBuf::from(home).join(".cache").join(TOOL);
    }
    out.join(".zetaglue-cache")
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A valid entry for `key`; unreadable, corrupt or stale entries are
    /// removed.
    pub fn lookup(&self, key: &str) -> Option<CacheEntry> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(e) if e.version == VERSION && e.key == key => Some(e),
            _ => {
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    pub fn store(&self, entry: &CacheEntry) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!(".{}.{}.tmp", entry.key, std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string(entry).expect("entry serializes").as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(&entry.key))
    }
}
