//! On-disk store: one JSON file per level plus a manifest of content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poset::{build_level, Level, PosetStore};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn level_file_name(n: usize) -> String {
    format!("level{n}.json")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub n: usize,
    pub count: usize,
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub store_dir: PathBuf,
    pub levels: Vec<LevelEntry>,
    pub total: usize,
    /// Wall-clock milliseconds per stage of the run that wrote this manifest.
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn levels_built(&self) -> usize {
        self.levels.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.count).collect()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn encode_level(level: &Level) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(level).expect("levels always serialize");
    bytes.push(b'\n');
    bytes
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(&path, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest always serializes");
    bytes.push(b'\n');
    write_file(&path, &bytes)
}

/// Reads and hash-checks one level file against its manifest entry.
fn read_level(dir: &Path, entry: &LevelEntry) -> Result<Level> {
    let path = dir.join(&entry.file);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let found = sha256_hex(&bytes);
    if found != entry.sha256 {
        return Err(Error::HashMismatch {
            path,
            expected: entry.sha256.clone(),
            found,
        });
    }
    let level: Level = serde_json::from_slice(&bytes).map_err(|e| Error::json(&path, e))?;
    if level.n != entry.n || level.len() != entry.count {
        return Err(Error::Corrupt(format!(
            "{} disagrees with the manifest",
            path.display()
        )));
    }
    Ok(level)
}

/// Loads every level listed in the manifest, failing on the first hash
/// mismatch before any level is parsed further.
pub fn load_store(dir: &Path) -> Result<PosetStore> {
    let manifest = read_manifest(dir)?;
    let mut levels = Vec::with_capacity(manifest.levels.len());
    for entry in &manifest.levels {
        levels.push(read_level(dir, entry)?);
    }
    PosetStore::from_levels(levels)
}

/// Longest prefix of manifest levels whose files still hash correctly.
fn valid_prefix(dir: &Path, manifest: &RunManifest) -> Vec<Level> {
    let mut levels = Vec::new();
    for (i, entry) in manifest.levels.iter().enumerate() {
        if entry.n != i + 1 {
            break;
        }
        match read_level(dir, entry) {
            Ok(level) => levels.push(level),
            Err(_) => break,
        }
    }
    levels
}

/// Builds levels `1..=max_level` into `dir`.
///
/// If the directory already holds a manifest whose level files hash
/// correctly through `max_level`, nothing is written and the existing
/// manifest is returned. Valid lower levels are reused; anything after
/// the first mismatch is rebuilt.
pub fn cmd_build(max_level: usize, dir: &Path) -> Result<RunManifest> {
    if max_level > crate::digraph::MAX_VERTICES {
        return Err(Error::Capacity(max_level));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let existing = read_manifest(dir).ok();
    let mut reused = existing
        .as_ref()
        .map(|m| valid_prefix(dir, m))
        .unwrap_or_default();
    if let Some(manifest) = &existing {
        if reused.len() >= max_level && reused.len() == manifest.levels.len() {
            return Ok(manifest.clone());
        }
    }
    reused.truncate(max_level);

    let mut timings = BTreeMap::new();
    let mut store = PosetStore::new();
    let mut entries = Vec::new();
    let mut start = Instant::now();
    for level in reused {
        store.push_level(level)?;
    }
    timings.insert("load".to_string(), start.elapsed().as_millis() as u64);
    for n in 1..=max_level {
        if n > store.max_level() {
            start = Instant::now();
            let level = build_level(&store, n)?;
            store.push_level(level)?;
            timings.insert(format!("level{n}"), start.elapsed().as_millis() as u64);
        }
        let level = store.level(n)?;
        let bytes = encode_level(level);
        let file = level_file_name(n);
        write_file(&dir.join(&file), &bytes)?;
        entries.push(LevelEntry {
            n,
            count: level.len(),
            file,
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        store_dir: dir.to_path_buf(),
        total: entries.iter().map(|e| e.count).sum(),
        levels: entries,
        timings_ms: timings,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_then_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = cmd_build(3, dir.path()).unwrap();
        assert_eq!(manifest.counts(), vec![2, 10, 104]);
        let store = load_store(dir.path()).unwrap();
        assert_eq!(store.counts(), vec![2, 10, 104]);
        assert_eq!(store.levels(), PosetStore::build(3).unwrap().levels());
    }

    #[test]
    fn rebuild_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let first = cmd_build(2, dir.path()).unwrap();
        let before = fs::read(dir.path().join(MANIFEST_FILE)).unwrap();
        let second = cmd_build(2, dir.path()).unwrap();
        assert_eq!(first, second);
        assert_eq!(before, fs::read(dir.path().join(MANIFEST_FILE)).unwrap());
        // asking for fewer levels than stored is also satisfied
        assert_eq!(cmd_build(1, dir.path()).unwrap(), first);
    }

    #[test]
    fn corrupted_level_is_detected_and_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = cmd_build(2, dir.path()).unwrap();
        let path = dir.path().join(level_file_name(2));
        let mut bytes = fs::read(&path).unwrap();
        bytes.insert(1, b' ');
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_store(dir.path()),
            Err(Error::HashMismatch { .. })
        ));

        let rebuilt = cmd_build(2, dir.path()).unwrap();
        assert_eq!(rebuilt.levels, manifest.levels);
        assert!(load_store(dir.path()).is_ok());
    }

    #[test]
    fn extends_an_existing_store() {
        let dir = tempfile::tempdir().unwrap();
        let small = cmd_build(2, dir.path()).unwrap();
        let bigger = cmd_build(3, dir.path()).unwrap();
        assert_eq!(&bigger.levels[..2], &small.levels[..]);
        assert_eq!(bigger.total, 116);
    }

    #[test]
    fn rejects_oversized_request() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(cmd_build(6, dir.path()), Err(Error::Capacity(6))));
    }

    #[test]
    fn level_file_schema() {
        let store = PosetStore::build(2).unwrap();
        let v: serde_json::Value =
            serde_json::from_slice(&encode_level(store.level(2).unwrap())).unwrap();
        assert_eq!(v["n"], 2);
        let groups = v["groups"].as_array().unwrap();
        assert_eq!(groups.len(), 3);
        assert!(groups
            .iter()
            .all(|g| g["below"].is_array() && g["members"].is_array()));
        assert_eq!(groups[0]["below"][0], "1:0");
    }
}
