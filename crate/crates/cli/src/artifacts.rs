//! In-memory artifact collection with an all-or-nothing commit to disk.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "run-manifest.json";
pub const RESOLVED_CONFIG: &str = "resolved-config.toml";

#[derive(Debug, Default, Clone)]
pub struct ArtifactSet {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    subcommand: &'a str,
    seed: u64,
    started_unix: f64,
    finished_unix: f64,
    artifacts: Vec<ManifestEntry<'a>>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).context("json")?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ArtifactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        self.files.retain(|(n, _)| *n != name);
        self.files.push((name, bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.add(name, to_json(value)?);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Adds the manifest and writes every file as a temporary then renames
    /// it into place. On failure nothing from this set is left behind.
    pub fn commit(mut self, dir: &Path, subcommand: &str, seed: u64, started: f64) -> Result<Vec<PathBuf>> {
        let manifest = Manifest {
            tool: "wavezar",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            started_unix: started,
            finished_unix: unix_now(),
            artifacts: self
                .files
                .iter()
                .map(|(n, b)| ManifestEntry { file: n, bytes: b.len(), sha256: sha256_hex(b) })
                .collect(),
        };
        let manifest = to_json(&manifest)?;
        self.add(MANIFEST, manifest);

        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let mut temps = Vec::new();
        let result = (|| -> Result<Vec<PathBuf>> {
            for (name, bytes) in &self.files {
                let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
                temps.push(tmp.clone());
                fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
            }
            let mut done = Vec::new();
            for ((name, _), tmp) in self.files.iter().zip(&temps) {
                let dest = dir.join(name);
                fs::rename(tmp, &dest).with_context(|| format!("cannot move {} into place", dest.display()))?;
                done.push(dest);
            }
            Ok(done)
        })();
        if result.is_err() {
            for tmp in &temps {
                let _ = fs::remove_file(tmp);
            }
            for (name, _) in &self.files {
                let _ = fs::remove_file(dir.join(name));
            }
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = ArtifactSet::new();
        set.add("a.csv", b"x\n1\n".to_vec());
        set.add_json("b.json", &vec![1.5, 2.0]).unwrap();
        let paths = set.commit(dir.path(), "simulate", 7, 0.0).unwrap();
        assert_eq!(paths.len(), 3);
        let manifest: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["artifacts"][0]["sha256"], sha256_hex(b"x\n1\n"));
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with('.'))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn failed_commit_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        // A directory where a file should go makes the rename fail.
        fs::create_dir(dir.path().join("b.json")).unwrap();
        fs::write(dir.path().join("b.json").join("keep"), b"").unwrap();
        let mut set = ArtifactSet::new();
        set.add("a.csv", b"1\n".to_vec());
        set.add("b.json", b"{}\n".to_vec());
        assert!(set.commit(dir.path(), "simulate", 1, 0.0).is_err());
        let names: Vec<String> =
            fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
        assert_eq!(names, vec!["b.json".to_string()]);
    }
}
