//! Stage output directories: files written atomically, plus a
//! `manifest.yaml` recording the seed, configuration digest and file hashes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomic;
use crate::error::Result;

pub const MANIFEST_NAME: &str = "manifest.yaml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub seed: u64,
    pub config_digest: String,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

/// A named file destined for a stage directory.
pub type Output = (String, Vec<u8>);

/// Writes `files` into `dir` and then the manifest listing them by name.
pub fn write_stage(dir: &Path, stage: &str, seed: u64, config_digest: &str, mut files: Vec<Output>) -> Result<()> {
    files.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, bytes) in &files {
        atomic::write(&dir.join(name), bytes)?;
    }
    let manifest = Manifest {
        stage: stage.into(),
        seed,
        config_digest: config_digest.into(),
        files: files
            .iter()
            .map(|(name, bytes)| FileEntry {
                name: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect(),
    };
    let text = serde_yaml::to_string(&manifest).expect("manifest serializes");
    atomic::write(&dir.join(MANIFEST_NAME), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_files_sorted_with_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![("b.csv".to_string(), b"x".to_vec()), ("a.csv".to_string(), Vec::new())];
        write_stage(dir.path(), "featex", 3, "abc", files).unwrap();
        let m: Manifest =
            serde_yaml::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
        assert_eq!(m.seed, 3);
        assert_eq!(m.files[0].name, "a.csv");
        assert_eq!(
            m.files[0].sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(std::fs::read(dir.path().join("b.csv")).unwrap(), b"x");
    }
}
