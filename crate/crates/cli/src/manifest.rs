use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::config::CliResult;

pub const RUN_MANIFEST: &str = "run_manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskStatus {
    pub name: String,
    pub status: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Box<RawValue>,
    pub library_version: String,
    pub tasks: Vec<TaskStatus>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Writes `contents` plus a trailing newline.
pub fn write_text(dir: &Path, name: &str, contents: &str) -> CliResult<String> {
    let mut s = contents.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    fs::write(dir.join(name), s)?;
    Ok(name.to_string())
}

/// Checksums `files` (relative to `dir`) and writes the run manifest.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: &impl Serialize,
    tasks: Vec<TaskStatus>,
    files: &[String],
) -> CliResult<()> {
    let files = files
        .iter()
        .map(|f| {
            Ok(FileEntry {
                path: f.clone(),
                sha256: sha256_file(&dir.join(f))?,
            })
        })
        .collect::<std::io::Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: command.to_string(),
        config: serde_json::value::to_raw_value(config)?,
        library_version: saddleprec::VERSION.to_string(),
        tasks,
        files,
    };
    write_text(dir, RUN_MANIFEST, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Every listed file exists and matches its checksum.
#[cfg(test)]
pub fn verify_manifest(dir: &Path) -> CliResult<bool> {
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join(RUN_MANIFEST))?)?;
    Ok(m.files.iter().all(|f| {
        sha256_file(&dir.join(&f.path)).is_ok_and(|h| h == f.sha256)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_text(dir.path(), "a.txt", "abc").unwrap();
        write_manifest(dir.path(), "test", &(), vec![], &["a.txt".into()]).unwrap();
        assert!(verify_manifest(dir.path()).unwrap());
        // sha256("abc\n")
        let m: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join(RUN_MANIFEST)).unwrap()).unwrap();
        assert_eq!(
            m.files[0].sha256,
            "edeaaff3f1774ad2888673770c6d64097e391bc362d7d6fb34982ddf0efd18cb"
        );
        fs::write(dir.path().join("a.txt"), "abd\n").unwrap();
        assert!(!verify_manifest(dir.path()).unwrap());
    }
}
