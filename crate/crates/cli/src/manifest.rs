use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path, data: &[u8]) -> Self {
        FileDigest {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        }
    }
}

/// Written beside every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// Effective argv after merging any config file.
    pub argv: Vec<String>,
    /// Every resolved setting, defaults included.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    pub output: FileDigest,
    pub started_at: String,
    pub finished_at: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        let d = FileDigest::of(Path::new("x"), b"");
        assert_eq!(d.sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(manifest_path(Path::new("a/fits.csv")), PathBuf::from("a/fits.csv.manifest.json"));
    }
}
