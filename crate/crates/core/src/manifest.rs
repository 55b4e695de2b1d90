//! Dataset manifest: which prompt produced which files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::prompts::{Affect, Genre, PromptSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub affect: Affect,
    pub genre: Genre,
    pub prompt: String,
    pub seed: u64,
    pub status: RunStatus,
    /// Paths relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ManifestEntry {
    pub fn spec(&self) -> PromptSpec {
        PromptSpec {
            index: self.index,
            affect: self.affect,
            genre: self.genre,
            text: self.prompt.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub base_seed: u64,
    /// Full run configuration used to produce the entries.
    pub config: serde_json::Value,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::File {
            path: path.to_owned(),
            message: format!("not a valid manifest: {e}"),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn prompt_specs(&self) -> Vec<PromptSpec> {
        self.entries.iter().map(ManifestEntry::spec).collect()
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.status == RunStatus::Failed).count()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn roundtrip() {
        let m = Manifest {
            base_seed: 3,
            config: serde_json::json!({"steps": 1}),
            entries: vec![ManifestEntry {
                index: 0,
                affect: Affect::Anger,
                genre: Genre::Abstract,
                prompt: "An angry abstract painting".into(),
                seed: 9,
                status: RunStatus::Failed,
                image: None,
                sidecar: None,
                image_sha256: None,
                sidecar_sha256: None,
                error: Some("boom".into()),
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert_eq!(Manifest::load(&p).unwrap(), m);
        assert_eq!(m.failures(), 1);
        assert_eq!(m.prompt_specs()[0], crate::prompts::enumerate_dataset()[0]);
    }
}
