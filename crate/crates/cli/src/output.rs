use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub exit_code: u8,
    pub files: BTreeMap<String, FileEntry>,
    pub subcommand: String,
    pub version: String,
}

/// Writes artifacts into one directory and records their hashes for the manifest.
pub struct OutputDir {
    dir: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

impl OutputDir {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Run(format!("creating {}: {e}", dir.display())))?;
        Ok(Self { dir, files: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Run(format!("writing {}: {e}", path.display())))?;
        let sha256 = Sha256::digest(contents.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        self.files.insert(name.to_string(), FileEntry { bytes: contents.len(), sha256 });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = biharm::io::to_json(value).map_err(|e| CliError::Run(e.to_string()))?;
        self.write(name, &text)
    }

    pub fn finish(self, subcommand: &str, config: serde_json::Value, exit_code: u8) -> Result<(), CliError> {
        let manifest = Manifest {
            config,
            exit_code,
            files: self.files,
            subcommand: subcommand.to_string(),
            version: biharm::VERSION.to_string(),
        };
        let text = biharm::io::to_json(&manifest).map_err(|e| CliError::Run(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::Run(format!("writing {}: {e}", path.display())))
    }
}
