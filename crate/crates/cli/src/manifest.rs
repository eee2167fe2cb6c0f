use std::fs::{self, File};
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> io::Result<Self> {
        let mut file = File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = vec![0u8; 1 << 16];
        let mut bytes = 0u64;
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            bytes += n as u64;
        }
        Ok(FileDigest {
            path: path.to_owned(),
            bytes,
            sha256: hex::encode(hasher.finalize()),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance record for one command run. `settings` holds every resolved
/// parameter, so together with the inputs it determines the outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_file: Option<PathBuf>,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub settings: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
}

impl Manifest {
    pub fn new(command: &str, config_file: Option<&Path>, settings: Value, seed: Option<u64>) -> Self {
        // serde_json maps are ordered by key, so this encoding is canonical.
        let config_sha256 = sha256_hex(settings.to_string().as_bytes());
        Manifest {
            tool: "cdwe",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            config_file: config_file.map(Path::to_owned),
            config_sha256,
            seed,
            settings,
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: Value::Null,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs.push(digest(path)?);
        Ok(())
    }

    /// Writes the manifest next to `primary` as `<primary>.manifest.json`.
    pub fn write_beside(&self, primary: &Path) -> Result<PathBuf, CliError> {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n")
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}

fn digest(path: &Path) -> Result<FileDigest, CliError> {
    FileDigest::of(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, "abc").unwrap();
        let d = FileDigest::of(&p).unwrap();
        assert_eq!(d.bytes, 3);
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn config_hash_ignores_key_order() {
        let a = serde_json::json!({"dim": 10, "seed": 3});
        let b = serde_json::json!({"seed": 3, "dim": 10});
        assert_eq!(Manifest::new("t", None, a, None).config_sha256, Manifest::new("t", None, b, None).config_sha256);
    }
}
