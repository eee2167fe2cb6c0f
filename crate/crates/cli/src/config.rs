use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// Contents of the `--config` TOML file. Every value can be overridden by
/// the matching command-line flag.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub training: Training,
    #[serde(default)]
    pub subset: Subset,
    #[serde(default)]
    pub split: Split,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub bots: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Training {
    pub arch: Option<String>,
    pub attribute: Option<String>,
    pub dim: Option<usize>,
    pub lr: Option<f64>,
    pub window: Option<usize>,
    pub epochs: Option<usize>,
    pub min_count: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub report_every: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subset {
    pub min_known: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub train: Option<usize>,
    pub val: Option<usize>,
    pub test: Option<usize>,
    pub seed: Option<u64>,
}

/// A parsed configuration plus the raw bytes it came from.
#[derive(Clone, Debug, Default)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub path: Option<PathBuf>,
}

impl LoadedConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(LoadedConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {}", path.display(), e.message())))?;
        // Paths in the file are relative to the file itself.
        let base = path.parent().unwrap_or(Path::new(""));
        let p = &mut config.paths;
        for slot in [&mut p.corpus, &mut p.bots, &mut p.gazetteer, &mut p.profiles, &mut p.output_dir] {
            if let Some(v) = slot.as_mut() {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        }
        Ok(LoadedConfig {
            config,
            path: Some(path.to_owned()),
        })
    }

    pub fn paths(&self) -> &Paths {
        &self.config.paths
    }

    /// Where an output goes: the flag if given, otherwise `default_name`
    /// inside the configured output directory.
    pub fn output(&self, flag: Option<PathBuf>, default_name: &str) -> Result<PathBuf, CliError> {
        if let Some(p) = flag {
            return Ok(p);
        }
        match &self.config.paths.output_dir {
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
                Ok(dir.join(default_name))
            }
            None => Err(CliError::config(format!(
                "no output path: pass --out or set paths.output_dir (default name {default_name})"
            ))),
        }
    }
}

/// Flag value, else config value, else an error naming both.
pub fn require<T: Clone>(flag: Option<T>, config: &Option<T>, what: &str) -> Result<T, CliError> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| CliError::config(format!("missing {what}: pass the flag or set it in the config")))
}

pub fn existing(path: PathBuf, what: &str) -> Result<PathBuf, CliError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::config(format!("{what} {} does not exist", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[paths]\ncorpus = \"posts.jsonl\"\n[training]\ndim = 50\n").unwrap();
        let loaded = LoadedConfig::load(Some(&path)).unwrap();
        assert_eq!(loaded.paths().corpus.as_deref(), Some(dir.path().join("posts.jsonl").as_path()));
        assert_eq!(loaded.config.training.dim, Some(50));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[training]\ndimension = 50\n").unwrap();
        let err = LoadedConfig::load(Some(&path)).unwrap_err();
        assert_eq!(err.class_name(), "config");
    }

    #[test]
    fn flags_win() {
        assert_eq!(require(Some(3), &Some(5), "x").unwrap(), 3);
        assert_eq!(require(None, &Some(5), "x").unwrap(), 5);
        assert!(require::<u32>(None, &None, "x").is_err());
    }
}
