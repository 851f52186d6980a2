//! Project configuration: a TOML file plus `--set` and `--seed` overrides.

use std::path::{Path, PathBuf};

use editstyle::motion::TrackerConfig;
use editstyle::shot_detect::ShotDetectParams;
use editstyle::style::LabelConfig;
use editstyle::transfer::FramingParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Paths are relative to the directory holding the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub source: PathBuf,
    pub repo_dir: PathBuf,
    #[serde(default)]
    pub annotations_dir: Option<PathBuf>,
    pub speed_map: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shot_detect: ShotDetectParams,
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default)]
    pub labels: LabelConfig,
    #[serde(default)]
    pub framing: FramingParams,
}

fn config_err(path: &Path, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {reason}", path.display()))
}

/// Parses `text` as a TOML value, falling back to a bare string.
fn parse_value(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set `{assignment}`: expected key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("--set `{assignment}`: empty key segment")));
    }
    let (last, parents) = parts.split_last().expect("nonempty");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set `{assignment}`: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), parse_value(value.trim()));
    Ok(())
}

impl ProjectConfig {
    /// Loads, applies overrides, resolves paths and validates.
    pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path, e))?;
        let mut table: toml::Table = text.parse().map_err(|e| config_err(path, e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: ProjectConfig = table.try_into().map_err(|e| config_err(path, e))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.tracker.ransac.seed = cfg.seed;
        cfg.shot_detect.scene_ransac.seed = cfg.seed;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.source);
        join(&mut self.repo_dir);
        join(&mut self.speed_map);
        join(&mut self.output_dir);
        if let Some(a) = self.annotations_dir.as_mut() {
            join(a);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let must_exist = [
            ("source", Some(&self.source)),
            ("repo_dir", Some(&self.repo_dir)),
            ("speed_map", Some(&self.speed_map)),
            ("annotations_dir", self.annotations_dir.as_ref()),
        ];
        for (name, p) in must_exist {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(CliError::Config(format!("{name} {} does not exist", p.display())));
                }
            }
        }
        self.shot_detect
            .validate()
            .map_err(|e| CliError::Config(format!("shot_detect: {e}")))?;
        self.framing.validate().map_err(|e| CliError::Config(format!("framing: {e}")))?;
        if self.tracker.stride == 0 || self.labels.samples_per_shot == 0 {
            return Err(CliError::Config("tracker.stride and labels.samples_per_shot must be >= 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the parameter set, excluding absolute path prefixes so
    /// that identical projects in different directories agree.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        let strip = |p: &mut PathBuf| {
            if let Some(name) = p.file_name() {
                *p = PathBuf::from(name);
            }
        };
        strip(&mut c.source);
        strip(&mut c.repo_dir);
        strip(&mut c.speed_map);
        strip(&mut c.output_dir);
        if let Some(a) = c.annotations_dir.as_mut() {
            strip(a);
        }
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
