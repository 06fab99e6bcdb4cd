use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Settings readable from a TOML or JSON file. Command-line flags take
/// precedence over every field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub motion: Option<PathBuf>,
    pub dt: Option<f64>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub metric: Option<String>,
    pub cases: Option<usize>,
    pub only: Option<String>,
    pub origin: Option<Vec<f64>>,
    pub record_every: Option<u64>,
    pub residual: Option<bool>,
    pub h: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Other(format!("cannot read config {}: {e}", path.display())))?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
    }

    /// Config paths are relative to the config file.
    pub fn resolve_paths(mut self, base: &Path) -> RunConfig {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.input);
        fix(&mut self.out);
        fix(&mut self.summary);
        fix(&mut self.motion);
        self
    }
}
