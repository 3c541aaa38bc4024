//! Dataset manifests, batch configuration and the commands behind the
//! `geoimg` binary. Each command returns a structured result; printing and
//! exit codes are left to the caller.

mod commands;
mod latent_cmds;
mod manifest;

pub use commands::{cmd_decode, cmd_encode, cmd_metrics, cmd_roundtrip, DecodeSummary, EncodeSummary, DECODE_BUDGET};
pub use latent_cmds::{
    cmd_latent_edit, cmd_latent_edit_direction, cmd_latent_fit, cmd_latent_interp, cmd_latent_project, FitSummary,
    GeneratorSource, OutputTargets, ProjectSummary,
};
pub use manifest::{DatasetManifest, ManifestEntry, PipelineParams, MANIFEST_FILE};

use crate::codec::{CodecError, FillPolicy, DEFAULT_RESOLUTION};
use crate::latent::LatentError;
use crate::mesh::{MeshError, DEFAULT_TARGET_RADIUS};
use crate::metrics::MetricError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable that overrides [`Config::threads`].
pub const THREADS_ENV: &str = "GEOIMG_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Latent(#[from] LatentError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

/// Fails with the path attached when an input file cannot be opened.
pub(crate) fn check_readable(path: &Path) -> Result<(), PipelineError> {
    std::fs::File::open(path).map(drop).map_err(PipelineError::io(path))
}

/// Batch encoding configuration, read from JSON.
///
/// Relative paths in a config file are resolved against the file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub resolution: usize,
    pub target_radius: f64,
    pub fill: FillPolicy,
    pub seed: u64,
    /// Worker threads; `None` uses every logical core.
    pub threads: Option<usize>,
    /// JSON object mapping shape id to an attribute → value map.
    pub labels: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            input_dir: PathBuf::from("meshes"),
            output_dir: PathBuf::from("out"),
            resolution: DEFAULT_RESOLUTION,
            target_radius: DEFAULT_TARGET_RADIUS,
            fill: FillPolicy::Nearest,
            seed: 0,
            threads: None,
            labels: None,
        }
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        let mut cfg: Config =
            serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.input_dir);
        rebase(&mut cfg.output_dir);
        if let Some(l) = cfg.labels.as_mut() {
            rebase(l);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.resolution < 2 {
            return Err(PipelineError::Config(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        if !(self.target_radius > 0.0 && self.target_radius < crate::codec::SPHERE_RADIUS) {
            return Err(PipelineError::Config(format!(
                "target_radius must lie in (0, 1), got {}",
                self.target_radius
            )));
        }
        if self.threads == Some(0) {
            return Err(PipelineError::Config("threads must be positive".into()));
        }
        if !self.input_dir.is_dir() {
            return Err(PipelineError::Config(format!(
                "input directory {} does not exist",
                self.input_dir.display()
            )));
        }
        Ok(())
    }

    /// Thread count after applying the `GEOIMG_THREADS` override; `None`
    /// means every logical core.
    pub fn effective_threads(&self) -> Result<Option<usize>, PipelineError> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Ok(Some(t)),
                _ => Err(PipelineError::Config(format!("{THREADS_ENV}={v} is not a positive integer"))),
            },
            Err(_) => Ok(self.threads),
        }
    }

    pub fn params(&self) -> PipelineParams {
        PipelineParams {
            resolution: self.resolution,
            target_radius: self.target_radius,
            fill: self.fill,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("in")).unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"input_dir": "in", "output_dir": "out", "resolution": 32}"#).unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.input_dir, dir.path().join("in"));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(cfg.resolution, 32);
        assert_eq!(cfg.target_radius, DEFAULT_TARGET_RADIUS);
        assert_eq!(cfg.fill, FillPolicy::Nearest);
    }

    #[test]
    fn config_errors() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("in")).unwrap();
        let path = dir.path().join("cfg.json");
        for bad in [
            r#"{"input_dir": "in", "resolution": 1}"#,
            r#"{"input_dir": "in", "target_radius": 1.5}"#,
            r#"{"input_dir": "missing"}"#,
            r#"{"input_dir": "in", "colour": true}"#,
            r#"{"input_dir": "in", "fill": "zero"}"#,
        ] {
            std::fs::write(&path, bad).unwrap();
            assert!(matches!(Config::load(&path), Err(PipelineError::Config(_))), "{bad}");
        }
    }
}
