use super::PipelineError;
use crate::codec::FillPolicy;
use crate::mesh::NormalizationTransform;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

/// File name of the manifest inside an output directory.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Every parameter that affects encoded outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineParams {
    pub resolution: usize,
    pub target_radius: f64,
    pub fill: FillPolicy,
    pub seed: u64,
}

/// One shape. Paths other than `source` are relative to the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub source: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geoimg: Option<PathBuf>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<NormalizationTransform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ManifestEntry {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.geoimg.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub params: PipelineParams,
    /// Fitted generator manifest, relative to this manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<PathBuf>,
    /// Sorted by id.
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(params: PipelineParams, mut entries: Vec<ManifestEntry>) -> Self {
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Self {
            params,
            generator: None,
            entries,
        }
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> Result<String, PipelineError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Manifest(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        Self::from_json(&text).map_err(|e| PipelineError::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(PipelineError::io(path))
    }

    /// Checks id uniqueness and that every referenced file exists, with
    /// relative paths taken from `base` (the manifest's directory).
    pub fn validate(&self, base: &Path) -> Result<(), PipelineError> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(PipelineError::Manifest(format!("duplicate shape id `{}`", e.id)));
            }
            if !e.source.exists() {
                return Err(PipelineError::Manifest(format!(
                    "`{}`: source {} does not exist",
                    e.id,
                    e.source.display()
                )));
            }
            for p in e.geoimg.iter().chain(&e.latent) {
                if !base.join(p).exists() {
                    return Err(PipelineError::Manifest(format!("`{}`: {} does not exist", e.id, p.display())));
                }
            }
        }
        if let Some(g) = &self.generator {
            if !base.join(g).exists() {
                return Err(PipelineError::Manifest(format!("generator {} does not exist", g.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DatasetManifest {
        let params = PipelineParams {
            resolution: 64,
            target_radius: 0.9,
            fill: FillPolicy::Masked,
            seed: 3,
        };
        let mut labels = BTreeMap::new();
        labels.insert("type".to_string(), "coupe".to_string());
        labels.insert("sporty".to_string(), "1".to_string());
        DatasetManifest::new(
            params,
            vec![
                ManifestEntry {
                    id: "b".into(),
                    source: "in/b.obj".into(),
                    geoimg: None,
                    labels: BTreeMap::new(),
                    transform: None,
                    latent: None,
                    error: Some("bad face index".into()),
                },
                ManifestEntry {
                    id: "a".into(),
                    source: "in/a.obj".into(),
                    geoimg: Some("a.geoimg".into()),
                    labels,
                    transform: Some(NormalizationTransform {
                        translation: [0.1, -1.0 / 3.0, 2e-17],
                        scale: 0.123456789012345,
                    }),
                    latent: None,
                    error: None,
                },
            ],
        )
    }

    #[test]
    fn sorted_and_counts_failures() {
        let m = sample();
        assert_eq!(m.entries[0].id, "a");
        assert_eq!(m.failures(), 1);
        assert!(m.entry("a").unwrap().is_ok());
    }

    #[test]
    fn write_read_write_is_byte_identical() {
        let first = sample().to_json().unwrap();
        let back = DatasetManifest::from_json(&first).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.to_json().unwrap(), first);
    }

    #[test]
    fn validation() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.obj");
        std::fs::write(&src, "").unwrap();
        let mut m = sample();
        m.entries.truncate(1);
        m.entries[0].source = src.clone();
        assert!(m.validate(dir.path()).is_err());
        std::fs::write(dir.path().join("a.geoimg"), "").unwrap();
        m.validate(dir.path()).unwrap();
        let mut dup = m.clone();
        dup.entries.push(m.entries[0].clone());
        assert!(matches!(dup.validate(dir.path()), Err(PipelineError::Manifest(ref s)) if s.contains("duplicate")));
    }
}
