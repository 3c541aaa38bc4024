//! Latent-space operations over rad-image generators: a linear stand-in
//! generator, projection of images into latent space, SVM edit directions,
//! edits and interpolation, and a bridge to generators living in another
//! process.

mod edit;
mod external;
mod linear;
mod project;

pub use edit::{apply_edit, fit_edit_direction, interpolate, EditDirection, SvmOptions};
pub use external::ExternalGenerator;
pub use linear::{fit_linear_generator, LinearGenerator, LinearGeneratorManifest, EIGEN_FLOOR};
pub use project::{project, project_with, Projection, ProjectOptions, DEFAULT_ITERATIONS};

use crate::codec::{CodecError, GeometryImage};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LatentError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("image {index} is {got}x{got}, expected {expected}x{expected}")]
    InconsistentResolution { index: usize, expected: usize, got: usize },
    #[error("requested {requested} components but the dataset supports at most {max}")]
    TooManyComponents { requested: usize, max: usize },
    #[error("resolution mismatch: generator is {expected}x{expected}, image is {got}x{got}")]
    ResolutionMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("latent vector has a non-finite entry at {0}")]
    NonFinite(usize),
    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("label `{label}` has only one class among the examples; both are needed")]
    SingleClass { label: String },
    #[error("SVM weight vector vanished; the classes are not linearly separable from the origin")]
    DegenerateDirection,
    #[error("{0}")]
    InvalidParameter(String),
    #[error("generator process failed ({status}): {stderr}")]
    ProcessFailure { status: String, stderr: String },
    #[error("generator process violated the protocol: {0}")]
    ProtocolViolation(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A point in a generator's latent space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatentRepr", into = "LatentRepr")]
pub struct LatentVector {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LatentRepr {
    values: Vec<f64>,
}

impl TryFrom<LatentRepr> for LatentVector {
    type Error = LatentError;

    fn try_from(r: LatentRepr) -> Result<Self, Self::Error> {
        Self::new(r.values)
    }
}

impl From<LatentVector> for LatentRepr {
    fn from(v: LatentVector) -> Self {
        Self { values: v.values }
    }
}

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self, LatentError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LatentError::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { values: vec![0.0; dim] }
    }

    /// Unit vector along axis `k`.
    pub fn axis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.values[k] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, LatentError> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), LatentError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<(), LatentError> {
        if self.dim() != expected {
            return Err(LatentError::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Maps latent vectors to rad images of a fixed resolution.
pub trait Generator: Send + Sync {
    fn latent_dim(&self) -> usize;

    fn resolution(&self) -> usize;

    fn sphere_radius(&self) -> f64 {
        crate::codec::SPHERE_RADIUS
    }

    /// Row-major rad values before clamping.
    fn generate_raw(&self, w: &LatentVector) -> Result<Vec<f64>, LatentError>;

    /// Rad image clamped to `[0, sphere_radius]`, ready for decoding.
    fn generate(&self, w: &LatentVector) -> Result<GeometryImage, LatentError> {
        let r = self.sphere_radius();
        let rad = self.generate_raw(w)?.into_iter().map(|v| v.clamp(0.0, r)).collect();
        Ok(GeometryImage::from_rad(self.resolution(), rad)?)
    }

    /// `J(w)^T r` for the Jacobian of [`Generator::generate_raw`], when it
    /// is known in closed form. `None` makes projection fall back to finite
    /// differences.
    fn vjp(&self, _w: &LatentVector, _residual: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latent_rejects_non_finite() {
        assert!(matches!(LatentVector::new(vec![0.0, f64::NAN]), Err(LatentError::NonFinite(1))));
        let bad: Result<LatentVector, _> = serde_json::from_str(r#"{"values":[1.0,null]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn latent_json_roundtrip() {
        let w = LatentVector::new(vec![0.1, -2.5, 3.0e-7]).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<LatentVector>(&text).unwrap(), w);
    }
}
