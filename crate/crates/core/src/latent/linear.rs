use super::{Generator, LatentError, LatentVector};
use crate::codec::GeometryImage;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Gram eigenvalues below this carry no usable variance.
pub const EIGEN_FLOOR: f64 = 1e-12;

const MEAN_CHANNEL: &str = "mu";
const MANIFEST_FORMAT: &str = "geoimg-linear-generator";

/// `generate(w) = mu + sum_k w_k B_k` with orthonormal component images
/// `B_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGenerator {
    resolution: usize,
    mean: Vec<f64>,
    basis: Vec<Vec<f64>>,
    /// Gram eigenvalue of each component (its variance times dataset size);
    /// empty when the basis was supplied directly.
    eigenvalues: Vec<f64>,
}

/// Structured-text side file that accompanies the GEOIMG01 weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGeneratorManifest {
    pub format: String,
    pub resolution: usize,
    pub latent_dim: usize,
    /// GEOIMG01 file holding `mu` followed by `b0`, `b1`, ...; relative to
    /// the manifest's directory.
    pub weights: PathBuf,
    pub channels: Vec<String>,
    pub eigenvalues: Vec<f64>,
}

fn basis_channel(k: usize) -> String {
    format!("b{k}")
}

impl LinearGenerator {
    /// Checks shapes only; orthonormality is the caller's contract.
    pub fn new(resolution: usize, mean: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self, LatentError> {
        let px = resolution * resolution;
        let bad_len = std::iter::once(&mean).chain(&basis).find(|v| v.len() != px);
        if let Some(v) = bad_len {
            return Err(LatentError::DimensionMismatch {
                expected: px,
                got: v.len(),
            });
        }
        Ok(Self {
            resolution,
            mean,
            basis,
            eigenvalues: Vec::new(),
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Closed-form least-squares latent `B^T (target - mu)`.
    pub fn encode_rad(&self, rad: &[f64]) -> Result<LatentVector, LatentError> {
        if rad.len() != self.mean.len() {
            return Err(LatentError::DimensionMismatch {
                expected: self.mean.len(),
                got: rad.len(),
            });
        }
        let centered: Vec<f64> = rad.iter().zip(&self.mean).map(|(r, m)| r - m).collect();
        LatentVector::new(self.basis.iter().map(|b| dot(b, &centered)).collect())
    }

    /// Writes the manifest to `manifest_path` and the weights next to it
    /// with a `.geoimg` extension.
    pub fn save(&self, manifest_path: impl AsRef<Path>) -> Result<(), LatentError> {
        let manifest_path = manifest_path.as_ref();
        let weights_path = manifest_path.with_extension("geoimg");
        let mut gi = GeometryImage::empty(self.resolution);
        gi.set_channel(MEAN_CHANNEL, self.mean.clone())?;
        for (k, b) in self.basis.iter().enumerate() {
            gi.set_channel(&basis_channel(k), b.clone())?;
        }
        gi.save(&weights_path)?;
        let manifest = LinearGeneratorManifest {
            format: MANIFEST_FORMAT.to_string(),
            resolution: self.resolution,
            latent_dim: self.basis.len(),
            weights: PathBuf::from(weights_path.file_name().expect("manifest path has a file name")),
            channels: gi.channel_names().map(str::to_string).collect(),
            eigenvalues: self.eigenvalues.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(manifest_path, text)?;
        Ok(())
    }

    pub fn load(manifest_path: impl AsRef<Path>) -> Result<Self, LatentError> {
        let manifest_path = manifest_path.as_ref();
        let manifest: LinearGeneratorManifest = serde_json::from_slice(&std::fs::read(manifest_path)?)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(LatentError::InvalidParameter(format!(
                "{} is not a linear generator manifest (format `{}`)",
                manifest_path.display(),
                manifest.format
            )));
        }
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        let gi = GeometryImage::load(dir.join(&manifest.weights))?;
        if gi.resolution() != manifest.resolution {
            return Err(LatentError::ResolutionMismatch {
                expected: manifest.resolution,
                got: gi.resolution(),
            });
        }
        let channel = |name: &str| -> Result<Vec<f64>, LatentError> {
            gi.channel(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| LatentError::InvalidParameter(format!("weights lack channel `{name}`")))
        };
        let mean = channel(MEAN_CHANNEL)?;
        let basis = (0..manifest.latent_dim)
            .map(|k| channel(&basis_channel(k)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut g = Self::new(manifest.resolution, mean, basis)?;
        if manifest.eigenvalues.len() == manifest.latent_dim {
            g.eigenvalues = manifest.eigenvalues;
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Generator for LinearGenerator {
    fn latent_dim(&self) -> usize {
        self.basis.len()
    }

    fn resolution(&self) -> usize {
        self.resolution
    }

    fn generate_raw(&self, w: &LatentVector) -> Result<Vec<f64>, LatentError> {
        w.check_dim(self.basis.len())?;
        let mut out = self.mean.clone();
        for (b, &wk) in self.basis.iter().zip(w.values()) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += wk * v;
            }
        }
        Ok(out)
    }

    fn vjp(&self, _w: &LatentVector, residual: &[f64]) -> Option<Vec<f64>> {
        Some(self.basis.iter().map(|b| dot(b, residual)).collect())
    }
}

/// Principal-component model of the dataset's rad channels: the mean image
/// plus the top `d` eigenvectors of the centered Gram matrix, lifted to
/// pixel space and normalized. Components with eigenvalue below
/// [`EIGEN_FLOOR`] are dropped with a warning, so the result may have fewer
/// than `d` dimensions.
pub fn fit_linear_generator(dataset: &[GeometryImage], d: usize) -> Result<LinearGenerator, LatentError> {
    let first = dataset.first().ok_or(LatentError::EmptyDataset)?;
    let n = first.resolution();
    for (index, gi) in dataset.iter().enumerate() {
        if gi.resolution() != n {
            return Err(LatentError::InconsistentResolution {
                index,
                expected: n,
                got: gi.resolution(),
            });
        }
    }
    let count = dataset.len();
    if d > count - 1 {
        return Err(LatentError::TooManyComponents {
            requested: d,
            max: count - 1,
        });
    }
    let px = n * n;
    let rads: Vec<&[f64]> = dataset.iter().map(|gi| gi.rad()).collect::<Result<_, _>>()?;
    let mut mean = vec![0.0; px];
    for r in &rads {
        for (m, v) in mean.iter_mut().zip(*r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let centered: Vec<Vec<f64>> = rads
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let gram = DMatrix::from_fn(count, count, |i, j| dot(&centered[i], &centered[j]));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut basis = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &k in order.iter().take(d) {
        let lambda = eig.eigenvalues[k];
        if lambda < EIGEN_FLOOR {
            log::warn!("dropping component with eigenvalue {lambda:e} (no variance left)");
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let scale = 1.0 / lambda.sqrt();
        let mut b = vec![0.0; px];
        for (i, c) in centered.iter().enumerate() {
            let coef = v[i] * scale;
            for (o, x) in b.iter_mut().zip(c) {
                *o += coef * x;
            }
        }
        // sign convention: largest-magnitude pixel positive, for reproducibility
        let pivot = b.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            b.iter_mut().for_each(|x| *x = -*x);
        }
        basis.push(b);
        eigenvalues.push(lambda);
    }
    if basis.len() < d {
        log::warn!("fitted {} usable components of the {d} requested", basis.len());
    }
    Ok(LinearGenerator {
        resolution: n,
        mean,
        basis,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(count: usize, n: usize, seed: u64) -> Vec<GeometryImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| GeometryImage::from_rad(n, (0..n * n).map(|_| rng.random_range(0.2..0.9)).collect()).unwrap())
            .collect()
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = fit_linear_generator(&random_dataset(12, 16, 1), 8).unwrap();
        assert_eq!(g.latent_dim(), 8);
        for (i, a) in g.basis().iter().enumerate() {
            for (j, b) in g.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - want).abs() < 1e-6);
            }
        }
        assert!(g.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn full_rank_reconstructs_training_images() {
        let data = random_dataset(10, 12, 2);
        let g = fit_linear_generator(&data, 9).unwrap();
        for gi in &data {
            let w = g.encode_rad(gi.rad().unwrap()).unwrap();
            let back = g.generate_raw(&w).unwrap();
            for (a, b) in back.iter().zip(gi.rad().unwrap()) {
                assert!((a - b).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn identical_images_have_no_components() {
        let gi = GeometryImage::from_rad(8, vec![0.4; 64]).unwrap();
        let g = fit_linear_generator(&[gi.clone(), gi.clone(), gi.clone()], 2).unwrap();
        assert_eq!(g.latent_dim(), 0);
        assert!(g.mean().iter().all(|m| (m - 0.4).abs() < 1e-15));
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_linear_generator(&[], 1), Err(LatentError::EmptyDataset)));
        let mut data = random_dataset(3, 8, 3);
        assert!(matches!(
            fit_linear_generator(&data, 3),
            Err(LatentError::TooManyComponents { requested: 3, max: 2 })
        ));
        data.push(GeometryImage::from_rad(4, vec![0.5; 16]).unwrap());
        assert!(matches!(
            fit_linear_generator(&data, 1),
            Err(LatentError::InconsistentResolution { index: 3, .. })
        ));
    }

    #[test]
    fn generate_clamps() {
        let g = LinearGenerator::new(2, vec![0.5; 4], vec![vec![0.5; 4]]).unwrap();
        let w = LatentVector::new(vec![2.0]).unwrap();
        assert_eq!(g.generate_raw(&w).unwrap(), vec![1.5; 4]);
        assert_eq!(g.generate(&w).unwrap().rad().unwrap(), &[1.0; 4]);
        let w = LatentVector::new(vec![-4.0]).unwrap();
        assert_eq!(g.generate(&w).unwrap().rad().unwrap(), &[0.0; 4]);
        assert!(matches!(
            g.generate_raw(&LatentVector::zeros(2)),
            Err(LatentError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let g = fit_linear_generator(&random_dataset(6, 8, 4), 3).unwrap();
        let path = dir.path().join("gen.json");
        g.save(&path).unwrap();
        assert!(dir.path().join("gen.geoimg").exists());
        let back = LinearGenerator::load(&path).unwrap();
        assert_eq!(back.latent_dim(), 3);
        assert_eq!(back.eigenvalues(), g.eigenvalues());
        for (a, b) in back.basis().iter().flatten().zip(g.basis().iter().flatten()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }
}
