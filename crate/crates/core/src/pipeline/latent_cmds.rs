use super::{check_readable, DatasetManifest, PipelineError};
use crate::codec::{decode, GeometryImage};
use crate::latent::{
    apply_edit, fit_edit_direction, fit_linear_generator, interpolate, project_with, EditDirection, ExternalGenerator,
    Generator, LatentError, LatentVector, LinearGenerator, ProjectOptions, Projection, SvmOptions,
};
use crate::mesh::{save_mesh_with, Precision};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Where a generator comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    /// A saved [`LinearGenerator`] manifest.
    Linear(PathBuf),
    /// A program speaking the external generator protocol.
    External { command: String, latent_dim: usize },
}

impl GeneratorSource {
    pub fn open(&self) -> Result<Box<dyn Generator>, PipelineError> {
        Ok(match self {
            Self::Linear(p) => Box::new(LinearGenerator::load(p)?),
            Self::External { command, latent_dim } => {
                Box::new(ExternalGenerator::from_command_line(command, *latent_dim)?)
            }
        })
    }
}

/// Output files for commands that emit a generated image.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTargets {
    pub geoimg: PathBuf,
    /// Also decode and write a mesh here when set.
    pub mesh: Option<PathBuf>,
    pub mirror: bool,
}

impl OutputTargets {
    fn emit(&self, gi: &GeometryImage) -> Result<(), PipelineError> {
        gi.save(&self.geoimg)?;
        if let Some(p) = &self.mesh {
            save_mesh_with(&decode(gi, self.mirror)?, p, Precision::Single)?;
        }
        Ok(())
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

#[derive(Debug, Clone)]
pub struct FitSummary {
    pub generator_path: PathBuf,
    pub latent_dim: usize,
    pub images: usize,
}

/// Fits a [`LinearGenerator`] with `d` components to every successfully
/// encoded image in the manifest, saves it (default
/// `<manifest dir>/generator.json`), writes each training shape's latent as
/// `<id>.latent.json`, and records all of it in the manifest.
pub fn cmd_latent_fit(manifest_path: &Path, d: usize, out: Option<&Path>) -> Result<FitSummary, PipelineError> {
    let mut manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_dir(manifest_path);
    let mut images = Vec::new();
    let mut ids = Vec::new();
    for (k, e) in manifest.entries.iter().enumerate() {
        if let (true, Some(p)) = (e.is_ok(), &e.geoimg) {
            images.push(GeometryImage::load(base.join(p))?);
            ids.push(k);
        }
    }
    let generator = fit_linear_generator(&images, d)?;
    let generator_path = out.map(Path::to_path_buf).unwrap_or_else(|| base.join("generator.json"));
    generator.save(&generator_path)?;
    for (gi, &k) in images.iter().zip(&ids) {
        let entry = &mut manifest.entries[k];
        let name = PathBuf::from(format!("{}.latent.json", entry.id));
        generator.encode_rad(gi.rad()?)?.save(base.join(&name))?;
        entry.latent = Some(name);
    }
    manifest.generator = Some(relative_to(&generator_path, &base));
    manifest.save(manifest_path)?;
    Ok(FitSummary {
        generator_path,
        latent_dim: generator.latent_dim(),
        images: images.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ProjectSummary {
    pub projection: Projection,
    pub latent_path: PathBuf,
    pub loss_curve_path: PathBuf,
}

impl ProjectSummary {
    pub fn final_loss(&self) -> f64 {
        self.projection.losses.last().copied().unwrap_or(self.projection.initial_loss)
    }
}

/// Projects `target` into the generator's latent space, writing the latent
/// as JSON and the loss curve as one `iteration,loss` line per update.
pub fn cmd_latent_project(
    target: &Path,
    source: &GeneratorSource,
    opts: &ProjectOptions,
    out: &Path,
    loss_curve: &Path,
) -> Result<ProjectSummary, PipelineError> {
    check_readable(target)?;
    let gi = GeometryImage::load(target)?;
    let generator = source.open()?;
    let projection = project_with(&gi, generator.as_ref(), opts)?;
    projection.latent.save(out)?;
    let mut curve = String::with_capacity(32 * projection.losses.len());
    for (k, loss) in projection.losses.iter().enumerate() {
        let _ = writeln!(curve, "{},{loss:e}", k + 1);
    }
    std::fs::write(loss_curve, curve).map_err(PipelineError::io(loss_curve))?;
    Ok(ProjectSummary {
        projection,
        latent_path: out.to_path_buf(),
        loss_curve_path: loss_curve.to_path_buf(),
    })
}

fn parse_flag(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Fits an SVM edit direction for `label` over the manifest entries that
/// have both a latent and a value for that label. With `positive` set, an
/// entry is positive when its value equals it; otherwise values must read
/// as booleans (`1/0`, `true/false`, `yes/no`).
pub fn cmd_latent_edit_direction(
    manifest_path: &Path,
    label: &str,
    positive: Option<&str>,
    svm: SvmOptions,
    out: &Path,
) -> Result<EditDirection, PipelineError> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_dir(manifest_path);
    let mut examples = Vec::new();
    for e in &manifest.entries {
        let (Some(latent), Some(value)) = (&e.latent, e.labels.get(label)) else {
            continue;
        };
        let y = match positive {
            Some(p) => value == p,
            None => parse_flag(value).ok_or_else(|| {
                LatentError::InvalidParameter(format!(
                    "`{}` has {label}={value}, which is not a boolean; name the positive value explicitly",
                    e.id
                ))
            })?,
        };
        examples.push((LatentVector::load(base.join(latent))?, y));
    }
    if examples.is_empty() {
        return Err(LatentError::InvalidParameter(format!("no entry has both a latent and a `{label}` label")).into());
    }
    let dir = fit_edit_direction(&examples, label, svm)?;
    std::fs::write(out, serde_json::to_string_pretty(&dir)? + "\n").map_err(PipelineError::io(out))?;
    Ok(dir)
}

/// Generates from `p + alpha * t * n`.
pub fn cmd_latent_edit(
    source: &GeneratorSource,
    latent: &Path,
    direction: &Path,
    alpha: f64,
    t: f64,
    targets: &OutputTargets,
) -> Result<GeometryImage, PipelineError> {
    check_readable(latent)?;
    let generator = source.open()?;
    let p = LatentVector::load(latent)?;
    let text = std::fs::read_to_string(direction).map_err(PipelineError::io(direction))?;
    let dir: EditDirection = serde_json::from_str(&text)?;
    let gi = generator.generate(&apply_edit(&p, &dir, alpha, t)?)?;
    targets.emit(&gi)?;
    Ok(gi)
}

/// Generates from `(1 - s) * w1 + s * w2`.
pub fn cmd_latent_interp(
    source: &GeneratorSource,
    w1: &Path,
    w2: &Path,
    s: f64,
    targets: &OutputTargets,
) -> Result<GeometryImage, PipelineError> {
    check_readable(w1)?;
    check_readable(w2)?;
    let generator = source.open()?;
    let w = interpolate(&LatentVector::load(w1)?, &LatentVector::load(w2)?, s)?;
    let gi = generator.generate(&w)?;
    targets.emit(&gi)?;
    Ok(gi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{cmd_encode, Config};
    use crate::mesh::primitives;
    use crate::mesh::{save_mesh, Vec3};

    /// Encodes a few bumpy spheres whose `wide` label follows their x extent.
    fn dataset(dir: &Path) -> PathBuf {
        let input = dir.join("in");
        std::fs::create_dir(&input).unwrap();
        let mut labels = serde_json::Map::new();
        for k in 0..8 {
            let stretch = 0.6 + 0.1 * k as f64;
            let wobble = 0.05 * (k % 3) as f64;
            let m = primitives::star_shaped(2, |u: &Vec3| {
                1.0 / ((u.x / stretch).powi(2) + u.y * u.y + u.z * u.z).sqrt() + wobble * u.z
            });
            let id = format!("s{k}");
            save_mesh(&m, input.join(format!("{id}.obj"))).unwrap();
            labels.insert(id, serde_json::json!({ "wide": k >= 4, "kind": if k % 2 == 0 { "even" } else { "odd" } }));
        }
        let labels_path = dir.join("labels.json");
        std::fs::write(&labels_path, serde_json::Value::Object(labels).to_string()).unwrap();
        let cfg = Config {
            input_dir: input,
            output_dir: dir.join("out"),
            resolution: 16,
            labels: Some(labels_path),
            ..Default::default()
        };
        cmd_encode(&cfg).unwrap().manifest_path
    }

    #[test]
    fn fit_project_direction_edit_interp() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dataset(dir.path());
        let fit = cmd_latent_fit(&manifest_path, 3, None).unwrap();
        assert_eq!((fit.latent_dim, fit.images), (3, 8));
        let manifest = DatasetManifest::load(&manifest_path).unwrap();
        assert_eq!(manifest.generator.as_deref(), Some(Path::new("generator.json")));
        manifest.validate(manifest_path.parent().unwrap()).unwrap();
        let source = GeneratorSource::Linear(fit.generator_path.clone());

        let out = dir.path().join("out");
        let w = out.join("w.json");
        let curve = out.join("loss.csv");
        let p = cmd_latent_project(&out.join("s2.geoimg"), &source, &ProjectOptions::default(), &w, &curve).unwrap();
        assert_eq!(std::fs::read_to_string(&curve).unwrap().lines().count(), 500);
        assert!(p.final_loss() < p.projection.initial_loss);

        let d = out.join("wide.json");
        let dirn = cmd_latent_edit_direction(&manifest_path, "wide", None, SvmOptions::default(), &d).unwrap();
        assert_eq!(dirn.dim(), 3);
        let by_value = cmd_latent_edit_direction(&manifest_path, "kind", Some("odd"), SvmOptions::default(), &d);
        assert!(by_value.is_ok());
        assert!(cmd_latent_edit_direction(&manifest_path, "kind", None, SvmOptions::default(), &d).is_err());

        let targets = OutputTargets {
            geoimg: out.join("edit.geoimg"),
            mesh: Some(out.join("edit.obj")),
            mirror: true,
        };
        let d = out.join("wide.json");
        cmd_latent_edit_direction(&manifest_path, "wide", None, SvmOptions::default(), &d).unwrap();
        let edited = cmd_latent_edit(&source, &w, &d, 2.0, 0.0, &targets).unwrap();
        let plain = source.open().unwrap().generate(&LatentVector::load(&w).unwrap()).unwrap();
        assert_eq!(edited, plain);
        assert!(out.join("edit.obj").exists());

        let w0 = out.join("s0.latent.json");
        let mid = cmd_latent_interp(&source, &w0, &w0, 0.5, &targets).unwrap();
        let g = source.open().unwrap();
        assert_eq!(mid, g.generate(&LatentVector::load(&w0).unwrap()).unwrap());
    }

    #[test]
    fn single_class_names_the_label() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dataset(dir.path());
        cmd_latent_fit(&manifest_path, 2, None).unwrap();
        let mut m = DatasetManifest::load(&manifest_path).unwrap();
        for e in &mut m.entries {
            e.labels.insert("roofless".into(), "no".into());
        }
        m.save(&manifest_path).unwrap();
        let err = cmd_latent_edit_direction(&manifest_path, "roofless", None, SvmOptions::default(), &dir.path().join("d.json"))
            .unwrap_err();
        assert!(err.to_string().contains("roofless"), "{err}");
    }
}
