use super::{check_readable, Config, DatasetManifest, ManifestEntry, PipelineError, PipelineParams, MANIFEST_FILE};
use crate::codec::{decode, roundtrip_report, Encoder, GeometryImage, RoundtripOptions, RoundtripReport, SphereGrid};
use crate::mesh::{load_mesh, normalize, save_mesh_with, smooth_vertex_normals, NormalizationTransform, Precision};
use crate::metrics::{evaluate, EmdOptions, MetricReport};
use rayon::prelude::*;
use serde_json::Value;
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// Meshing budget per shape at 512x512.
pub const DECODE_BUDGET: Duration = Duration::from_millis(20);

#[derive(Debug, Clone)]
pub struct EncodeSummary {
    pub manifest_path: PathBuf,
    pub manifest: DatasetManifest,
}

impl EncodeSummary {
    pub fn encoded(&self) -> usize {
        self.manifest.entries.len() - self.failed()
    }

    pub fn failed(&self) -> usize {
        self.manifest.failures()
    }
}

fn is_mesh_file(p: &Path) -> bool {
    p.is_file()
        && matches!(
            p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
            Some("obj" | "ply")
        )
}

fn load_labels(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, String>>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
    let raw: BTreeMap<String, BTreeMap<String, Value>> =
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok(raw
        .into_iter()
        .map(|(id, attrs)| {
            let attrs = attrs
                .into_iter()
                .map(|(k, v)| {
                    let v = match v {
                        Value::String(s) => s,
                        other => other.to_string(),
                    };
                    (k, v)
                })
                .collect();
            (id, attrs)
        })
        .collect())
}

fn encode_one(path: &Path, params: &PipelineParams) -> Result<(GeometryImage, NormalizationTransform), PipelineError> {
    let mesh = load_mesh(path)?;
    let (mesh, transform) = normalize(&mesh, params.target_radius)?;
    let mesh = smooth_vertex_normals(&mesh);
    let encoder = Encoder::new(&mesh)?;
    let (gi, stats) = encoder.encode(params.resolution, params.fill)?;
    log::debug!("{}: {:.1}% of rays hit", path.display(), 100.0 * stats.hit_fraction());
    Ok((encoder.bake(&gi)?, transform))
}

/// Normalizes, encodes and bakes every `.obj`/`.ply` file in the input
/// directory, writing `<id>.geoimg` files and a fresh `manifest.json` to the
/// output directory. Shapes that fail are logged and recorded in the
/// manifest with their error; they do not abort the batch.
pub fn cmd_encode(config: &Config) -> Result<EncodeSummary, PipelineError> {
    config.validate()?;
    let params = config.params();
    let labels = match &config.labels {
        Some(p) => load_labels(p)?,
        None => BTreeMap::new(),
    };
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(&config.input_dir)
        .map_err(PipelineError::io(&config.input_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_mesh_file(p))
        .collect();
    inputs.sort();
    std::fs::create_dir_all(&config.output_dir).map_err(PipelineError::io(&config.output_dir))?;

    let mut seen = HashSet::new();
    let jobs: Vec<(String, PathBuf, bool)> = inputs
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let fresh = seen.insert(id.clone());
            (id, p, fresh)
        })
        .collect();

    let run = || -> Vec<ManifestEntry> {
        jobs.par_iter()
            .map(|(id, path, fresh)| {
                let mut entry = ManifestEntry {
                    id: id.clone(),
                    source: path.clone(),
                    geoimg: None,
                    labels: labels.get(id).cloned().unwrap_or_default(),
                    transform: None,
                    latent: None,
                    error: None,
                };
                let result = if *fresh {
                    encode_one(path, &params).and_then(|(gi, t)| {
                        let name = PathBuf::from(format!("{id}.geoimg"));
                        gi.save(config.output_dir.join(&name))?;
                        Ok((name, t))
                    })
                } else {
                    Err(PipelineError::Manifest(format!("duplicate shape id `{id}`")))
                };
                match result {
                    Ok((name, t)) => {
                        entry.geoimg = Some(name);
                        entry.transform = Some(t);
                    }
                    Err(e) => {
                        log::warn!("{}: {e}", path.display());
                        entry.error = Some(e.to_string());
                    }
                }
                entry
            })
            .collect()
    };
    let entries = match config.effective_threads()? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    // duplicates share an id, so order them by source to keep output stable
    let mut manifest = DatasetManifest::new(params, entries);
    manifest.entries.sort_by(|a, b| (&a.id, &a.source).cmp(&(&b.id, &b.source)));
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;
    Ok(EncodeSummary {
        manifest_path,
        manifest,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DecodeSummary {
    /// One-time setup of the per-resolution direction grid.
    pub grid_time: Duration,
    /// Time spent in [`decode`] alone.
    pub decode_time: Duration,
    /// Read, decode and write.
    pub total_time: Duration,
    pub vertices: usize,
    pub faces: usize,
}

impl DecodeSummary {
    pub fn within_budget(&self) -> bool {
        self.decode_time <= DECODE_BUDGET
    }
}

/// Decodes to OBJ or PLY. Coordinates are written in single precision,
/// which is all the `f32` image payload carries.
pub fn cmd_decode(geoimg: &Path, mirror: bool, out: &Path) -> Result<DecodeSummary, PipelineError> {
    let start = Instant::now();
    check_readable(geoimg)?;
    let gi = GeometryImage::load(geoimg)?;
    let t0 = Instant::now();
    SphereGrid::shared(gi.resolution());
    let grid_time = t0.elapsed();
    let t0 = Instant::now();
    let mesh = decode(&gi, mirror)?;
    let decode_time = t0.elapsed();
    save_mesh_with(&mesh, out, Precision::Single)?;
    Ok(DecodeSummary {
        grid_time,
        decode_time,
        total_time: start.elapsed(),
        vertices: mesh.vertices().len(),
        faces: mesh.faces().len(),
    })
}

/// Normalizes both meshes to `target_radius` and compares them from `k`
/// surface samples each.
pub fn cmd_metrics(
    a: &Path,
    b: &Path,
    k: usize,
    seed: u64,
    target_radius: f64,
    opts: EmdOptions,
) -> Result<MetricReport, PipelineError> {
    check_readable(a)?;
    check_readable(b)?;
    let (ma, _) = normalize(&load_mesh(a)?, target_radius)?;
    let (mb, _) = normalize(&load_mesh(b)?, target_radius)?;
    Ok(evaluate(&ma, &mb, k, seed, opts)?)
}

pub fn cmd_roundtrip(mesh: &Path, resolution: usize, opts: &RoundtripOptions) -> Result<RoundtripReport, PipelineError> {
    check_readable(mesh)?;
    Ok(roundtrip_report(&load_mesh(mesh)?, resolution, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{primitives, save_mesh};

    fn fixture(dir: &Path) -> Config {
        let input = dir.join("in");
        std::fs::create_dir(&input).unwrap();
        save_mesh(&primitives::icosphere(1.0, 2), input.join("ball.obj")).unwrap();
        save_mesh(&primitives::cube(2.0), input.join("box.ply")).unwrap();
        std::fs::write(input.join("notes.txt"), "ignored").unwrap();
        Config {
            input_dir: input,
            output_dir: dir.join("out"),
            resolution: 16,
            threads: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn encode_writes_images_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        let s = cmd_encode(&cfg).unwrap();
        assert_eq!((s.encoded(), s.failed()), (2, 0));
        let ids: Vec<_> = s.manifest.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["ball", "box"]);
        let gi = GeometryImage::load(cfg.output_dir.join("ball.geoimg")).unwrap();
        assert_eq!(gi.resolution(), 16);
        assert!(gi.channel("nx").is_some());
        s.manifest.validate(&cfg.output_dir).unwrap();
        assert_eq!(DatasetManifest::load(&s.manifest_path).unwrap(), s.manifest);
    }

    #[test]
    fn corrupt_file_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        std::fs::write(cfg.input_dir.join("broken.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
        let s = cmd_encode(&cfg).unwrap();
        assert_eq!((s.encoded(), s.failed()), (2, 1));
        let bad = s.manifest.entry("broken").unwrap();
        assert!(bad.geoimg.is_none() && bad.error.is_some());
        assert!(!cfg.output_dir.join("broken.geoimg").exists());
    }

    #[test]
    fn duplicate_stems_fail_the_second() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        save_mesh(&primitives::cube(1.0), cfg.input_dir.join("ball.ply")).unwrap();
        let s = cmd_encode(&cfg).unwrap();
        assert_eq!(s.failed(), 1);
        let balls: Vec<_> = s.manifest.entries.iter().filter(|e| e.id == "ball").collect();
        assert_eq!(balls.len(), 2);
        assert!(balls[0].is_ok() && balls[1].error.is_some());
    }

    #[test]
    fn labels_are_attached() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path());
        let labels = dir.path().join("labels.json");
        std::fs::write(&labels, r#"{"box": {"sporty": 1, "maker": "acme"}}"#).unwrap();
        cfg.labels = Some(labels);
        let s = cmd_encode(&cfg).unwrap();
        let b = s.manifest.entry("box").unwrap();
        assert_eq!(b.labels["sporty"], "1");
        assert_eq!(b.labels["maker"], "acme");
        assert!(s.manifest.entry("ball").unwrap().labels.is_empty());
    }

    #[test]
    fn decode_and_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        cmd_encode(&cfg).unwrap();
        let out = dir.path().join("ball.obj");
        let d = cmd_decode(&cfg.output_dir.join("ball.geoimg"), true, &out).unwrap();
        assert_eq!(d.faces, 4 * 15 * 15 - 4);
        assert!(d.decode_time <= d.total_time);
        let r = cmd_metrics(&out, &out, 200, 1, 0.9, EmdOptions::default()).unwrap();
        assert_eq!((r.chamfer, r.emd), (0.0, 0.0));
        assert!(cmd_metrics(&out, &dir.path().join("nope.obj"), 200, 1, 0.9, EmdOptions::default()).is_err());
    }

    #[test]
    fn bad_magic_fails_decode() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.geoimg");
        std::fs::write(&p, b"NOTGEOIMGDATA").unwrap();
        assert!(matches!(
            cmd_decode(&p, false, &dir.path().join("x.obj")),
            Err(PipelineError::Codec(crate::codec::CodecError::BadMagic))
        ));
    }
}
