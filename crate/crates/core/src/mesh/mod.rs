//! Indexed triangle meshes, point samples and the preprocessing steps that
//! prepare a mesh for geometry-image encoding.

mod io;
mod obj;
mod ply;
pub mod primitives;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub use io::{load_mesh, save_mesh, save_mesh_with, MeshFormat};
pub use obj::{read_obj, write_obj, write_obj_with};
pub use ply::{read_ply, write_ply, write_ply_with, PlyEncoding};

/// Float precision for mesh writers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    /// Values read back bit-exact.
    #[default]
    Double,
    /// Enough for data that came from `f32`, such as decoded geometry images.
    Single,
}

pub type Vec3 = Vector3<f64>;

/// Default number of surface samples used by the point-set metrics.
pub const DEFAULT_SAMPLE_COUNT: usize = 5000;

/// Default radius the normalized shape is scaled to inside the unit
/// projection sphere.
pub const DEFAULT_TARGET_RADIUS: f64 = 0.9;

const NORMAL_UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: u32,
        vertex_count: usize,
    },
    #[error("face {0} repeats a vertex index")]
    DegenerateFace(usize),
    #[error("vertex normal {0} is not unit length")]
    NonUnitNormal(usize),
    #[error("attribute `{name}` has {len} entries for {vertex_count} vertices")]
    AttributeLength {
        name: &'static str,
        len: usize,
        vertex_count: usize,
    },
    #[error("all vertices coincide")]
    DegenerateMesh,
    #[error("surface has zero total area")]
    ZeroAreaSurface,
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle mesh. Faces wind counterclockwise around the outward
/// normal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    vertex_normals: Option<Vec<Vec3>>,
    vertex_colors: Option<Vec<[f64; 3]>>,
}

impl TriMesh {
    /// Builds a mesh, checking index bounds and rejecting repeated indices.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx as usize >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index: idx,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace(fi));
            }
        }
        Ok(Self {
            vertices,
            faces,
            vertex_normals: None,
            vertex_colors: None,
        })
    }

    /// Caller guarantees the invariants checked by [`TriMesh::new`].
    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        vertex_normals: Option<Vec<Vec3>>,
    ) -> Self {
        Self {
            vertices,
            faces,
            vertex_normals,
            vertex_colors: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self, MeshError> {
        if normals.len() != self.vertices.len() {
            return Err(MeshError::AttributeLength {
                name: "normals",
                len: normals.len(),
                vertex_count: self.vertices.len(),
            });
        }
        if let Some(i) = normals
            .iter()
            .position(|n| (n.norm() - 1.0).abs() > NORMAL_UNIT_TOLERANCE)
        {
            return Err(MeshError::NonUnitNormal(i));
        }
        self.vertex_normals = Some(normals);
        Ok(self)
    }

    /// Attaches per-vertex RGB colors (any range; baked verbatim).
    pub fn with_colors(mut self, colors: Vec<[f64; 3]>) -> Result<Self, MeshError> {
        if colors.len() != self.vertices.len() {
            return Err(MeshError::AttributeLength {
                name: "colors",
                len: colors.len(),
                vertex_count: self.vertices.len(),
            });
        }
        self.vertex_colors = Some(colors);
        Ok(self)
    }

    pub fn without_normals(mut self) -> Self {
        self.vertex_normals = None;
        self
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn vertex_normals(&self) -> Option<&[Vec3]> {
        self.vertex_normals.as_deref()
    }

    pub fn vertex_colors(&self) -> Option<&[[f64; 3]]> {
        self.vertex_colors.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Unnormalized face normal; its length is twice the triangle area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Applies `f` to every vertex position. Normals are carried through
    /// unchanged, so only use this for rotations and uniform scalings.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(f).collect(),
            ..self.clone()
        }
    }

    /// Rotates positions and normals by `rotation`.
    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| rotation * v).collect(),
            faces: self.faces.clone(),
            vertex_normals: self
                .vertex_normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| rotation * n).collect()),
            vertex_colors: self.vertex_colors.clone(),
        }
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Unordered 3D point samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vec3>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        let sum: Vec3 = self.points.iter().sum();
        sum / self.points.len().max(1) as f64
    }
}

/// Maps input coordinates `p` to normalized coordinates `(p + translation) * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub translation: [f64; 3],
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self {
            translation: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p + Vec3::from(self.translation)) * self.scale
    }

    pub fn invert(&self, q: &Vec3) -> Vec3 {
        q / self.scale - Vec3::from(self.translation)
    }
}

/// Centers the bounding box at the origin and scales uniformly so the
/// farthest vertex lies at `target_radius`.
pub fn normalize(
    mesh: &TriMesh,
    target_radius: f64,
) -> Result<(TriMesh, NormalizationTransform), MeshError> {
    assert!(
        target_radius > 0.0 && target_radius < 1.0,
        "target radius must lie in (0, 1), got {target_radius}"
    );
    if mesh.vertices.is_empty() || mesh.faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in &mesh.vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let center = (lo + hi) * 0.5;
    let max_dist = mesh
        .vertices
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max);
    if max_dist <= f64::EPSILON * hi.abs().max().max(1.0) {
        return Err(MeshError::DegenerateMesh);
    }
    let transform = NormalizationTransform {
        translation: (-center).into(),
        scale: target_radius / max_dist,
    };
    Ok((mesh.map_vertices(|v| transform.apply(v)), transform))
}

/// Draws `k` points uniformly with respect to surface area.
pub fn sample_surface(mesh: &TriMesh, k: usize, seed: u64) -> Result<PointSet, MeshError> {
    assert!(k >= 1, "sample count must be positive");
    if mesh.faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let mut cdf = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    if total <= 0.0 || !total.is_finite() {
        return Err(MeshError::ZeroAreaSurface);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..k)
        .map(|_| {
            let x = rng.random::<f64>() * total;
            // first face whose cumulative area exceeds x; skips zero-area faces
            let face = cdf.partition_point(|&c| c <= x).min(cdf.len() - 1);
            let [a, b, c] = mesh.triangle(face);
            let r1: f64 = rng.random::<f64>().sqrt();
            let r2: f64 = rng.random();
            a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2)
        })
        .collect();
    Ok(PointSet::new(points))
}

/// Area-weighted smooth vertex normals. Vertices without incident area get
/// `(0, 0, 1)`; their indices are returned alongside the mesh.
pub fn smooth_vertex_normals_report(mesh: &TriMesh) -> (TriMesh, Vec<usize>) {
    let mut acc = vec![Vec3::zeros(); mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        let n = mesh.face_cross(fi);
        for &v in f {
            acc[v as usize] += n;
        }
    }
    let mut fallback = Vec::new();
    let normals = acc
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let len = n.norm();
            if len > 0.0 && len.is_finite() {
                n / len
            } else {
                fallback.push(i);
                Vec3::z()
            }
        })
        .collect();
    let mut out = mesh.clone();
    out.vertex_normals = Some(normals);
    (out, fallback)
}

/// Area-weighted smooth vertex normals; warns about isolated vertices.
pub fn smooth_vertex_normals(mesh: &TriMesh) -> TriMesh {
    let (out, fallback) = smooth_vertex_normals_report(mesh);
    if !fallback.is_empty() {
        log::warn!(
            "{} vertices have no incident faces; normal set to (0,0,1) (first: {})",
            fallback.len(),
            fallback[0]
        );
    }
    out
}
