use super::bvh::{Bvh, Hit};
use super::image::{GeometryImage, COLOR_CHANNELS, MASK, NORMAL_CHANNELS, RAD};
use super::sphere_map::SphereGrid;
use super::CodecError;
use crate::mesh::{TriMesh, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// What to do with pixels whose ray misses the mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillPolicy {
    /// Copy values from the nearest hit pixel (grid BFS); every pixel is
    /// then valid and decodes to a closed half-shape.
    #[default]
    Nearest,
    /// Leave missed pixels masked out.
    Masked,
}

impl std::str::FromStr for FillPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "masked" => Ok(Self::Masked),
            other => Err(format!("unknown fill policy `{other}` (nearest|masked)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeStats {
    pub hit_pixels: usize,
    pub total_pixels: usize,
}

impl EncodeStats {
    pub fn hit_fraction(&self) -> f64 {
        self.hit_pixels as f64 / self.total_pixels as f64
    }
}

/// Ray caster for one mesh, reusable for encoding and attribute baking.
pub struct Encoder<'a> {
    mesh: &'a TriMesh,
    bvh: Bvh,
    sphere_radius: f64,
}

impl<'a> Encoder<'a> {
    pub fn new(mesh: &'a TriMesh) -> Result<Self, CodecError> {
        if mesh.is_empty() {
            return Err(CodecError::EmptyMesh);
        }
        let sphere_radius = 1.0;
        let max = mesh.max_vertex_norm();
        if max >= sphere_radius {
            return Err(CodecError::NotNormalized { max_norm: max });
        }
        Ok(Self {
            mesh,
            bvh: Bvh::build(mesh),
            sphere_radius,
        })
    }

    fn cast(&self, grid: &SphereGrid) -> Vec<Option<Hit>> {
        grid.directions()
            .par_iter()
            .map(|d| self.bvh.farthest_hit(&Vec3::zeros(), d))
            .collect()
    }

    /// Rad image of the outermost surface along every pixel ray.
    pub fn encode(&self, n: usize, fill: FillPolicy) -> Result<(GeometryImage, EncodeStats), CodecError> {
        if n < 2 {
            return Err(CodecError::ResolutionTooSmall(n));
        }
        let grid = SphereGrid::shared(n);
        let hits = self.cast(&grid);
        let stats = EncodeStats {
            hit_pixels: hits.iter().filter(|h| h.is_some()).count(),
            total_pixels: n * n,
        };
        if stats.hit_pixels == 0 {
            return Err(CodecError::AllRaysMiss);
        }
        let mut rad: Vec<f64> = hits
            .iter()
            .map(|h| h.map_or(0.0, |h| h.t.min(self.sphere_radius)))
            .collect();
        let mut mask: Vec<f64> = hits.iter().map(|h| h.is_some() as u8 as f64).collect();
        if fill == FillPolicy::Nearest && stats.hit_pixels < stats.total_pixels {
            let source = nearest_hit_pixels(n, &hits);
            rad = source.iter().map(|&s| rad[s]).collect();
            mask.iter_mut().for_each(|m| *m = 1.0);
        }
        let mut gi = GeometryImage::empty(n);
        gi.set_channel(RAD, rad)?;
        gi.set_channel(MASK, mask)?;
        Ok((gi, stats))
    }

    /// Adds smooth-normal channels (and color channels when the mesh has
    /// vertex colors), interpolated at each pixel's outermost hit.
    pub fn bake(&self, gi: &GeometryImage) -> Result<GeometryImage, CodecError> {
        let normals = self.mesh.vertex_normals().ok_or(CodecError::MissingNormals)?;
        let n = gi.resolution();
        let grid = SphereGrid::shared(n);
        let hits = self.cast(&grid);
        if hits.iter().all(Option::is_none) {
            return Err(CodecError::AllRaysMiss);
        }
        // pixels without their own hit borrow from the nearest pixel that has one
        let source = nearest_hit_pixels(n, &hits);
        let faces = self.mesh.faces();
        let interp = |idx: usize, attr: &dyn Fn(usize) -> Vec3| -> Vec3 {
            let h = hits[source[idx]].expect("source pixels have hits");
            let f = faces[h.face];
            attr(f[0] as usize) * h.bary[0]
                + attr(f[1] as usize) * h.bary[1]
                + attr(f[2] as usize) * h.bary[2]
        };

        let mut out = gi.clone();
        let mut channels = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
        for idx in 0..n * n {
            if !gi.is_valid(idx) {
                continue;
            }
            let v = interp(idx, &|i| normals[i]);
            let len = v.norm();
            let v = if len > 0.0 { v / len } else { grid.directions()[idx] };
            for k in 0..3 {
                channels[k][idx] = v[k];
            }
        }
        for (name, data) in NORMAL_CHANNELS.iter().zip(channels) {
            out.set_channel(name, data)?;
        }
        if let Some(colors) = self.mesh.vertex_colors() {
            let mut channels = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
            for idx in 0..n * n {
                if gi.is_valid(idx) {
                    let c = interp(idx, &|i| Vec3::from(colors[i]));
                    for k in 0..3 {
                        channels[k][idx] = c[k];
                    }
                }
            }
            for (name, data) in COLOR_CHANNELS.iter().zip(channels) {
                out.set_channel(name, data)?;
            }
        }
        Ok(out)
    }
}

/// For every pixel, the index of the closest pixel (4-neighbour grid BFS,
/// raster-order tie breaking) whose ray hit the mesh.
fn nearest_hit_pixels(n: usize, hits: &[Option<Hit>]) -> Vec<usize> {
    let mut source = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    for (idx, h) in hits.iter().enumerate() {
        if h.is_some() {
            source[idx] = idx;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (i, j) = (idx / n, idx % n);
        let neighbours = [
            (i > 0).then(|| idx - n),
            (j > 0).then(|| idx - 1),
            (j + 1 < n).then(|| idx + 1),
            (i + 1 < n).then(|| idx + n),
        ];
        for nb in neighbours.into_iter().flatten() {
            if source[nb] == usize::MAX {
                source[nb] = source[idx];
                queue.push_back(nb);
            }
        }
    }
    source
}

/// Encodes a normalized mesh into an `n x n` rad image.
pub fn encode(mesh: &TriMesh, n: usize, fill: FillPolicy) -> Result<GeometryImage, CodecError> {
    Ok(Encoder::new(mesh)?.encode(n, fill)?.0)
}

/// Bakes the mesh's vertex normals (and colors) into `gi`'s pixel grid.
pub fn bake_attributes(mesh: &TriMesh, gi: &GeometryImage) -> Result<GeometryImage, CodecError> {
    if mesh.vertex_normals().is_none() {
        return Err(CodecError::MissingNormals);
    }
    Encoder::new(mesh)?.bake(gi)
}
