use super::{decode, CodecError, Encoder, FillPolicy};
use crate::mesh::{normalize, sample_surface, PointSet, TriMesh, DEFAULT_SAMPLE_COUNT, DEFAULT_TARGET_RADIUS};
use crate::metrics::{chamfer, emd, mean_distance_to_surface};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripOptions {
    pub target_radius: f64,
    pub fill: FillPolicy,
    pub mirror: bool,
    /// Surface samples per mesh for the distance estimates.
    pub samples: usize,
    /// Points per set for EMD; the assignment is quadratic to cubic in this.
    pub emd_samples: usize,
    pub seed: u64,
}

impl Default for RoundtripOptions {
    fn default() -> Self {
        Self {
            target_radius: DEFAULT_TARGET_RADIUS,
            fill: FillPolicy::Nearest,
            mirror: true,
            samples: DEFAULT_SAMPLE_COUNT,
            emd_samples: 1024,
            seed: 0,
        }
    }
}

/// Distances between a mesh and its decoded geometry image, in the mesh's
/// own units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub resolution: usize,
    /// Symmetric mean sample-to-surface distance.
    pub chamfer: f64,
    /// Chamfer distance between the two sampled point sets.
    pub point_chamfer: f64,
    pub emd: f64,
    /// Fraction of pixel rays that hit the surface.
    pub valid_fraction: f64,
    pub decoded_vertices: usize,
    pub decoded_faces: usize,
}

/// Area samples, or the vertices themselves when the surface has no area
/// (tiny resolutions collapse onto the symmetry plane).
fn points_of(mesh: &TriMesh, k: usize, seed: u64) -> Result<PointSet, CodecError> {
    if mesh.surface_area() > 0.0 {
        return Ok(sample_surface(mesh, k, seed)?);
    }
    let v = mesh.vertices();
    if v.is_empty() {
        return Err(CodecError::EmptyMesh);
    }
    Ok(PointSet::new((0..k).map(|i| v[i % v.len()]).collect()))
}

/// Normalizes, encodes at `n`, decodes, maps back to the input frame and
/// measures the distance to the input mesh.
pub fn roundtrip_report(mesh: &TriMesh, n: usize, opts: &RoundtripOptions) -> Result<RoundtripReport, CodecError> {
    let (normalized, transform) = normalize(mesh, opts.target_radius)?;
    let (gi, stats) = Encoder::new(&normalized)?.encode(n, opts.fill)?;
    let decoded = decode(&gi, opts.mirror)?.map_vertices(|p| transform.invert(p));
    let pa = sample_surface(mesh, opts.samples, opts.seed)?;
    let pb = points_of(&decoded, opts.samples, opts.seed.wrapping_add(1))?;
    let point_chamfer = chamfer(&pa, &pb)?;
    let chamfer_surface = if decoded.is_empty() {
        point_chamfer
    } else {
        mean_distance_to_surface(&pa, &decoded)? + mean_distance_to_surface(&pb, mesh)?
    };
    let ea = sample_surface(mesh, opts.emd_samples, opts.seed.wrapping_add(2))?;
    let eb = points_of(&decoded, opts.emd_samples, opts.seed.wrapping_add(3))?;
    Ok(RoundtripReport {
        resolution: n,
        chamfer: chamfer_surface,
        point_chamfer,
        emd: emd(&ea, &eb)?,
        valid_fraction: stats.hit_fraction(),
        decoded_vertices: decoded.vertices().len(),
        decoded_faces: decoded.faces().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    fn quick() -> RoundtripOptions {
        RoundtripOptions {
            samples: 1000,
            emd_samples: 200,
            ..Default::default()
        }
    }

    #[test]
    fn sphere_roundtrip_is_close() {
        let sphere = primitives::icosphere(0.8, 5);
        let r = roundtrip_report(&sphere, 64, &quick()).unwrap();
        assert_eq!(r.valid_fraction, 1.0);
        assert!(r.chamfer < 5e-3, "{r:?}");
        // the EMD of two independent 200-point samples is dominated by sampling noise
        assert!(r.emd.is_finite() && r.emd < 0.5, "{r:?}");
    }

    #[test]
    fn tiny_resolution_does_not_crash() {
        let r = roundtrip_report(&primitives::cube(0.5), 2, &quick()).unwrap();
        assert!(r.chamfer.is_finite() && r.chamfer > 0.05, "{r:?}");
    }

    #[test]
    fn deterministic() {
        let m = primitives::cube(0.5);
        let a = roundtrip_report(&m, 32, &quick()).unwrap();
        let b = roundtrip_report(&m, 32, &quick()).unwrap();
        assert_eq!(a, b);
    }
}
