//! Shape similarity: Chamfer distance, earth mover's distance and light
//! field distance.
//!
//! Chamfer and EMD are per-point means; [`MetricReport`] also carries the
//! conventional table scaling (CD x 1e3, EMD x 1e2).

mod chamfer;
mod emd;
pub mod fourier;
mod kdtree;
pub mod lfd;
pub mod raster;
pub mod zernike;

pub use chamfer::{chamfer, mean_distance_to_surface, surface_chamfer};
pub use emd::{auction, emd, emd_with, hungarian, EmdOptions, EmdSolver, GroundDistance, EXACT_LIMIT};
pub use fourier::fourier_contour_descriptor;
pub use kdtree::KdTree;
pub use lfd::{descriptor_distance, lfd, light_field_descriptor, LightFieldDescriptor};
pub use raster::{rasterize_silhouette, BinaryImage};
pub use zernike::zernike_moments;

use crate::mesh::{sample_surface, MeshError, TriMesh};
use serde::{Deserialize, Serialize};

pub const CHAMFER_REPORT_SCALE: f64 = 1e3;
pub const EMD_REPORT_SCALE: f64 = 1e2;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("point set is empty")]
    EmptySet,
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("point sets differ in size: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("image has no foreground pixels")]
    EmptyImage,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub chamfer: f64,
    pub emd: f64,
    pub lfd: f64,
    /// `chamfer * 1e3`.
    pub chamfer_scaled: f64,
    /// `emd * 1e2`.
    pub emd_scaled: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub ground: GroundDistance,
}

/// Samples `k` points from each mesh with the same seed and computes all
/// three metrics, so identical meshes score exactly zero. Meshes are used
/// as given; normalize first for comparable values.
pub fn evaluate(a: &TriMesh, b: &TriMesh, k: usize, seed: u64, opts: EmdOptions) -> Result<MetricReport, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyMesh);
    }
    let pa = sample_surface(a, k, seed)?;
    let pb = sample_surface(b, k, seed)?;
    let cd = chamfer(&pa, &pb)?;
    let em = emd_with(&pa, &pb, opts)?;
    let lf = lfd(a, b)?;
    Ok(MetricReport {
        chamfer: cd,
        emd: em,
        lfd: lf,
        chamfer_scaled: cd * CHAMFER_REPORT_SCALE,
        emd_scaled: em * EMD_REPORT_SCALE,
        sample_count: k,
        seed,
        ground: opts.ground,
    })
}
