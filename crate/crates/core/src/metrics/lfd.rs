//! Light field distance: silhouettes from the 20 vertices of a regular
//! dodecahedron, compared under its 60 rotations.

use super::fourier::{fourier_contour_descriptor, DEFAULT_COEFFS};
use super::raster::{rasterize_projection, view_frame};
use super::zernike::{moment_indices, zernike_moments, DEFAULT_ORDER};
use super::MetricError;
use crate::mesh::{TriMesh, Vec3};
use nalgebra::Matrix3;
use rayon::prelude::*;
use std::sync::OnceLock;

pub const VIEW_COUNT: usize = 20;
pub const RASTER_SIZE: usize = 128;

/// Camera directions: unit vectors to the dodecahedron's vertices.
pub fn dodecahedron_vertices() -> Vec<Vec3> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let inv = 1.0 / phi;
    let mut v = Vec::with_capacity(VIEW_COUNT);
    for &x in &[-1.0, 1.0] {
        for &y in &[-1.0, 1.0] {
            for &z in &[-1.0, 1.0] {
                v.push(Vec3::new(x, y, z));
            }
        }
    }
    for &a in &[-1.0, 1.0] {
        for &b in &[-1.0, 1.0] {
            v.push(Vec3::new(0.0, a * inv, b * phi));
            v.push(Vec3::new(a * inv, b * phi, 0.0));
            v.push(Vec3::new(a * phi, 0.0, b * inv));
        }
    }
    v.into_iter().map(|p| p.normalize()).collect()
}

/// One rotation of the group with the camera permutation it induces:
/// `rotation * cameras[k] == cameras[perm[k]]`.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub rotation: Matrix3<f64>,
    pub perm: [usize; VIEW_COUNT],
}

struct Setup {
    cameras: Vec<Vec3>,
    group: Vec<GroupElement>,
    /// Three image-plane frames per camera, related to those of camera 0 by
    /// group elements, so a group rotation of the mesh maps the frame set of
    /// one camera exactly onto the frame set of another.
    frames: Vec<[(Vec3, Vec3); 3]>,
}

fn frame_matrix(a: &Vec3, b: &Vec3) -> Matrix3<f64> {
    let e1 = a.normalize();
    let e2 = (b - e1 * b.dot(&e1)).normalize();
    let e3 = e1.cross(&e2);
    Matrix3::from_columns(&[e1, e2, e3])
}

fn find_vertex(cameras: &[Vec3], p: &Vec3) -> Option<usize> {
    cameras.iter().position(|c| (c - p).norm() < 1e-9)
}

fn setup() -> &'static Setup {
    static SETUP: OnceLock<Setup> = OnceLock::new();
    SETUP.get_or_init(|| {
        let cameras = dodecahedron_vertices();
        let c0 = cameras[0];
        let edge_dot = cameras[1..].iter().map(|c| c.dot(&c0)).fold(f64::NEG_INFINITY, f64::max);
        let c1 = *cameras[1..]
            .iter()
            .find(|c| (c.dot(&c0) - edge_dot).abs() < 1e-9)
            .expect("vertex has a neighbour");
        let base = frame_matrix(&c0, &c1);
        let mut group = Vec::with_capacity(60);
        for a in &cameras {
            for b in &cameras {
                if (a.dot(b) - edge_dot).abs() > 1e-9 {
                    continue;
                }
                let rotation = frame_matrix(a, b) * base.transpose();
                let mut perm = [0; VIEW_COUNT];
                let ok = cameras.iter().enumerate().all(|(k, c)| {
                    find_vertex(&cameras, &(rotation * c)).map(|j| perm[k] = j).is_some()
                });
                if ok {
                    group.push(GroupElement { rotation, perm });
                }
            }
        }
        assert_eq!(group.len(), 60, "dodecahedral rotation group");

        let stabilizer: Vec<&GroupElement> = group.iter().filter(|g| g.perm[0] == 0).collect();
        let (right0, up0) = view_frame(&c0);
        let frames = (0..VIEW_COUNT)
            .map(|k| {
                let g = group.iter().find(|g| g.perm[0] == k).expect("group is transitive");
                std::array::from_fn(|a| {
                    let m = g.rotation * stabilizer[a].rotation;
                    (m * right0, m * up0)
                })
            })
            .collect();
        Setup { cameras, group, frames }
    })
}

/// The 60 rotations mapping the camera set onto itself.
pub fn rotation_group() -> &'static [GroupElement] {
    &setup().group
}

/// Per-view silhouette descriptors: Zernike magnitudes followed by contour
/// Fourier magnitudes, each averaged over three in-plane frames.
#[derive(Debug, Clone, PartialEq)]
pub struct LightFieldDescriptor {
    pub views: Vec<Vec<f64>>,
}

impl LightFieldDescriptor {
    pub fn view_len() -> usize {
        moment_indices(DEFAULT_ORDER).len() + DEFAULT_COEFFS
    }

    pub fn len(&self) -> usize {
        self.views.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

fn view_descriptor(mesh: &TriMesh, right: &Vec3, up: &Vec3) -> Vec<f64> {
    let img = rasterize_projection(mesh, right, up, RASTER_SIZE);
    let mut d = zernike_moments(&img, DEFAULT_ORDER);
    match fourier_contour_descriptor(&img, DEFAULT_COEFFS) {
        Ok(f) => d.extend(f),
        Err(_) => {
            log::warn!("degenerate silhouette: blank view, contour descriptor set to zero");
            d.extend(std::iter::repeat_n(0.0, DEFAULT_COEFFS));
        }
    }
    d
}

pub fn light_field_descriptor(mesh: &TriMesh) -> Result<LightFieldDescriptor, MetricError> {
    if mesh.is_empty() {
        return Err(MetricError::EmptyMesh);
    }
    let s = setup();
    let views = s
        .frames
        .par_iter()
        .map(|frames| {
            let mut acc = vec![0.0; LightFieldDescriptor::view_len()];
            for (right, up) in frames {
                for (a, v) in acc.iter_mut().zip(view_descriptor(mesh, right, up)) {
                    *a += v / frames.len() as f64;
                }
            }
            acc
        })
        .collect();
    Ok(LightFieldDescriptor { views })
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Minimum over the rotation group of the summed per-view L1 distance, with
/// the views of `b` permuted by the rotation.
pub fn descriptor_distance(a: &LightFieldDescriptor, b: &LightFieldDescriptor) -> f64 {
    rotation_group()
        .iter()
        .map(|g| (0..VIEW_COUNT).map(|k| l1(&a.views[k], &b.views[g.perm[k]])).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn lfd(a: &TriMesh, b: &TriMesh) -> Result<f64, MetricError> {
    Ok(descriptor_distance(&light_field_descriptor(a)?, &light_field_descriptor(b)?))
}

/// Camera directions in view order.
pub fn cameras() -> &'static [Vec3] {
    &setup().cameras
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;
    use nalgebra::Rotation3;

    #[test]
    fn cameras_are_a_dodecahedron() {
        let c = cameras();
        assert_eq!(c.len(), 20);
        for p in c {
            assert!((p.norm() - 1.0).abs() < 1e-12);
            let neighbours = c.iter().filter(|q| (q.dot(p) - 5f64.sqrt() / 3.0).abs() < 1e-9).count();
            assert_eq!(neighbours, 3);
        }
    }

    #[test]
    fn group_is_closed_and_proper() {
        let g = rotation_group();
        for e in g {
            assert!((e.rotation.determinant() - 1.0).abs() < 1e-9);
            let mut seen = e.perm.to_vec();
            seen.sort_unstable();
            assert_eq!(seen, (0..20).collect::<Vec<_>>());
        }
        let a = &g[7].rotation;
        let b = &g[31].rotation;
        let ab = a * b;
        assert!(g.iter().any(|e| (e.rotation - ab).norm() < 1e-9));
    }

    #[test]
    fn descriptor_shape() {
        let d = light_field_descriptor(&primitives::icosphere(0.8, 2)).unwrap();
        assert_eq!(d.views.len(), 20);
        assert_eq!(d.len(), 20 * 46);
        assert!(d.views.iter().flatten().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn identity_is_zero() {
        let m = primitives::cube(0.5);
        assert_eq!(lfd(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn invariant_under_group_rotations() {
        let m = TriMesh::new(
            primitives::cube(0.4).vertices().iter().map(|p| Vec3::new(p.x * 1.6, p.y, p.z * 0.7)).collect(),
            primitives::cube(0.4).faces().to_vec(),
        )
        .unwrap();
        let da = light_field_descriptor(&m).unwrap();
        let norm: f64 = da.views.iter().flatten().map(|v| v.abs()).sum();
        for g in rotation_group().iter().step_by(13) {
            let r = Rotation3::from_matrix_unchecked(g.rotation);
            let db = light_field_descriptor(&m.rotated(&r)).unwrap();
            assert!(descriptor_distance(&da, &db) <= 1e-3 * norm);
        }
    }

    #[test]
    fn orders_sphere_cube_icosphere() {
        let sphere = primitives::icosphere(0.8, 4);
        let ico = primitives::icosphere(0.8, 1);
        let cube = primitives::cube(0.8 / 3f64.sqrt());
        assert!(lfd(&sphere, &cube).unwrap() > lfd(&sphere, &ico).unwrap());
    }

    #[test]
    fn empty_mesh() {
        let e = TriMesh::new(vec![], vec![]).unwrap();
        assert!(matches!(lfd(&e, &e), Err(MetricError::EmptyMesh)));
    }
}
