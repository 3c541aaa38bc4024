//! Equal-area map between the unit square and the hemisphere `y >= 0`.
//!
//! The square is first sent to the unit disk by the Shirley-Chiu concentric
//! map (area scale pi), then the disk is lifted to the hemisphere by the
//! inverse Lambert azimuthal projection about the pole `(0, 1, 0)` (area
//! scale 2). The composition has constant Jacobian determinant `2 pi`. The
//! square's boundary lands on the equator `y = 0`, which is the symmetry cut.
//!
//! Square coordinate `s` drives `x` and `t` drives `z`; with pixel rows
//! along `t` and columns along `s`, the grid winding `(i,j), (i+1,j), (i,j+1)`
//! faces away from the origin.

use super::CodecError;
use crate::mesh::Vec3;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::{Arc, Mutex, OnceLock};

const UNIT_TOLERANCE: f64 = 1e-6;
const HEMISPHERE_TOLERANCE: f64 = 1e-9;

/// Shirley-Chiu concentric map from `[-1,1]^2` to the unit disk.
fn concentric_square_to_disk(u: f64, v: f64) -> (f64, f64) {
    if u == 0.0 && v == 0.0 {
        return (0.0, 0.0);
    }
    let (r, theta) = if u.abs() > v.abs() {
        (u, FRAC_PI_4 * (v / u))
    } else {
        (v, FRAC_PI_2 - FRAC_PI_4 * (u / v))
    };
    let (sin, cos) = theta.sin_cos();
    (r * cos, r * sin)
}

fn concentric_disk_to_square(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    if a.abs() >= b.abs() {
        let u = r.copysign(a);
        (u, u * (b / a).atan() / FRAC_PI_4)
    } else {
        let v = r.copysign(b);
        (v * (a / b).atan() / FRAC_PI_4, v)
    }
}

/// Maps `(s, t)` in the unit square to a unit direction with `y >= 0`.
pub fn square_to_sphere(s: f64, t: f64) -> Vec3 {
    debug_assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t));
    let (a, b) = concentric_square_to_disk(2.0 * s - 1.0, 2.0 * t - 1.0);
    let r2 = (a * a + b * b).min(1.0);
    let k = (2.0 - r2).sqrt();
    Vec3::new(a * k, 1.0 - r2, b * k)
}

/// Inverse of [`square_to_sphere`].
pub fn sphere_to_square(u: &Vec3) -> Result<(f64, f64), CodecError> {
    if !u.iter().all(|c| c.is_finite())
        || (u.norm() - 1.0).abs() > UNIT_TOLERANCE
        || u.y < -HEMISPHERE_TOLERANCE
    {
        return Err(CodecError::InvalidDirection([u.x, u.y, u.z]));
    }
    // x^2 + z^2 = r^2 (2 - r^2) and 1 + y = 2 - r^2
    let denom = (1.0 + u.y.max(0.0)).sqrt();
    let (a, b) = (u.x / denom, u.z / denom);
    let (su, sv) = concentric_disk_to_square(a, b);
    Ok((
        ((su + 1.0) * 0.5).clamp(0.0, 1.0),
        ((sv + 1.0) * 0.5).clamp(0.0, 1.0),
    ))
}

/// Per-pixel projection directions for an `n x n` image, sampled at pixel
/// centers. Index `i * n + j` is row `i` (along `t`), column `j` (along `s`).
#[derive(Debug, Clone)]
pub struct SphereGrid {
    resolution: usize,
    directions: Vec<Vec3>,
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Self {
        let n = resolution;
        let inv = 1.0 / n as f64;
        let mut directions = Vec::with_capacity(n * n);
        for i in 0..n {
            let t = (i as f64 + 0.5) * inv;
            for j in 0..n {
                directions.push(square_to_sphere((j as f64 + 0.5) * inv, t));
            }
        }
        Self {
            resolution,
            directions,
        }
    }

    /// Process-wide grid for `resolution`, computed on first use.
    pub fn shared(resolution: usize) -> Arc<SphereGrid> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SphereGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(resolution)
            .or_insert_with(|| Arc::new(SphereGrid::new(resolution)))
            .clone()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn direction(&self, i: usize, j: usize) -> Vec3 {
        self.directions[i * self.resolution + j]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let last = self.resolution - 1;
        i == 0 || j == 0 || i == last || j == last
    }
}

/// Projects a direction onto the equator at the same azimuth.
pub(crate) fn snap_to_equator(u: &Vec3) -> Vec3 {
    let h = u.x.hypot(u.z);
    if h == 0.0 {
        Vec3::x()
    } else {
        Vec3::new(u.x / h, 0.0, u.z / h)
    }
}
