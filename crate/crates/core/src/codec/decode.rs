use super::image::{GeometryImage, NORMAL_CHANNELS};
use super::sphere_map::{snap_to_equator, SphereGrid};
use super::CodecError;
use crate::mesh::{TriMesh, Vec3};

const NO_VERTEX: u32 = u32::MAX;

/// Turns a geometry image back into a grid mesh: pixel `(i, j)` becomes
/// vertex `rad(i,j) * u(i,j)` and each 2x2 block of valid pixels becomes two
/// triangles.
///
/// With `mirror`, the half-shape is reflected across `y = 0`. Pixels on the
/// square's border lie on the symmetry cut: their directions are snapped to
/// the equator and the vertex is shared by both halves, so each border pixel
/// yields exactly one welded vertex. Baked normal channels become vertex
/// normals; the reflected copy has its y component negated.
pub fn decode(gi: &GeometryImage, mirror: bool) -> Result<TriMesh, CodecError> {
    let rad = gi.rad()?;
    let n = gi.resolution();
    let grid = SphereGrid::shared(n);
    let dirs = grid.directions();
    let mask = gi.mask();
    let normal_channels = match NORMAL_CHANNELS.map(|c| gi.channel(c)) {
        [Some(x), Some(y), Some(z)] => Some((x, y, z)),
        _ => None,
    };
    let last = n.saturating_sub(1);
    let border = |i: usize, j: usize| i == 0 || j == 0 || i == last || j == last;

    let valid_count = gi.valid_count();
    let capacity = if mirror { 2 * valid_count } else { valid_count };
    let mut vertices = Vec::with_capacity(capacity);
    advise_huge_pages(&mut vertices);
    let mut normals = normal_channels.map(|_| {
        let mut v = Vec::with_capacity(capacity);
        advise_huge_pages(&mut v);
        v
    });
    let mut index = vec![NO_VERTEX; n * n];

    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            if mask.is_some_and(|m| m[idx] == 0.0) {
                continue;
            }
            let on_cut = mirror && border(i, j);
            let dir = if on_cut { snap_to_equator(&dirs[idx]) } else { dirs[idx] };
            index[idx] = vertices.len() as u32;
            vertices.push(dir * rad[idx]);
            if let (Some(ns), Some((x, y, z))) = (normals.as_mut(), normal_channels) {
                let y = if on_cut { 0.0 } else { y[idx] };
                let v = Vec3::new(x[idx], y, z[idx]);
                let len = v.norm();
                ns.push(if len > 0.0 && len.is_finite() { v / len } else { dir });
            }
        }
    }
    let mirrored = if mirror {
        let mut mirrored = index.clone();
        for i in 1..last {
            for j in 1..last {
                let idx = i * n + j;
                let v = index[idx];
                if v == NO_VERTEX {
                    continue;
                }
                mirrored[idx] = vertices.len() as u32;
                let p = vertices[v as usize];
                vertices.push(Vec3::new(p.x, -p.y, p.z));
                if let Some(ns) = normals.as_mut() {
                    let m: Vec3 = ns[v as usize];
                    ns.push(Vec3::new(m.x, -m.y, m.z));
                }
            }
        }
        mirrored
    } else {
        Vec::new()
    };

    let quads = n.saturating_sub(1).pow(2);
    let mut faces = Vec::with_capacity(if mirror { 4 * quads } else { 2 * quads });
    advise_huge_pages(&mut faces);
    for side in 0..1 + mirror as usize {
        let map = if side == 0 { &index } else { &mirrored };
        for i in 0..last {
            let top = &map[i * n..(i + 1) * n];
            let bottom = &map[(i + 1) * n..(i + 2) * n];
            let edge_row = i == 0 || i + 1 == last;
            for j in 0..last {
                let (a, c) = (top[j], top[j + 1]);
                let (b, d) = (bottom[j], bottom[j + 1]);
                if a == NO_VERTEX || b == NO_VERTEX || c == NO_VERTEX || d == NO_VERTEX {
                    continue;
                }
                // a triangle with all corners on the cut is flat and coincides
                // with its own reflection; the two copies would form a fin
                let (flat_abc, flat_bdc) = if mirror && (edge_row || j == 0 || j + 1 == last) {
                    let (bb, bd, bc) = (border(i + 1, j), border(i + 1, j + 1), border(i, j + 1));
                    (border(i, j) && bb && bc, bb && bd && bc)
                } else {
                    (false, false)
                };
                // reflection flips orientation
                if !flat_abc {
                    faces.push(if side == 0 { [a, b, c] } else { [a, c, b] });
                }
                if !flat_bdc {
                    faces.push(if side == 0 { [b, d, c] } else { [b, c, d] });
                }
            }
        }
    }
    Ok(TriMesh::from_parts_unchecked(vertices, faces, normals))
}

/// Output buffers at high resolutions run to tens of megabytes; backing
/// them with transparent huge pages cuts page-fault time substantially.
#[cfg(target_os = "linux")]
fn advise_huge_pages<T>(v: &mut Vec<T>) {
    const HUGE: usize = 2 << 20;
    let start = v.as_mut_ptr() as usize;
    let end = start + v.capacity() * std::mem::size_of::<T>();
    let lo = start.next_multiple_of(HUGE);
    let hi = end / HUGE * HUGE;
    if hi > lo {
        // SAFETY: the range lies inside the vector's own allocation and
        // madvise only changes how the kernel backs it.
        unsafe {
            libc::madvise(lo as *mut libc::c_void, hi - lo, libc::MADV_HUGEPAGE);
        }
    }
}

#[cfg(not(target_os = "linux"))]
fn advise_huge_pages<T>(_: &mut Vec<T>) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::image::MASK;

    #[test]
    fn constant_rad_gives_hemisphere() {
        let n = 64;
        let gi = GeometryImage::from_rad(n, vec![1.0; n * n]).unwrap();
        let m = decode(&gi, false).unwrap();
        assert_eq!(m.vertices().len(), n * n);
        assert_eq!(m.faces().len(), 2 * (n - 1) * (n - 1));
        for v in m.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(v.y > 0.0);
        }
        for f in 0..m.faces().len() {
            let [a, b, c] = m.triangle(f);
            assert!(m.face_cross(f).dot(&(a + b + c)) > 0.0, "face {f} faces inward");
        }
    }

    #[test]
    fn mirror_welds_one_vertex_per_border_pixel() {
        let n = 16;
        let gi = GeometryImage::from_rad(n, vec![0.5; n * n]).unwrap();
        let m = decode(&gi, true).unwrap();
        let border = 4 * n - 4;
        assert_eq!(m.vertices().len(), 2 * n * n - border);
        assert!(m.vertices().len() <= 2 * n * n);
        // the two corner triangles lying flat on the cut are dropped from both halves
        assert_eq!(m.faces().len(), 4 * (n - 1) * (n - 1) - 4);
        let on_plane = m.vertices().iter().filter(|v| v.y.abs() < 1e-6 * 1.0).count();
        assert_eq!(on_plane, border);
        TriMesh::new(m.vertices().to_vec(), m.faces().to_vec()).unwrap();
        // closed surface: every edge shared by exactly two faces
        let mut edges = std::collections::HashMap::new();
        for f in m.faces() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        assert!(edges.values().all(|&c| c == 2));
    }

    #[test]
    fn masked_pixels_drop_their_quads() {
        let n = 4;
        let mut gi = GeometryImage::from_rad(n, vec![0.5; n * n]).unwrap();
        let mut mask = vec![1.0; n * n];
        mask[5] = 0.0;
        gi.set_channel(MASK, mask).unwrap();
        let m = decode(&gi, false).unwrap();
        assert_eq!(m.vertices().len(), 15);
        assert_eq!(m.faces().len(), 2 * (9 - 4));
    }

    #[test]
    fn normals_follow_channels_and_mirror() {
        let n = 6;
        let mut gi = GeometryImage::from_rad(n, vec![0.5; n * n]).unwrap();
        let grid = SphereGrid::shared(n);
        for (k, name) in NORMAL_CHANNELS.iter().enumerate() {
            gi.set_channel(name, grid.directions().iter().map(|d| d[k]).collect())
                .unwrap();
        }
        let m = decode(&gi, true).unwrap();
        let ns = m.vertex_normals().unwrap();
        for (v, nrm) in m.vertices().iter().zip(ns) {
            assert!((nrm - v.normalize()).norm() < 1e-12);
        }
    }

    #[test]
    fn missing_rad() {
        assert!(matches!(
            decode(&GeometryImage::empty(4), false),
            Err(CodecError::MissingRadChannel)
        ));
    }
}
