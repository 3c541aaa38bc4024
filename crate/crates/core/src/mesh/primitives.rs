//! Procedural test shapes. All closed shapes are centered at the origin with
//! outward (counterclockwise) winding.

use super::{TriMesh, Vec3};
use std::collections::HashMap;

/// Icosahedron refined `subdivisions` times, vertices projected to `radius`.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    star_shaped(subdivisions, |_| radius)
}

/// Refined icosahedron whose vertex in unit direction `d` sits at `radius(d) * d`.
pub fn star_shaped(subdivisions: u32, radius: impl Fn(&Vec3) -> f64) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (verts[a as usize] + verts[b as usize]).normalize();
                verts.push(m);
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.iter().map(|d| d * radius(d)).collect();
    TriMesh::new(verts, faces).expect("icosphere topology is valid")
}

/// Axis-aligned cube with the given half-width, two triangles per side.
pub fn cube(half: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(8);
    for i in 0..8u32 {
        let s = |bit: u32| if i & bit != 0 { half } else { -half };
        verts.push(Vec3::new(s(1), s(2), s(4)));
    }
    let faces = vec![
        // -x / +x
        [0, 4, 6],
        [0, 6, 2],
        [1, 3, 7],
        [1, 7, 5],
        // -y / +y
        [0, 1, 5],
        [0, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        // -z / +z
        [0, 2, 3],
        [0, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
    ];
    TriMesh::new(verts, faces).expect("cube topology is valid")
}

/// Square `size` x `size` grid in the z = 0 plane, centered at the origin,
/// `cells` quads per side, facing +z.
pub fn grid(cells: u32, size: f64) -> TriMesh {
    let n = cells + 1;
    let step = size / cells as f64;
    let mut verts = Vec::with_capacity((n * n) as usize);
    for j in 0..n {
        for i in 0..n {
            verts.push(Vec3::new(
                -size / 2.0 + i as f64 * step,
                -size / 2.0 + j as f64 * step,
                0.0,
            ));
        }
    }
    let mut faces = Vec::with_capacity((cells * cells * 2) as usize);
    for j in 0..cells {
        for i in 0..cells {
            let a = j * n + i;
            faces.push([a, a + 1, a + n + 1]);
            faces.push([a, a + n + 1, a + n]);
        }
    }
    TriMesh::new(verts, faces).expect("grid topology is valid")
}

/// Flat disc of radius `radius` in the plane y = `height`, facing +y.
pub fn disc(radius: f64, height: f64, segments: u32) -> TriMesh {
    let mut verts = vec![Vec3::new(0.0, height, 0.0)];
    for k in 0..segments {
        let a = std::f64::consts::TAU * k as f64 / segments as f64;
        verts.push(Vec3::new(radius * a.cos(), height, radius * a.sin()));
    }
    // (x, z) counterclockwise seen from +y runs from +z toward +x
    let faces = (0..segments)
        .map(|k| [0, 1 + (k + 1) % segments, 1 + k])
        .collect();
    TriMesh::new(verts, faces).expect("disc topology is valid")
}
