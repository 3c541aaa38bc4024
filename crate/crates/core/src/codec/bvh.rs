//! Bounding-volume hierarchy over mesh triangles for ray queries.

use crate::mesh::{TriMesh, Vec3};

const LEAF_SIZE: usize = 4;
/// Barycentric slack so rays through shared edges and vertices hit at least
/// one of the adjacent triangles.
const BARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn distance_squared(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }

    /// Parametric interval where the ray is inside the box, if any.
    fn clip(&self, origin: &Vec3, inv_dir: &Vec3) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if inv_dir[k].is_infinite() {
                if origin[k] < self.lo[k] || origin[k] > self.hi[k] {
                    return None;
                }
                continue;
            }
            let a = (self.lo[k] - origin[k]) * inv_dir[k];
            let b = (self.hi[k] - origin[k]) * inv_dir[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

#[derive(Debug)]
enum Node {
    Leaf { bounds: Aabb, start: u32, end: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// A ray-triangle hit: distance along the ray, face index and barycentric
/// weights of the face's three corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub face: usize,
    pub bary: [f64; 3],
}

#[derive(Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Face indices, permuted so every leaf owns a contiguous range.
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.faces().len()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        if !tris.is_empty() {
            Self::build_node(&tris, &centroids, &mut order, 0, &mut nodes);
        }
        Self { nodes, order, tris }
    }

    fn build_node(
        tris: &[[Vec3; 3]],
        centroids: &[Vec3],
        order: &mut [u32],
        offset: usize,
        nodes: &mut Vec<Node>,
    ) -> u32 {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &f in order.iter() {
            for p in &tris[f as usize] {
                bounds.grow(p);
            }
            cbounds.grow(&centroids[f as usize]);
        }
        let id = nodes.len() as u32;
        if order.len() <= LEAF_SIZE {
            nodes.push(Node::Leaf {
                bounds,
                start: offset as u32,
                end: (offset + order.len()) as u32,
            });
            return id;
        }
        let extent = cbounds.hi - cbounds.lo;
        let axis = extent.imax();
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis])
        });
        nodes.push(Node::Leaf {
            bounds,
            start: 0,
            end: 0,
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = Self::build_node(tris, centroids, lo, offset, nodes);
        let right = Self::build_node(tris, centroids, hi, offset + mid, nodes);
        nodes[id as usize] = Node::Inner {
            bounds,
            left,
            right,
        };
        id
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    fn intersect_triangle(&self, face: usize, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        let [a, b, c] = &self.tris[face];
        let e1 = b - a;
        let e2 = c - a;
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - a;
        let u = s.dot(&p) * inv;
        if !(-BARY_EPS..=1.0 + BARY_EPS).contains(&u) {
            return None;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < -BARY_EPS || u + v > 1.0 + BARY_EPS {
            return None;
        }
        let t = e2.dot(&q) * inv;
        (t > 0.0).then_some(Hit {
            t,
            face,
            bary: [1.0 - u - v, u, v],
        })
    }

    /// Intersection with the largest positive `t`, i.e. the outermost surface
    /// crossed by the ray.
    pub fn farthest_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = dir.map(|d| 1.0 / d);
        let mut best: Option<Hit> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let Some((_, t1)) = node.bounds().clip(origin, &inv_dir) else {
                continue;
            };
            if t1 <= 0.0 || best.is_some_and(|h| t1 < h.t) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &f in &self.order[start as usize..end as usize] {
                        if let Some(hit) = self.intersect_triangle(f as usize, origin, dir) {
                            if best.is_none_or(|b| hit.t > b.t) {
                                best = Some(hit);
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        best
    }
}

/// Closest point to `p` on triangle `abc` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = va + vb + vc;
    if denom == 0.0 || !denom.is_finite() {
        // degenerate triangle: fall back to the closest of its edges
        let seg = |s: &Vec3, e: &Vec3| {
            let d = e - s;
            let len2 = d.norm_squared();
            let t = if len2 > 0.0 { ((p - s).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            s + d * t
        };
        return [seg(a, b), seg(b, c), seg(c, a)]
            .into_iter()
            .min_by(|x, y| (x - p).norm_squared().total_cmp(&(y - p).norm_squared()))
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

impl Bvh {
    /// Squared distance from `p` to the closest point of any triangle.
    pub fn distance_squared(&self, p: &Vec3) -> Option<f64> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = f64::INFINITY;
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.bounds().distance_squared(p) >= best {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &f in &self.order[start as usize..end as usize] {
                        let [a, b, c] = &self.tris[f as usize];
                        let q = closest_point_on_triangle(p, a, b, c);
                        best = best.min((q - p).norm_squared());
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left as usize].bounds().distance_squared(p);
                    let dr = self.nodes[right as usize].bounds().distance_squared(p);
                    // visit the nearer child first
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_farthest(bvh: &Bvh, o: &Vec3, d: &Vec3) -> Option<f64> {
        (0..bvh.triangle_count())
            .filter_map(|f| bvh.intersect_triangle(f, o, d))
            .map(|h| h.t)
            .reduce(f64::max)
    }

    #[test]
    fn matches_brute_force() {
        let mesh = primitives::star_shaped(3, |d| 0.5 + 0.2 * (3.0 * d.x).sin() * d.z);
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let d = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            )
            .normalize();
            let o = Vec3::new(rng.random::<f64>() * 0.1, 0.0, 0.0);
            let got = bvh.farthest_hit(&o, &d).map(|h| h.t);
            assert_eq!(got, brute_farthest(&bvh, &o, &d));
        }
    }

    #[test]
    fn keeps_the_outer_shell() {
        // inner sphere inside an outer sphere: only the outer one counts
        let inner = primitives::icosphere(0.3, 2);
        let outer = primitives::icosphere(0.7, 2);
        let offset = inner.vertices().len() as u32;
        let verts = [inner.vertices(), outer.vertices()].concat();
        let faces = inner
            .faces()
            .iter()
            .copied()
            .chain(outer.faces().iter().map(|f| f.map(|i| i + offset)))
            .collect();
        let both = TriMesh::new(verts, faces).unwrap();
        let hit = Bvh::build(&both).farthest_hit(&Vec3::zeros(), &Vec3::y()).unwrap();
        assert!((hit.t - 0.7).abs() < 1e-12, "{}", hit.t);
        assert!(hit.face >= inner.faces().len());
    }

    #[test]
    fn distance_matches_brute_force() {
        let mesh = primitives::star_shaped(2, |d| 0.6 + 0.1 * d.y);
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let p = Vec3::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            );
            let brute = (0..mesh.faces().len())
                .map(|f| {
                    let [a, b, c] = mesh.triangle(f);
                    (closest_point_on_triangle(&p, &a, &b, &c) - p).norm_squared()
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(bvh.distance_squared(&p).unwrap(), brute);
        }
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (Vec3::zeros(), Vec3::x(), Vec3::y());
        let q = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 3.0), &a, &b, &c);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c), a);
        let q = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn axis_rays_and_misses() {
        let bvh = Bvh::build(&primitives::cube(0.5));
        let h = bvh.farthest_hit(&Vec3::zeros(), &Vec3::x()).unwrap();
        assert!((h.t - 0.5).abs() < 1e-12);
        assert!((h.bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d = primitives::disc(0.5, 0.2, 12);
        assert!(Bvh::build(&d).farthest_hit(&Vec3::zeros(), &Vec3::x()).is_none());
    }
}
