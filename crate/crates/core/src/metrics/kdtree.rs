use crate::mesh::Vec3;

#[derive(Debug, Clone, Copy)]
struct Node {
    point: u32,
    axis: u8,
    left: u32,
    right: u32,
}

const NONE: u32 = u32::MAX;

/// Static 3-d tree over a point set for nearest-neighbour queries.
#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    nodes: Vec<Node>,
    root: u32,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [Vec3]) -> Self {
        let mut idx: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = Self::build_rec(points, &mut idx, &mut nodes);
        Self { points, nodes, root }
    }

    fn build_rec(points: &[Vec3], idx: &mut [u32], nodes: &mut Vec<Node>) -> u32 {
        if idx.is_empty() {
            return NONE;
        }
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &i in idx.iter() {
            lo = lo.inf(&points[i as usize]);
            hi = hi.sup(&points[i as usize]);
        }
        let axis = (hi - lo).imax();
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis])
        });
        let id = nodes.len() as u32;
        nodes.push(Node {
            point: idx[mid],
            axis: axis as u8,
            left: NONE,
            right: NONE,
        });
        let (l, r) = idx.split_at_mut(mid);
        let left = Self::build_rec(points, l, nodes);
        let right = Self::build_rec(points, &mut r[1..], nodes);
        nodes[id as usize].left = left;
        nodes[id as usize].right = right;
        id
    }

    /// Index of and squared distance to the closest point, `None` if empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.root == NONE {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(self.root, q, &mut best);
        Some(best)
    }

    fn search(&self, id: u32, q: &Vec3, best: &mut (usize, f64)) {
        let node = self.nodes[id as usize];
        let p = &self.points[node.point as usize];
        let d2 = (p - q).norm_squared();
        if d2 < best.1 {
            *best = (node.point as usize, d2);
        }
        let diff = q[node.axis as usize] - p[node.axis as usize];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NONE {
            self.search(near, q, best);
        }
        if far != NONE && diff * diff < best.1 {
            self.search(far, q, best);
        }
    }
}
