use crate::mesh::{TriMesh, Vec3};

/// Square binary image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    size: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            data: vec![false; size * size],
        }
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let data = (0..size * size).map(|k| f(k / size, k % size)).collect();
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.size + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.size + col] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// The image rotated a quarter turn counterclockwise.
    pub fn rotate90(&self) -> Self {
        let n = self.size;
        Self::from_fn(n, |r, c| self.get(c, n - 1 - r))
    }
}

/// Orthogonal image-plane axes for a camera looking along `view_dir`.
pub fn view_frame(view_dir: &Vec3) -> (Vec3, Vec3) {
    let d = view_dir.normalize();
    let helper = if d.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let right = helper.cross(&d).normalize();
    let up = d.cross(&right);
    (right, up)
}

/// Orthographic silhouette of a normalized mesh seen along `view_dir`; the
/// square `[-1, 1]^2` of the image plane fills the raster.
pub fn rasterize_silhouette(mesh: &TriMesh, view_dir: &Vec3, size: usize) -> BinaryImage {
    let (right, up) = view_frame(view_dir);
    rasterize_projection(mesh, &right, &up, size)
}

/// Silhouette of the mesh projected onto the plane spanned by `right` and
/// `up`. A pixel is covered when its center passes the three half-plane tests
/// of some triangle; zero-area projections cover nothing.
pub fn rasterize_projection(mesh: &TriMesh, right: &Vec3, up: &Vec3, size: usize) -> BinaryImage {
    let mut img = BinaryImage::new(size);
    let half = size as f64 / 2.0;
    // image coordinates: x grows with column, y grows with row (downward)
    let project = |p: &Vec3| -> (f64, f64) { ((p.dot(right) + 1.0) * half, (1.0 - p.dot(up)) * half) };
    let pts: Vec<(f64, f64)> = mesh.vertices().iter().map(project).collect();
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| pts[i as usize]);
        let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if area == 0.0 || !area.is_finite() {
            continue;
        }
        let sign = area.signum();
        let edge = |p: (f64, f64), q: (f64, f64), x: f64, y: f64| {
            sign * ((q.0 - p.0) * (y - p.1) - (q.1 - p.1) * (x - p.0))
        };
        let min_x = a.0.min(b.0).min(c.0);
        let max_x = a.0.max(b.0).max(c.0);
        let min_y = a.1.min(b.1).min(c.1);
        let max_y = a.1.max(b.1).max(c.1);
        let c0 = ((min_x - 0.5).ceil().max(0.0)) as usize;
        let c1 = ((max_x - 0.5).floor().min(size as f64 - 1.0)) as i64;
        let r0 = ((min_y - 0.5).ceil().max(0.0)) as usize;
        let r1 = ((max_y - 0.5).floor().min(size as f64 - 1.0)) as i64;
        if c1 < c0 as i64 || r1 < r0 as i64 {
            continue;
        }
        for row in r0..=r1 as usize {
            let y = row as f64 + 0.5;
            for col in c0..=c1 as usize {
                let x = col as f64 + 0.5;
                if edge(a, b, x, y) >= 0.0 && edge(b, c, x, y) >= 0.0 && edge(c, a, x, y) >= 0.0 {
                    img.set(row, col, true);
                }
            }
        }
    }
    img
}
