//! Fourier descriptors of a silhouette's outer contour.

use super::raster::BinaryImage;
use super::MetricError;
use std::f64::consts::TAU;

pub const DEFAULT_COEFFS: usize = 10;
/// Number of arc-length-uniform contour samples fed to the DFT.
pub const CONTOUR_SAMPLES: usize = 128;

/// Moore neighbourhood, clockwise on screen starting west.
const DIRS: [(isize, isize); 8] = [
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
];

fn dir_index(dr: isize, dc: isize) -> usize {
    DIRS.iter()
        .position(|&d| d == (dr, dc))
        .expect("offset is a Moore neighbour")
}

/// Outer boundary pixels `(row, col)` of the component containing the first
/// foreground pixel in raster order, traced clockwise on screen by Moore
/// neighbour tracing with Jacob's stopping criterion.
pub fn trace_outer_contour(image: &BinaryImage) -> Option<Vec<(usize, usize)>> {
    let n = image.size() as isize;
    let fg = |r: isize, c: isize| r >= 0 && c >= 0 && r < n && c < n && image.get(r as usize, c as usize);
    let start = (0..n * n).map(|k| (k / n, k % n)).find(|&(r, c)| fg(r, c))?;
    let mut contour = vec![(start.0 as usize, start.1 as usize)];
    // the west neighbour of the first raster-order pixel is background
    let (mut p, mut back) = (start, 0usize);
    let mut second = None;
    let limit = 4 * (n * n) as usize + 8;
    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let q = (p.0 + DIRS[d].0, p.1 + DIRS[d].1);
            if fg(q.0, q.1) {
                let prev = (back + k - 1) % 8;
                let b = (p.0 + DIRS[prev].0, p.1 + DIRS[prev].1);
                next = Some((q, dir_index(b.0 - q.0, b.1 - q.1)));
                break;
            }
        }
        let Some((q, nb)) = next else {
            // isolated pixel
            return Some(contour);
        };
        if p == start {
            match second {
                None => second = Some(q),
                // about to repeat the first step: the loop is closed
                Some(s) if s == q => {
                    contour.pop();
                    return Some(contour);
                }
                Some(_) => {}
            }
        }
        contour.push((q.0 as usize, q.1 as usize));
        p = q;
        back = nb;
    }
    Some(contour)
}

/// Resamples the closed polygon through `points` at `count` positions evenly
/// spaced in arc length.
fn resample_closed(points: &[(f64, f64)], count: usize) -> Option<Vec<(f64, f64)>> {
    let m = points.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for k in 0..m {
        let (a, b) = (points[k], points[(k + 1) % m]);
        cum.push(cum[k] + (b.0 - a.0).hypot(b.1 - a.1));
    }
    let total = cum[m];
    if total <= 0.0 {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for s in 0..count {
        let target = total * s as f64 / count as f64;
        while cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        let (a, b) = (points[seg], points[(seg + 1) % m]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    Some(out)
}

/// Magnitudes of DFT coefficients `1..=coeffs` of the resampled outer
/// contour, divided by the magnitude of coefficient 1. Skipping coefficient
/// 0 removes translation, the division removes scale, and magnitudes drop
/// rotation and starting point. A contour that encloses no area yields zeros.
pub fn fourier_contour_descriptor(image: &BinaryImage, coeffs: usize) -> Result<Vec<f64>, MetricError> {
    let contour = trace_outer_contour(image).ok_or(MetricError::EmptyImage)?;
    // x = col, y = row mirrors the screen, so the clockwise trace runs
    // counterclockwise in the complex plane and coefficient 1 dominates
    let pts: Vec<(f64, f64)> = contour.iter().map(|&(r, c)| (c as f64, r as f64)).collect();
    let Some(samples) = resample_closed(&pts, CONTOUR_SAMPLES) else {
        return Ok(vec![0.0; coeffs]);
    };
    let n = samples.len() as f64;
    let coeff = |k: usize| -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &(x, y)) in samples.iter().enumerate() {
            let (s, c) = (-TAU * k as f64 * t as f64 / n).sin_cos();
            re += x * c - y * s;
            im += x * s + y * c;
        }
        re.hypot(im)
    };
    let mags: Vec<f64> = (1..=coeffs).map(coeff).collect();
    let first = mags.first().copied().unwrap_or(0.0);
    if first <= 1e-12 * n {
        return Ok(vec![0.0; coeffs]);
    }
    Ok(mags.iter().map(|m| m / first).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(size: usize, r0: usize, c0: usize, side: usize) -> BinaryImage {
        BinaryImage::from_fn(size, |r, c| r >= r0 && r < r0 + side && c >= c0 && c < c0 + side)
    }

    #[test]
    fn traces_square_boundary() {
        let img = square(10, 2, 3, 4);
        let contour = trace_outer_contour(&img).unwrap();
        assert_eq!(contour.len(), 12);
        assert_eq!(contour[0], (2, 3));
        assert_eq!(contour[1], (2, 4));
    }

    #[test]
    fn single_pixel() {
        let img = square(5, 2, 2, 1);
        assert_eq!(trace_outer_contour(&img).unwrap(), vec![(2, 2)]);
        assert_eq!(fourier_contour_descriptor(&img, 4).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn circle_is_pure_fundamental() {
        let img = BinaryImage::from_fn(128, |r, c| {
            (c as f64 + 0.5 - 64.0).hypot(r as f64 + 0.5 - 64.0) <= 45.0
        });
        let d = fourier_contour_descriptor(&img, DEFAULT_COEFFS).unwrap();
        assert_eq!(d[0], 1.0);
        for v in &d[1..] {
            assert!(*v < 0.01, "{d:?}");
        }
    }

    #[test]
    fn scale_invariance() {
        let a = fourier_contour_descriptor(&square(128, 10, 10, 20), DEFAULT_COEFFS).unwrap();
        let b = fourier_contour_descriptor(&square(128, 30, 40, 80), DEFAULT_COEFFS).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-3, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn blank_image() {
        assert!(matches!(
            fourier_contour_descriptor(&BinaryImage::new(16), 5),
            Err(MetricError::EmptyImage)
        ));
    }
}
