//! Zernike moment magnitudes over the disk inscribed in a square raster.

use super::raster::BinaryImage;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_ORDER: usize = 10;

/// `(n, m)` pairs with `n <= max_order`, `n - m` even, `m >= 0`, in
/// increasing `n` then `m`.
pub fn moment_indices(max_order: usize) -> Vec<(usize, usize)> {
    (0..=max_order)
        .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| (n, m)))
        .collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Radial polynomial `R_n^m(rho)`.
pub fn radial_polynomial(n: usize, m: usize, rho: f64) -> f64 {
    (0..=(n - m) / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(n - k)
                / (factorial(k) * factorial((n + m) / 2 - k) * factorial((n - m) / 2 - k))
                * rho.powi((n - 2 * k) as i32)
        })
        .sum()
}

/// Conjugate basis values for every in-disk pixel, reused across images of
/// the same size and order.
struct Basis {
    pixels: Vec<usize>,
    /// `[moment][pixel]` real and imaginary parts of `conj(V_nm)` times the
    /// normalization `(n + 1) / pi * pixel_area`.
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

type BasisCache = Mutex<HashMap<(usize, usize), Arc<Basis>>>;

fn basis(size: usize, max_order: usize) -> Arc<Basis> {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((size, max_order))
        .or_insert_with(|| Arc::new(build_basis(size, max_order)))
        .clone()
}

fn build_basis(size: usize, max_order: usize) -> Basis {
    let half = size as f64 / 2.0;
    let pixel_area = 1.0 / (half * half);
    let mut pixels = Vec::new();
    let mut polar = Vec::new();
    for r in 0..size {
        for c in 0..size {
            let x = (c as f64 + 0.5 - half) / half;
            let y = (half - r as f64 - 0.5) / half;
            let rho = x.hypot(y);
            if rho <= 1.0 {
                pixels.push(r * size + c);
                polar.push((rho, y.atan2(x)));
            }
        }
    }
    let idx = moment_indices(max_order);
    let mut re = Vec::with_capacity(idx.len());
    let mut im = Vec::with_capacity(idx.len());
    for &(n, m) in &idx {
        let norm = (n as f64 + 1.0) / PI * pixel_area;
        let (mut rr, mut ii) = (Vec::with_capacity(polar.len()), Vec::with_capacity(polar.len()));
        for &(rho, theta) in &polar {
            let radial = radial_polynomial(n, m, rho) * norm;
            let (s, c) = (m as f64 * theta).sin_cos();
            rr.push(radial * c);
            ii.push(-radial * s);
        }
        re.push(rr);
        im.push(ii);
    }
    Basis { pixels, re, im }
}

/// `|A_nm|` for every index of [`moment_indices`]. Magnitudes are invariant
/// to rotations of the image about its center.
pub fn zernike_moments(image: &BinaryImage, max_order: usize) -> Vec<f64> {
    let b = basis(image.size(), max_order);
    let n = image.size();
    let on: Vec<usize> = b
        .pixels
        .iter()
        .enumerate()
        .filter(|(_, &p)| image.get(p / n, p % n))
        .map(|(k, _)| k)
        .collect();
    b.re
        .iter()
        .zip(&b.im)
        .map(|(re, im)| {
            let (mut sr, mut si) = (0.0, 0.0);
            for &k in &on {
                sr += re[k];
                si += im[k];
            }
            sr.hypot(si)
        })
        .collect()
}
