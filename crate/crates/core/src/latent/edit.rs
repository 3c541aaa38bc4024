use super::{LatentError, LatentVector};
use serde::{Deserialize, Serialize};

/// Unit normal of an SVM hyperplane separating latents by one label,
/// pointing from the label-0 side toward the label-1 side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditDirection {
    pub direction: LatentVector,
    pub label: String,
    /// Training-set accuracy of the SVM the direction came from.
    pub margin_accuracy: Option<f64>,
}

impl EditDirection {
    /// Normalizes `direction` to unit length.
    pub fn new(direction: LatentVector, label: impl Into<String>) -> Result<Self, LatentError> {
        let norm = direction.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LatentError::DegenerateDirection);
        }
        Ok(Self {
            direction: LatentVector::new(direction.values().iter().map(|v| v / norm).collect())?,
            label: label.into(),
            margin_accuracy: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmOptions {
    pub iterations: usize,
    pub lambda: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            lambda: 1e-3,
        }
    }
}

/// Soft-margin linear SVM (hinge loss plus `lambda/2 |w|^2`) trained by
/// full-batch subgradient descent with step `1/sqrt(k)`, returning the
/// average of the second half of the iterates. Examples are centered on
/// their mean first, so the result does not depend on where the cloud sits.
pub fn fit_edit_direction(
    examples: &[(LatentVector, bool)],
    label: &str,
    opts: SvmOptions,
) -> Result<EditDirection, LatentError> {
    let first = examples.first().ok_or(LatentError::EmptyDataset)?;
    let d = first.0.dim();
    for (x, _) in examples {
        x.check_dim(d)?;
    }
    let positives = examples.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == examples.len() {
        return Err(LatentError::SingleClass {
            label: label.to_string(),
        });
    }
    let count = examples.len() as f64;
    let mut mean = vec![0.0; d];
    for (x, _) in examples {
        for (m, v) in mean.iter_mut().zip(x.values()) {
            *m += v / count;
        }
    }
    let data: Vec<(Vec<f64>, f64)> = examples
        .iter()
        .map(|(x, y)| {
            let c = x.values().iter().zip(&mean).map(|(v, m)| v - m).collect();
            (c, if *y { 1.0 } else { -1.0 })
        })
        .collect();
    let score = |w: &[f64], b: f64, x: &[f64]| -> f64 { w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b };

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; d];
    let mut b_avg = 0.0;
    let mut averaged = 0usize;
    let start_avg = opts.iterations / 2;
    let mut gw = vec![0.0; d];
    for k in 1..=opts.iterations {
        gw.iter_mut().zip(&w).for_each(|(g, wi)| *g = opts.lambda * wi);
        let mut gb = 0.0;
        for (x, y) in &data {
            if y * score(&w, b, x) < 1.0 {
                for (g, xi) in gw.iter_mut().zip(x) {
                    *g -= y * xi / count;
                }
                gb -= y / count;
            }
        }
        let eta = 1.0 / (k as f64).sqrt();
        w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= eta * g);
        b -= eta * gb;
        if k > start_avg {
            averaged += 1;
            let t = 1.0 / averaged as f64;
            w_avg.iter_mut().zip(&w).for_each(|(a, wi)| *a += (wi - *a) * t);
            b_avg += (b - b_avg) * t;
        }
    }
    if averaged == 0 {
        w_avg = w;
        b_avg = b;
    }
    let correct = data
        .iter()
        .filter(|(x, y)| (score(&w_avg, b_avg, x) > 0.0) == (*y > 0.0))
        .count();
    let mut dir = EditDirection::new(LatentVector::new(w_avg)?, label)?;
    dir.margin_accuracy = Some(correct as f64 / count);
    Ok(dir)
}

/// `p + alpha * t * n`.
pub fn apply_edit(p: &LatentVector, dir: &EditDirection, alpha: f64, t: f64) -> Result<LatentVector, LatentError> {
    p.check_dim(dir.dim())?;
    let s = alpha * t;
    LatentVector::new(p.values().iter().zip(dir.direction.values()).map(|(a, n)| a + s * n).collect())
}

/// `(1 - s) * w1 + s * w2` for `s` in `[0, 1]`.
pub fn interpolate(w1: &LatentVector, w2: &LatentVector, s: f64) -> Result<LatentVector, LatentError> {
    w2.check_dim(w1.dim())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(LatentError::InvalidParameter(format!("interpolation parameter {s} is outside [0, 1]")));
    }
    LatentVector::new(w1.values().iter().zip(w2.values()).map(|(a, b)| (1.0 - s) * a + s * b).collect())
}
