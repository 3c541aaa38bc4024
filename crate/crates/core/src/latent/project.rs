use super::{Generator, LatentError, LatentVector};
use crate::codec::GeometryImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectOptions {
    pub iterations: usize,
    pub step: f64,
    pub seed: u64,
    /// Forward-difference step for generators without a closed-form
    /// Jacobian.
    pub fd_step: f64,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            step: 0.5,
            seed: 0,
            fd_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub latent: LatentVector,
    /// Loss of the seeded starting point.
    pub initial_loss: f64,
    /// Loss after each update, one entry per iteration.
    pub losses: Vec<f64>,
}

/// Gradient descent from a seeded standard-normal start with default
/// options apart from `iterations`, `step` and `seed`.
pub fn project(
    target: &GeometryImage,
    generator: &dyn Generator,
    iterations: usize,
    step: f64,
    seed: u64,
) -> Result<Projection, LatentError> {
    project_with(
        target,
        generator,
        &ProjectOptions {
            iterations,
            step,
            seed,
            ..Default::default()
        },
    )
}

/// Finds a latent whose generated rad image matches `target`.
///
/// The reported loss is the mean squared rad difference over the target's
/// valid pixels. Each update moves against `J^T r`, the gradient of half the
/// summed squared residual: with an orthonormal linear generator that
/// gradient has unit curvature, so any step in `(0, 1]` decreases the loss
/// monotonically and step 1 solves the least-squares problem in one update.
pub fn project_with(
    target: &GeometryImage,
    generator: &dyn Generator,
    opts: &ProjectOptions,
) -> Result<Projection, LatentError> {
    let n = generator.resolution();
    if target.resolution() != n {
        return Err(LatentError::ResolutionMismatch {
            expected: n,
            got: target.resolution(),
        });
    }
    let rad = target.rad()?;
    let valid: Vec<bool> = (0..n * n).map(|i| target.is_valid(i)).collect();
    let valid_count = valid.iter().filter(|&&v| v).count().max(1) as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = generator.latent_dim();
    let mut w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();

    let residual = |w: &[f64]| -> Result<(Vec<f64>, f64), LatentError> {
        let out = generator.generate_raw(&LatentVector::new(w.to_vec())?)?;
        let r: Vec<f64> = out
            .iter()
            .zip(rad)
            .zip(&valid)
            .map(|((o, t), &ok)| if ok { o - t } else { 0.0 })
            .collect();
        let loss = r.iter().map(|x| x * x).sum::<f64>() / valid_count;
        Ok((r, loss))
    };

    let (mut r, initial_loss) = residual(&w)?;
    if !initial_loss.is_finite() {
        return Err(LatentError::NonFiniteLoss { iteration: 0 });
    }
    let mut losses = Vec::with_capacity(opts.iterations);
    for iteration in 1..=opts.iterations {
        let current = LatentVector::new(w.clone()).map_err(|_| LatentError::NonFiniteLoss { iteration })?;
        let grad = match generator.vjp(&current, &r) {
            Some(g) => g,
            None => finite_difference_vjp(generator, &w, &r, &valid, opts.fd_step)?,
        };
        for (wk, g) in w.iter_mut().zip(&grad) {
            *wk -= opts.step * g;
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(LatentError::NonFiniteLoss { iteration });
        }
        let (next_r, loss) = residual(&w)?;
        if !loss.is_finite() {
            return Err(LatentError::NonFiniteLoss { iteration });
        }
        r = next_r;
        losses.push(loss);
    }
    Ok(Projection {
        latent: LatentVector::new(w)?,
        initial_loss,
        losses,
    })
}

/// `J^T r` with `J` estimated by forward differences, one extra generator
/// evaluation per latent dimension.
fn finite_difference_vjp(
    generator: &dyn Generator,
    w: &[f64],
    r: &[f64],
    valid: &[bool],
    h: f64,
) -> Result<Vec<f64>, LatentError> {
    let base = generator.generate_raw(&LatentVector::new(w.to_vec())?)?;
    (0..w.len())
        .map(|k| {
            let mut shifted = w.to_vec();
            shifted[k] += h;
            let out = generator.generate_raw(&LatentVector::new(shifted)?)?;
            Ok(out
                .iter()
                .zip(&base)
                .zip(r)
                .zip(valid)
                .filter(|(_, &ok)| ok)
                .map(|(((o, b), ri), _)| (o - b) / h * ri)
                .sum())
        })
        .collect()
}
