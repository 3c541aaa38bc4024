//! Learn an edit direction from labeled latents with a linear SVM, then
//! edit and interpolate.
//!
//!     cargo run --release --example semantic_edit

use geoimg::latent::{apply_edit, fit_edit_direction, interpolate, LatentVector, SvmOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // "wide" shapes sit on the positive side of latent axis 2
    let mut examples = Vec::new();
    for k in 0..300 {
        let wide = k % 2 == 0;
        let mut w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        w[2] += if wide { 3.0 } else { -3.0 };
        examples.push((LatentVector::new(w)?, wide));
    }
    let dir = fit_edit_direction(&examples, "wide", SvmOptions::default())?;
    let angle = dir.direction.values()[2].clamp(-1.0, 1.0).acos().to_degrees();
    println!(
        "direction for `{}`: {:.2} degrees from axis 2, training accuracy {:.3}",
        dir.label,
        angle,
        dir.margin_accuracy.unwrap_or(0.0)
    );

    let p = examples[1].0.clone();
    for t in [-1.0, 0.0, 1.0, 2.0] {
        let q = apply_edit(&p, &dir, 1.5, t)?;
        println!("t = {t:+.1}: w[2] = {:+.3}", q.values()[2]);
    }
    let mid = interpolate(&examples[0].0, &examples[1].0, 0.5)?;
    println!("midpoint w[2] = {:+.3}", mid.values()[2]);
    Ok(())
}
