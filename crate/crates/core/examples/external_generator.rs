//! Drive a generator that lives in another process.
//!
//!     cargo run --release --example external_generator
//!
//! The example re-runs its own executable with `--serve` as the generator:
//! it reads a little-endian u32 count and that many f32 latents from stdin
//! and answers with a GEOIMG01 rad image on stdout.

use geoimg::codec::GeometryImage;
use geoimg::latent::{project, ExternalGenerator, Generator, LatentVector};
use std::io::{Read, Write};

const RESOLUTION: usize = 24;

/// Rad image of a blob whose latent controls its stretch along x and z.
fn serve() -> Result<(), Box<dyn std::error::Error>> {
    let mut input = Vec::new();
    std::io::stdin().read_to_end(&mut input)?;
    let count = u32::from_le_bytes(input[..4].try_into()?) as usize;
    let w: Vec<f64> = input[4..4 + 4 * count]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let n = RESOLUTION;
    let rad = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let s = (j as f64 + 0.5) / n as f64 - 0.5;
            let t = (i as f64 + 0.5) / n as f64 - 0.5;
            (0.5 + w[0] * s * s + w[1] * t * t).clamp(0.0, 1.0)
        })
        .collect();
    let bytes = GeometryImage::from_rad(n, rad)?.to_bytes();
    std::io::stdout().write_all(&bytes)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::args().nth(1).as_deref() == Some("--serve") {
        return serve();
    }
    let exe = std::env::current_exe()?;
    let generator = ExternalGenerator::new(exe.to_string_lossy(), vec!["--serve".into()], 2)?;
    println!("external generator: {0}x{0}, d = {1}", generator.resolution(), generator.latent_dim());

    let truth = LatentVector::new(vec![0.4, -0.3])?;
    let target = generator.generate(&truth)?;
    // no closed-form Jacobian: projection falls back to finite differences.
    // J^T J here has eigenvalues up to about 7, so keep the step well below 2/7
    let p = project(&target, &generator, 150, 0.1, 0)?;
    println!(
        "recovered {:?} (truth {:?}), loss {:.2e}",
        p.latent.values(),
        truth.values(),
        p.losses.last().copied().unwrap_or(p.initial_loss)
    );
    Ok(())
}
