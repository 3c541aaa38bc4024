//! Fit a linear generator to encoded shapes and project a held-out shape
//! into its latent space.
//!
//!     cargo run --release --example latent_projection

use geoimg::codec::{decode, Encoder, FillPolicy, GeometryImage};
use geoimg::latent::{fit_linear_generator, project, Generator};
use geoimg::mesh::{primitives, Vec3};

/// An ellipsoid-ish blob, radius around 0.6.
fn blob(a: f64, b: f64, c: f64) -> Result<GeometryImage, Box<dyn std::error::Error>> {
    let mesh = primitives::star_shaped(3, |u: &Vec3| {
        0.6 / ((u.x / a).powi(2) + (u.y / b).powi(2) + (u.z / c).powi(2)).sqrt()
    });
    let (gi, _) = Encoder::new(&mesh)?.encode(32, FillPolicy::Nearest)?;
    Ok(gi)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut data = Vec::new();
    for a in [0.8, 1.0, 1.2, 1.4] {
        for c in [0.7, 1.0, 1.3] {
            data.push(blob(a, 1.0, c)?);
        }
    }
    let generator = fit_linear_generator(&data, 6)?;
    println!("linear generator: d = {}, eigenvalues {:.3?}", generator.latent_dim(), generator.eigenvalues());

    let target = blob(1.1, 1.0, 0.85)?;
    let p = project(&target, &generator, 500, 0.5, 0)?;
    let closed_form = generator.encode_rad(target.rad()?)?;
    println!(
        "loss {:.3e} -> {:.3e} after {} iterations; max |w - w_ls| = {:.2e}",
        p.initial_loss,
        p.losses.last().copied().unwrap_or(p.initial_loss),
        p.losses.len(),
        p.latent.max_abs_diff(&closed_form)
    );
    let mesh = decode(&generator.generate(&p.latent)?, true)?;
    println!("reconstruction: {} vertices", mesh.vertices().len());
    Ok(())
}
