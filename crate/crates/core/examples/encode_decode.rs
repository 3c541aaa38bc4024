//! Encode a mesh into a rad geometry image and decode it back.
//!
//!     cargo run --release --example encode_decode -- [mesh.obj|mesh.ply] [resolution]
//!
//! Without a mesh argument a squashed sphere is used. Writes `shape.geoimg`,
//! `shape_half.obj` and `shape_full.obj` to the system temp directory.

use geoimg::codec::{decode, roundtrip_report, Encoder, FillPolicy, RoundtripOptions};
use geoimg::mesh::{load_mesh, normalize, primitives, save_mesh, Vec3, DEFAULT_TARGET_RADIUS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mesh = match args.next() {
        Some(p) => load_mesh(p)?,
        None => primitives::star_shaped(4, |u: &Vec3| 1.0 / (u.x * u.x + 4.0 * u.y * u.y + u.z * u.z).sqrt()),
    };
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(256);

    let (normalized, transform) = normalize(&mesh, DEFAULT_TARGET_RADIUS)?;
    println!("normalized: translate {:?}, scale {:.4}", transform.translation, transform.scale);

    let encoder = Encoder::new(&normalized)?;
    let (gi, stats) = encoder.encode(n, FillPolicy::Nearest)?;
    println!("{n}x{n} rad image, {:.1}% of rays hit the surface", 100.0 * stats.hit_fraction());

    let out = std::env::temp_dir();
    gi.save(out.join("shape.geoimg"))?;
    let half = decode(&gi, false)?;
    let full = decode(&gi, true)?;
    save_mesh(&half, out.join("shape_half.obj"))?;
    save_mesh(&full, out.join("shape_full.obj"))?;
    println!(
        "half: {} vertices / {} faces, mirrored: {} vertices / {} faces",
        half.vertices().len(),
        half.faces().len(),
        full.vertices().len(),
        full.faces().len()
    );

    let report = roundtrip_report(&mesh, n, &RoundtripOptions::default())?;
    println!(
        "round trip: chamfer {:.3e} (x1e3 = {:.3}), emd {:.3e}",
        report.chamfer,
        report.chamfer * 1e3,
        report.emd
    );
    println!("files in {}", out.display());
    Ok(())
}
