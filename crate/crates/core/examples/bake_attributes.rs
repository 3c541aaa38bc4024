//! Bake smooth normals and vertex colors into extra image channels and
//! write a PNG preview of the rad channel.
//!
//!     cargo run --release --example bake_attributes

use geoimg::codec::{decode, Encoder, FillPolicy};
use geoimg::mesh::{normalize, primitives, save_mesh, smooth_vertex_normals};
use std::fs::File;
use std::io::BufWriter;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cube = primitives::cube(1.0);
    // color each vertex by its position
    let colors = cube.vertices().iter().map(|v| [0.5 + 0.5 * v.x, 0.5 + 0.5 * v.y, 0.5 + 0.5 * v.z]).collect();
    let cube = cube.with_colors(colors)?;
    let (mesh, _) = normalize(&cube, 0.9)?;
    let mesh = smooth_vertex_normals(&mesh);

    let encoder = Encoder::new(&mesh)?;
    let (rad, _) = encoder.encode(128, FillPolicy::Masked)?;
    let baked = encoder.bake(&rad)?;
    println!("channels: {:?}", baked.channel_names().collect::<Vec<_>>());

    let out = std::env::temp_dir();
    baked.save(out.join("cube.geoimg"))?;
    baked.write_rad_png(BufWriter::new(File::create(out.join("cube_rad.png"))?))?;
    let decoded = decode(&baked, true)?;
    println!(
        "decoded {} vertices, normals attached: {}",
        decoded.vertices().len(),
        decoded.vertex_normals().is_some()
    );
    save_mesh(&decoded, out.join("cube_baked.ply"))?;
    println!("wrote cube.geoimg, cube_rad.png, cube_baked.ply to {}", out.display());
    Ok(())
}
