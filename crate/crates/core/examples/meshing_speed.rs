//! Times decoding a 512x512 rad image (mirror on) and writing it to disk,
//! for a bare rad image as a generator emits it and for one with baked
//! normals.
//!
//!     cargo run --release --example meshing_speed -- [resolution]

use geoimg::codec::{decode, Encoder, FillPolicy, GeometryImage};
use geoimg::mesh::{primitives, save_mesh_with, smooth_vertex_normals, Precision};
use std::time::{Duration, Instant};

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(512);
    let mesh = smooth_vertex_normals(&primitives::icosphere(0.9, 4));
    let enc = Encoder::new(&mesh)?;
    let (gi, _) = enc.encode(n, FillPolicy::Nearest)?;

    let dir = std::env::temp_dir().join("geoimg-meshing-speed");
    std::fs::create_dir_all(&dir)?;
    for (label, image) in [("rad", &gi), ("rad+normals", &enc.bake(&gi)?)] {
        let path = dir.join("shape.geoimg");
        image.save(&path)?;
        let t = Instant::now();
        let loaded = GeometryImage::load(&path)?;
        let load = t.elapsed();

        decode(&loaded, true)?;
        let runs: Vec<Duration> = (0..50)
            .map(|_| {
                let t = Instant::now();
                let m = decode(&loaded, true).expect("decodes");
                let dt = t.elapsed();
                drop(m);
                dt
            })
            .collect();
        let m = decode(&loaded, true)?;
        let t = Instant::now();
        save_mesh_with(&m, dir.join("shape.obj"), Precision::Single)?;
        let write = t.elapsed();
        println!(
            "{label}: load {:.2} ms, decode median {:.2} ms over 50 runs, write obj {:.2} ms ({} faces)",
            load.as_secs_f64() * 1e3,
            median(runs).as_secs_f64() * 1e3,
            write.as_secs_f64() * 1e3,
            m.faces().len()
        );
    }
    Ok(())
}
