//! Chamfer, EMD and light field distance between a few primitives.
//!
//!     cargo run --release --example shape_metrics -- [samples]

use geoimg::mesh::{normalize, primitives, TriMesh};
use geoimg::metrics::{evaluate, EmdOptions, GroundDistance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let shapes: Vec<(&str, TriMesh)> = vec![
        ("sphere", primitives::icosphere(1.0, 3)),
        ("icosphere-1", primitives::icosphere(1.0, 1)),
        ("cube", primitives::cube(1.0)),
        ("disc", primitives::disc(1.0, 0.3, 32)),
    ];
    let shapes: Vec<(&str, TriMesh)> = shapes
        .into_iter()
        .map(|(name, m)| normalize(&m, 0.9).map(|(m, _)| (name, m)))
        .collect::<Result<_, _>>()?;

    println!("{:<12} {:<12} {:>10} {:>10} {:>10}", "a", "b", "CDx1e3", "EMDx1e2", "LFD");
    let (reference, rest) = shapes.split_first().expect("non-empty");
    for (name, m) in rest {
        let r = evaluate(&reference.1, m, k, 0, EmdOptions::default())?;
        println!(
            "{:<12} {:<12} {:>10.3} {:>10.3} {:>10.3}",
            reference.0, name, r.chamfer_scaled, r.emd_scaled, r.lfd
        );
    }
    let l2 = EmdOptions {
        ground: GroundDistance::L2,
        ..Default::default()
    };
    let r = evaluate(&reference.1, &shapes[2].1, k, 0, l2)?;
    println!("sphere vs cube with Euclidean ground distance: EMD {:.4}", r.emd);
    Ok(())
}
