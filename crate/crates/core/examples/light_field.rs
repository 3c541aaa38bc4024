//! Light field descriptors: 20 silhouette views per shape, compared under
//! the 60 rotations of the dodecahedron.
//!
//!     cargo run --release --example light_field

use geoimg::mesh::primitives;
use geoimg::metrics::lfd::{rotation_group, VIEW_COUNT};
use geoimg::metrics::{descriptor_distance, light_field_descriptor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let box_mesh = primitives::cube(0.6).map_vertices(|v| v.component_mul(&geoimg::mesh::Vec3::new(1.0, 0.5, 0.8)));
    let d = light_field_descriptor(&box_mesh)?;
    println!("{VIEW_COUNT} views x {} values per view", d.views[0].len());

    // rotate by a few members of the camera symmetry group: the distance
    // stays at zero up to rasterization noise
    for g in rotation_group().iter().step_by(15) {
        let rotated = box_mesh.rotated(&nalgebra::Rotation3::from_matrix_unchecked(g.rotation));
        let dr = light_field_descriptor(&rotated)?;
        println!("rotated copy: distance {:.4}", descriptor_distance(&d, &dr));
    }
    let sphere = light_field_descriptor(&primitives::icosphere(0.6, 3))?;
    println!("box vs sphere: distance {:.4}", descriptor_distance(&d, &sphere));
    Ok(())
}
