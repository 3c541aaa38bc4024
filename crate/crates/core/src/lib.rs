//! Rad geometry images for 3D shape generation.
//!
//! A normalized triangle mesh is projected onto the unit sphere along rays
//! from the origin, the hemisphere `y >= 0` is flattened onto the unit
//! square by a fixed equal-area map, and each pixel stores a single value:
//! the distance from the origin to the outermost surface along its ray.
//! Multiplying that "rad" raster by the per-pixel sphere directions gives
//! the surface back as a fixed-topology grid mesh.
//!
//! Modules:
//!
//! - [`mesh`]: triangle meshes, OBJ/PLY I/O, normalization, sampling, normals
//! - [`codec`]: the square/hemisphere map, encoding, attribute baking, decoding
//!   and the `GEOIMG01` file format
//! - [`metrics`]: Chamfer distance, earth mover's distance, light field distance
//! - [`latent`]: generator interface, linear stand-in generator, latent
//!   projection, SVM edit directions, edits and interpolation
//! - [`pipeline`]: dataset manifests and the batch commands behind the CLI

pub mod codec;
pub mod latent;
pub mod mesh;
pub mod metrics;
pub mod pipeline;

pub use codec::{decode, encode, FillPolicy, GeometryImage};
pub use mesh::{load_mesh, save_mesh, PointSet, TriMesh, Vec3};
