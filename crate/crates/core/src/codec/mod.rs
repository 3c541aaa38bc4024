//! Mesh <-> geometry-image conversion.

mod bvh;
mod decode;
mod encode;
pub mod image;
mod roundtrip;
pub mod sphere_map;

pub use bvh::{Bvh, Hit};
pub use decode::decode;
pub use encode::{bake_attributes, encode, EncodeStats, Encoder, FillPolicy};
pub use image::{GeometryImage, SymmetryPlane};
pub use roundtrip::{roundtrip_report, RoundtripOptions, RoundtripReport};
pub use sphere_map::{sphere_to_square, square_to_sphere, SphereGrid};

/// Radius of the projection sphere all shapes are normalized into.
pub const SPHERE_RADIUS: f64 = 1.0;

/// Default working resolution for rad images.
pub const DEFAULT_RESOLUTION: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("direction {0:?} is not a unit vector on the upper hemisphere")]
    InvalidDirection([f64; 3]),
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("mesh is not normalized: farthest vertex at {max_norm}, sphere radius is 1")]
    NotNormalized { max_norm: f64 },
    #[error("resolution {0} is too small (need at least 2)")]
    ResolutionTooSmall(usize),
    #[error("no pixel ray hits the mesh")]
    AllRaysMiss,
    #[error("mesh has no vertex normals to bake")]
    MissingNormals,
    #[error("geometry image has no `rad` channel")]
    MissingRadChannel,
    #[error("rad value {value} at pixel {pixel} is outside [0, sphere_radius]")]
    RadOutOfRange { pixel: usize, value: f64 },
    #[error("baked normal at pixel {pixel} is not unit length")]
    NonUnitNormal { pixel: usize },
    #[error("invalid channel name {0:?}")]
    InvalidChannelName(String),
    #[error("channel `{name}` has {len} values, expected {expected}")]
    ChannelLength {
        name: String,
        len: usize,
        expected: usize,
    },
    #[error("not a GEOIMG01 file (bad magic)")]
    BadMagic,
    #[error("GEOIMG01 data truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("{0} trailing bytes after GEOIMG01 payload")]
    TrailingBytes(usize),
    #[error("geometry image is {width}x{height}, only square images are supported")]
    NotSquare { width: usize, height: usize },
    #[error("unknown symmetry plane code {0}")]
    UnknownSymmetryPlane(u8),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
