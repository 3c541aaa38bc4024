//! Multi-channel geometry images and the `GEOIMG01` container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "GEOIMG01"                       8 bytes
//! width, height, channel_count     u32 each
//! channel names                    16 bytes each, ASCII, zero-padded
//! sphere_radius                    f32
//! symmetry plane code              u8 (0 = plane y = 0)
//! channel data                     f32, channel-major, row-major
//! ```

use super::CodecError;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"GEOIMG01";
pub const CHANNEL_NAME_LEN: usize = 16;

pub const RAD: &str = "rad";
pub const MASK: &str = "mask";
pub const NORMAL_CHANNELS: [&str; 3] = ["nx", "ny", "nz"];
pub const COLOR_CHANNELS: [&str; 3] = ["r", "g", "b"];

const NORMAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryPlane {
    /// Plane `y = 0`; the half `y >= 0` is stored.
    Y0,
}

impl SymmetryPlane {
    pub fn code(self) -> u8 {
        match self {
            Self::Y0 => 0,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Y0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub data: Vec<f64>,
}

/// Square raster of named, pixel-aligned float channels.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryImage {
    resolution: usize,
    channels: Vec<Channel>,
    sphere_radius: f64,
    symmetry_plane: SymmetryPlane,
}

impl GeometryImage {
    /// An image with no channels yet.
    pub fn empty(resolution: usize) -> Self {
        Self {
            resolution,
            channels: Vec::new(),
            sphere_radius: 1.0,
            symmetry_plane: SymmetryPlane::Y0,
        }
    }

    /// Single-channel image from a row-major rad raster.
    pub fn from_rad(resolution: usize, rad: Vec<f64>) -> Result<Self, CodecError> {
        let mut gi = Self::empty(resolution);
        gi.set_channel(RAD, rad)?;
        Ok(gi)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn pixel_count(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn sphere_radius(&self) -> f64 {
        self.sphere_radius
    }

    pub fn symmetry_plane(&self) -> SymmetryPlane {
        self.symmetry_plane
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.name.as_str())
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.data.as_slice())
    }

    pub fn rad(&self) -> Result<&[f64], CodecError> {
        self.channel(RAD).ok_or(CodecError::MissingRadChannel)
    }

    pub fn mask(&self) -> Option<&[f64]> {
        self.channel(MASK)
    }

    /// Pixels are valid unless a mask channel marks them 0.
    pub fn is_valid(&self, idx: usize) -> bool {
        self.mask().is_none_or(|m| m[idx] != 0.0)
    }

    pub fn valid_count(&self) -> usize {
        match self.mask() {
            Some(m) => m.iter().filter(|&&v| v != 0.0).count(),
            None => self.pixel_count(),
        }
    }

    /// Inserts or replaces a channel.
    pub fn set_channel(&mut self, name: &str, data: Vec<f64>) -> Result<(), CodecError> {
        if name.is_empty() || name.len() > CHANNEL_NAME_LEN || !name.is_ascii() || name.contains('\0') {
            return Err(CodecError::InvalidChannelName(name.to_string()));
        }
        if data.len() != self.pixel_count() {
            return Err(CodecError::ChannelLength {
                name: name.to_string(),
                len: data.len(),
                expected: self.pixel_count(),
            });
        }
        match self.channels.iter_mut().find(|c| c.name == name) {
            Some(c) => c.data = data,
            None => self.channels.push(Channel {
                name: name.to_string(),
                data,
            }),
        }
        Ok(())
    }

    pub fn remove_channel(&mut self, name: &str) -> Option<Vec<f64>> {
        let pos = self.channels.iter().position(|c| c.name == name)?;
        Some(self.channels.remove(pos).data)
    }

    /// Checks the rad range and normal lengths on valid pixels.
    pub fn validate(&self) -> Result<(), CodecError> {
        let rad = self.rad()?;
        for (idx, &r) in rad.iter().enumerate() {
            if self.is_valid(idx) && !(r.is_finite() && r >= 0.0 && r <= self.sphere_radius) {
                return Err(CodecError::RadOutOfRange { pixel: idx, value: r });
            }
        }
        if let (Some(nx), Some(ny), Some(nz)) = (
            self.channel(NORMAL_CHANNELS[0]),
            self.channel(NORMAL_CHANNELS[1]),
            self.channel(NORMAL_CHANNELS[2]),
        ) {
            for idx in 0..self.pixel_count() {
                let len = (nx[idx].powi(2) + ny[idx].powi(2) + nz[idx].powi(2)).sqrt();
                if self.is_valid(idx) && (len - 1.0).abs() > NORMAL_TOLERANCE {
                    return Err(CodecError::NonUnitNormal { pixel: idx });
                }
            }
        }
        Ok(())
    }

    /// Serializes to the `GEOIMG01` layout. Channel data is rounded to f32.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), CodecError> {
        let n = self.resolution as u32;
        let mut buf = Vec::with_capacity(
            8 + 12 + self.channels.len() * (CHANNEL_NAME_LEN + 4 * self.pixel_count()) + 5,
        );
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&n.to_le_bytes());
        buf.extend_from_slice(&n.to_le_bytes());
        buf.extend_from_slice(&(self.channels.len() as u32).to_le_bytes());
        for c in &self.channels {
            let mut name = [0u8; CHANNEL_NAME_LEN];
            name[..c.name.len()].copy_from_slice(c.name.as_bytes());
            buf.extend_from_slice(&name);
        }
        buf.extend_from_slice(&(self.sphere_radius as f32).to_le_bytes());
        buf.push(self.symmetry_plane.code());
        for c in &self.channels {
            for &v in &c.data {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, CodecError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let width = cur.u32()? as usize;
        let height = cur.u32()? as usize;
        let count = cur.u32()? as usize;
        if width != height {
            return Err(CodecError::NotSquare { width, height });
        }
        let mut names = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let raw = cur.take(CHANNEL_NAME_LEN)?;
            let end = raw.iter().position(|&b| b == 0).unwrap_or(CHANNEL_NAME_LEN);
            if raw[end..].iter().any(|&b| b != 0) || !raw[..end].is_ascii() || end == 0 {
                return Err(CodecError::InvalidChannelName(
                    String::from_utf8_lossy(raw).into_owned(),
                ));
            }
            names.push(String::from_utf8_lossy(&raw[..end]).into_owned());
        }
        let sphere_radius = f32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as f64;
        let code = cur.take(1)?[0];
        let symmetry_plane =
            SymmetryPlane::from_code(code).ok_or(CodecError::UnknownSymmetryPlane(code))?;
        let pixels = width * height;
        let mut gi = Self {
            resolution: width,
            channels: Vec::with_capacity(count),
            sphere_radius,
            symmetry_plane,
        };
        for name in names {
            let raw = cur.take(pixels * 4)?;
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
                .collect();
            gi.set_channel(&name, data)?;
        }
        if cur.pos != bytes.len() {
            return Err(CodecError::TrailingBytes(bytes.len() - cur.pos));
        }
        Ok(gi)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CodecError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CodecError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Lossy 16-bit grayscale preview of the rad channel: `[0, sphere_radius]`
    /// maps linearly to `[0, 65535]`; masked pixels are black.
    pub fn write_rad_png<W: Write>(&self, w: W) -> Result<(), CodecError> {
        let rad = self.rad()?;
        let n = self.resolution as u32;
        let mut encoder = png::Encoder::new(w, n, n);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Sixteen);
        let mut writer = encoder.write_header().map_err(png_err)?;
        let mut data = Vec::with_capacity(rad.len() * 2);
        for (idx, &r) in rad.iter().enumerate() {
            let v = if self.is_valid(idx) {
                ((r / self.sphere_radius).clamp(0.0, 1.0) * 65535.0).round() as u16
            } else {
                0
            };
            data.extend_from_slice(&v.to_be_bytes());
        }
        writer.write_image_data(&data).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
        Ok(())
    }
}

fn png_err(e: png::EncodingError) -> CodecError {
    CodecError::Io(std::io::Error::other(e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(CodecError::Truncated { offset: self.pos }),
        }
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
