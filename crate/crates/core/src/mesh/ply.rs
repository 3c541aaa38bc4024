//! Stanford PLY, ascii and binary little-endian. Vertex properties x/y/z,
//! optional nx/ny/nz and red/green/blue; faces from a `vertex_indices` (or
//! `vertex_index`) list. Unknown elements and properties are skipped.

use super::{MeshError, Precision, TriMesh, Vec3};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    /// Number of header bytes, i.e. byte offset of the body.
    len: usize,
}

fn header_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_string(),
        location: format!("header line {line}"),
        message: message.into(),
    }
}

fn read_header<R: BufRead>(r: &mut R, path: &str) -> Result<Header, MeshError> {
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut len = 0;
    let mut lineno = 0;
    let mut line = String::new();
    loop {
        line.clear();
        let n = r.read_line(&mut line)?;
        lineno += 1;
        if n == 0 {
            return Err(header_err(path, lineno, "unexpected end of header"));
        }
        len += n;
        let mut tok = line.split_whitespace();
        let Some(first) = tok.next() else { continue };
        if lineno == 1 {
            if first != "ply" {
                return Err(header_err(path, lineno, "missing `ply` magic"));
            }
            continue;
        }
        match first {
            "format" => {
                encoding = Some(match tok.next() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLittleEndian,
                    Some(other) => {
                        return Err(MeshError::UnsupportedFormat(format!("PLY format {other}")))
                    }
                    None => return Err(header_err(path, lineno, "format without encoding")),
                })
            }
            "element" => {
                let name = tok.next().unwrap_or_default().to_string();
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| header_err(path, lineno, "bad element count"))?;
                elements.push(Element {
                    name,
                    count,
                    props: Vec::new(),
                });
            }
            "property" => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(path, lineno, "property before element"))?;
                let ty = tok.next().unwrap_or_default();
                let prop = if ty == "list" {
                    let count = tok.next().and_then(Scalar::parse);
                    let item = tok.next().and_then(Scalar::parse);
                    let name = tok.next();
                    match (count, item, name) {
                        (Some(count), Some(item), Some(name)) => Property::List {
                            name: name.to_string(),
                            count,
                            item,
                        },
                        _ => return Err(header_err(path, lineno, "bad list property")),
                    }
                } else {
                    let ty = Scalar::parse(ty)
                        .ok_or_else(|| header_err(path, lineno, format!("unknown type `{ty}`")))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| header_err(path, lineno, "property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                el.props.push(prop);
            }
            "end_header" => break,
            _ => {}
        }
    }
    let encoding = encoding.ok_or_else(|| header_err(path, lineno, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        len,
    })
}

/// Sequential source of property values, either ascii tokens or LE bytes.
trait ValueSource {
    fn next(&mut self, ty: Scalar) -> Result<f64, MeshError>;
}

struct AsciiSource<'a> {
    tokens: std::str::SplitWhitespace<'a>,
    path: &'a str,
    consumed: usize,
}

impl ValueSource for AsciiSource<'_> {
    fn next(&mut self, _ty: Scalar) -> Result<f64, MeshError> {
        self.consumed += 1;
        let t = self.tokens.next().ok_or_else(|| MeshError::Parse {
            path: self.path.to_string(),
            location: format!("body value {}", self.consumed),
            message: "unexpected end of data".into(),
        })?;
        t.parse().map_err(|_| MeshError::Parse {
            path: self.path.to_string(),
            location: format!("body value {}", self.consumed),
            message: format!("bad number `{t}`"),
        })
    }
}

struct BinarySource<'a> {
    data: &'a [u8],
    pos: usize,
    base: usize,
    path: &'a str,
}

impl ValueSource for BinarySource<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64, MeshError> {
        let end = self.pos + ty.size();
        if end > self.data.len() {
            return Err(MeshError::Parse {
                path: self.path.to_string(),
                location: format!("byte offset {}", self.base + self.pos),
                message: "truncated binary body".into(),
            });
        }
        let v = ty.decode_le(&self.data[self.pos..end]);
        self.pos = end;
        Ok(v)
    }
}

fn read_body(
    header: &Header,
    src: &mut dyn ValueSource,
    path: &str,
) -> Result<TriMesh, MeshError> {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut colors = Vec::new();
    let mut faces = Vec::new();
    let mut has_normals = false;
    let mut has_colors = false;

    for el in &header.elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        if is_vertex {
            let names: Vec<&str> = el
                .props
                .iter()
                .filter_map(|p| match p {
                    Property::Scalar { name, .. } => Some(name.as_str()),
                    _ => None,
                })
                .collect();
            has_normals = ["nx", "ny", "nz"].iter().all(|n| names.contains(n));
            has_colors = ["red", "green", "blue"].iter().all(|n| names.contains(n));
        }
        for _ in 0..el.count {
            let mut p = [0.0; 3];
            let mut n = [0.0; 3];
            let mut c = [0.0; 3];
            for prop in &el.props {
                match prop {
                    Property::Scalar { name, ty } => {
                        let v = src.next(*ty)?;
                        if is_vertex {
                            let scale = if matches!(ty, Scalar::U8) { 1.0 / 255.0 } else { 1.0 };
                            match name.as_str() {
                                "x" => p[0] = v,
                                "y" => p[1] = v,
                                "z" => p[2] = v,
                                "nx" => n[0] = v,
                                "ny" => n[1] = v,
                                "nz" => n[2] = v,
                                "red" => c[0] = v * scale,
                                "green" => c[1] = v * scale,
                                "blue" => c[2] = v * scale,
                                _ => {}
                            }
                        }
                    }
                    Property::List { name, count, item } => {
                        let len = src.next(*count)? as usize;
                        let mut idx = Vec::with_capacity(len);
                        for _ in 0..len {
                            idx.push(src.next(*item)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            if len < 3 {
                                return Err(MeshError::Parse {
                                    path: path.to_string(),
                                    location: format!("face {}", faces.len()),
                                    message: "face needs at least 3 vertices".into(),
                                });
                            }
                            for k in 1..len - 1 {
                                faces.push([idx[0], idx[k], idx[k + 1]]);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                positions.push(Vec3::from(p));
                normals.push(Vec3::from(n));
                colors.push(c);
            }
        }
    }

    let count = positions.len();
    let mut tris = Vec::with_capacity(faces.len());
    let mut dropped = 0;
    for (fi, f) in faces.iter().enumerate() {
        if f.iter().any(|&i| i < 0.0 || i as usize >= count) {
            return Err(MeshError::Parse {
                path: path.to_string(),
                location: format!("face {fi}"),
                message: format!("vertex index out of range (vertex count {count})"),
            });
        }
        let t = [f[0] as u32, f[1] as u32, f[2] as u32];
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            dropped += 1;
        } else {
            tris.push(t);
        }
    }
    if dropped > 0 {
        log::warn!("{path}: dropped {dropped} faces with repeated vertex indices");
    }
    if tris.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let mut mesh = TriMesh::new(positions, tris)?;
    if has_normals {
        let normals = normals
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 && (len - 1.0).abs() > 1e-12 { n / len } else { n }
            })
            .collect();
        mesh = mesh.with_normals(normals)?;
    }
    if has_colors {
        mesh = mesh.with_colors(colors)?;
    }
    Ok(mesh)
}

/// Reads a PLY stream. `path` is only used in error messages.
pub fn read_ply<R: BufRead>(mut reader: R, path: &str) -> Result<TriMesh, MeshError> {
    let header = read_header(&mut reader, path)?;
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    match header.encoding {
        PlyEncoding::Ascii => {
            let text = String::from_utf8_lossy(&body);
            let mut src = AsciiSource {
                tokens: text.split_whitespace(),
                path,
                consumed: 0,
            };
            read_body(&header, &mut src, path)
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut src = BinarySource {
                data: &body,
                pos: 0,
                base: header.len,
                path,
            };
            read_body(&header, &mut src, path)
        }
    }
}

/// Writes positions (and normals) as doubles so a read-back is exact.
pub fn write_ply<W: Write>(mesh: &TriMesh, w: W, encoding: PlyEncoding) -> std::io::Result<()> {
    write_ply_with(mesh, w, encoding, Precision::Double)
}

/// `Single` stores vertex properties as `float` instead of `double`.
pub fn write_ply_with<W: Write>(
    mesh: &TriMesh,
    mut w: W,
    encoding: PlyEncoding,
    precision: Precision,
) -> std::io::Result<()> {
    let normals = mesh.vertex_normals();
    let colors = mesh.vertex_colors();
    writeln!(w, "ply")?;
    match encoding {
        PlyEncoding::Ascii => writeln!(w, "format ascii 1.0")?,
        PlyEncoding::BinaryLittleEndian => writeln!(w, "format binary_little_endian 1.0")?,
    }
    writeln!(w, "element vertex {}", mesh.vertices().len())?;
    let mut props = vec!["x", "y", "z"];
    if normals.is_some() {
        props.extend(["nx", "ny", "nz"]);
    }
    if colors.is_some() {
        props.extend(["red", "green", "blue"]);
    }
    for p in &props {
        match precision {
            Precision::Double => writeln!(w, "property double {p}")?,
            Precision::Single => writeln!(w, "property float {p}")?,
        }
    }
    writeln!(w, "element face {}", mesh.faces().len())?;
    writeln!(w, "property list uchar uint vertex_indices")?;
    writeln!(w, "end_header")?;

    let mut row = Vec::with_capacity(9);
    for (i, v) in mesh.vertices().iter().enumerate() {
        row.clear();
        row.extend_from_slice(v.as_slice());
        if let Some(ns) = normals {
            row.extend_from_slice(ns[i].as_slice());
        }
        if let Some(cs) = colors {
            row.extend_from_slice(&cs[i]);
        }
        match encoding {
            PlyEncoding::Ascii => {
                let line: Vec<String> = match precision {
                    Precision::Double => row.iter().map(|x| x.to_string()).collect(),
                    Precision::Single => row.iter().map(|&x| (x as f32).to_string()).collect(),
                };
                writeln!(w, "{}", line.join(" "))?;
            }
            PlyEncoding::BinaryLittleEndian => {
                for &x in &row {
                    match precision {
                        Precision::Double => w.write_all(&x.to_le_bytes())?,
                        Precision::Single => w.write_all(&(x as f32).to_le_bytes())?,
                    }
                }
            }
        }
    }
    for [a, b, c] in mesh.faces() {
        match encoding {
            PlyEncoding::Ascii => writeln!(w, "3 {a} {b} {c}")?,
            PlyEncoding::BinaryLittleEndian => {
                w.write_all(&[3u8])?;
                for i in [a, b, c] {
                    w.write_all(&i.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    const ASCII_QUAD: &str = "ply
format ascii 1.0
comment unit quad
element vertex 4
property float x
property float y
property float z
element face 1
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
1 1 0
0 1 0
4 0 1 2 3
";

    #[test]
    fn ascii_quad() {
        let m = read_ply(ASCII_QUAD.as_bytes(), "quad.ply").unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn truncated_ascii() {
        let cut = &ASCII_QUAD[..ASCII_QUAD.len() - 6];
        assert!(matches!(
            read_ply(cut.as_bytes(), "cut.ply"),
            Err(MeshError::Parse { .. })
        ));
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let m = primitives::icosphere(1.0, 1);
        let mut buf = Vec::new();
        write_ply(&m, &mut buf, PlyEncoding::BinaryLittleEndian).unwrap();
        buf.truncate(buf.len() - 5);
        match read_ply(buf.as_slice(), "cut.ply").unwrap_err() {
            MeshError::Parse { location, .. } => assert!(location.starts_with("byte offset")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn big_endian_is_unsupported() {
        let src = "ply\nformat binary_big_endian 1.0\nend_header\n";
        assert!(matches!(
            read_ply(src.as_bytes(), "be.ply"),
            Err(MeshError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn roundtrip_both_encodings() {
        let m = crate::mesh::smooth_vertex_normals(&primitives::icosphere(0.7, 2));
        for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
            let mut buf = Vec::new();
            write_ply(&m, &mut buf, enc).unwrap();
            let back = read_ply(buf.as_slice(), "mem.ply").unwrap();
            assert_eq!(back.vertices(), m.vertices());
            assert_eq!(back.faces(), m.faces());
            assert_eq!(back.vertex_normals(), m.vertex_normals());
        }
    }

    #[test]
    fn single_precision_floats() {
        let m = primitives::icosphere(0.7, 1);
        for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
            let mut buf = Vec::new();
            write_ply_with(&m, &mut buf, enc, Precision::Single).unwrap();
            let back = read_ply(buf.as_slice(), "mem.ply").unwrap();
            assert_eq!(back.faces(), m.faces());
            for (a, b) in back.vertices().iter().zip(m.vertices()) {
                assert!((a - b).norm() < 1e-7);
            }
        }
    }
}
