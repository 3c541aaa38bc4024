//! Wavefront OBJ subset: `v` (optionally followed by r g b), `vn` and `f`
//! records. Indices are 1-based; relative (negative) indices are rejected.

use super::{MeshError, Precision, TriMesh, Vec3};
use std::io::{BufRead, Write};

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_string(),
        location: format!("line {line}"),
        message: message.into(),
    }
}

fn parse_index(token: &str, count: usize, path: &str, line: usize) -> Result<usize, MeshError> {
    let raw: i64 = token
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad index `{token}`")))?;
    if raw < 0 {
        return Err(parse_err(path, line, "negative indices are not supported"));
    }
    if raw == 0 || raw as usize > count {
        return Err(parse_err(
            path,
            line,
            format!("index {raw} out of range (1..={count})"),
        ));
    }
    Ok(raw as usize - 1)
}

/// Reads an OBJ stream. `path` is only used in error messages.
pub fn read_obj<R: BufRead>(reader: R, path: &str) -> Result<TriMesh, MeshError> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut vertex_normal: Vec<Option<usize>> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut dropped = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" | "vn" => {
                let values: Vec<f64> = tokens
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| parse_err(path, lineno, format!("bad number `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if values.len() < 3 {
                    return Err(parse_err(path, lineno, format!("`{tag}` needs 3 coordinates")));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(parse_err(path, lineno, "non-finite coordinate"));
                }
                let p = Vec3::new(values[0], values[1], values[2]);
                if tag == "v" {
                    positions.push(p);
                    vertex_normal.push(None);
                    if values.len() >= 6 {
                        colors.push([values[3], values[4], values[5]]);
                    }
                } else {
                    let len = p.norm();
                    if len == 0.0 {
                        return Err(parse_err(path, lineno, "zero-length normal"));
                    }
                    normals.push(if (len - 1.0).abs() > 1e-12 { p / len } else { p });
                }
            }
            "f" => {
                let mut corners = Vec::with_capacity(4);
                for t in tokens {
                    let mut parts = t.split('/');
                    let v = parse_index(parts.next().unwrap_or(""), positions.len(), path, lineno)?;
                    let _texcoord = parts.next();
                    if let Some(n) = parts.next().filter(|s| !s.is_empty()) {
                        let n = parse_index(n, normals.len(), path, lineno)?;
                        vertex_normal[v] = Some(n);
                    }
                    corners.push(v as u32);
                }
                if corners.len() < 3 {
                    return Err(parse_err(path, lineno, "face needs at least 3 vertices"));
                }
                for k in 1..corners.len() - 1 {
                    let tri = [corners[0], corners[k], corners[k + 1]];
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        dropped += 1;
                    } else {
                        faces.push(tri);
                    }
                }
            }
            _ => {}
        }
    }
    if dropped > 0 {
        log::warn!("{path}: dropped {dropped} faces with repeated vertex indices");
    }
    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }

    let vertex_count = positions.len();
    let mut mesh = TriMesh::new(positions, faces)?;
    let referenced = vertex_normal.iter().any(Option::is_some);
    if referenced {
        if vertex_normal.iter().all(Option::is_some) {
            let ns = vertex_normal.iter().map(|n| normals[n.unwrap()]).collect();
            mesh = mesh.with_normals(ns)?;
        } else {
            log::warn!("{path}: normals reference only some vertices; ignoring normals");
        }
    } else if !normals.is_empty() && normals.len() == vertex_count {
        mesh = mesh.with_normals(normals)?;
    }
    if !colors.is_empty() {
        if colors.len() == vertex_count {
            mesh = mesh.with_colors(colors)?;
        } else {
            log::warn!("{path}: colors given for only some vertices; ignoring colors");
        }
    }
    Ok(mesh)
}

/// Writes positions with shortest round-trip float formatting, so reading
/// the output back reproduces them bit for bit.
pub fn write_obj<W: Write>(mesh: &TriMesh, w: W) -> std::io::Result<()> {
    write_obj_with(mesh, w, Precision::Double)
}

/// Writes with the given float precision. `Single` prints the shortest
/// string that round-trips through `f32`.
pub fn write_obj_with<W: Write>(mesh: &TriMesh, mut w: W, precision: Precision) -> std::io::Result<()> {
    // shortest round-trip float formatting; much faster than `Display`
    let mut line = LineBuf {
        precision,
        ..Default::default()
    };
    let colors = mesh.vertex_colors();
    for (i, v) in mesh.vertices().iter().enumerate() {
        line.tag("v");
        line.floats(&[v.x, v.y, v.z]);
        if let Some(c) = colors {
            line.floats(&c[i]);
        }
        line.end(&mut w)?;
    }
    let normals = mesh.vertex_normals();
    for n in normals.into_iter().flatten() {
        line.tag("vn");
        line.floats(&[n.x, n.y, n.z]);
        line.end(&mut w)?;
    }
    for f in mesh.faces() {
        line.tag("f");
        for &k in f {
            line.index(k + 1, normals.is_some());
        }
        line.end(&mut w)?;
    }
    line.flush(&mut w)?;
    w.flush()
}

#[derive(Default)]
struct LineBuf {
    precision: Precision,
    out: Vec<u8>,
    ryu: ryu::Buffer,
    itoa: itoa::Buffer,
}

impl LineBuf {
    const FLUSH_AT: usize = 1 << 16;

    fn tag(&mut self, t: &str) {
        self.out.extend_from_slice(t.as_bytes());
    }

    fn floats(&mut self, vs: &[f64]) {
        for &v in vs {
            self.out.push(b' ');
            // integral values print as `1.0`; trim to `1` like `Display` does
            let s = match (v.is_finite(), self.precision) {
                (false, _) => "nan",
                (true, Precision::Double) => self.ryu.format_finite(v),
                (true, Precision::Single) => self.ryu.format_finite(v as f32),
            };
            self.out.extend_from_slice(s.strip_suffix(".0").unwrap_or(s).as_bytes());
        }
    }

    fn index(&mut self, k: u32, with_normal: bool) {
        self.out.push(b' ');
        let s = self.itoa.format(k).as_bytes();
        self.out.extend_from_slice(s);
        if with_normal {
            self.out.extend_from_slice(b"//");
            self.out.extend_from_slice(s);
        }
    }

    fn end<W: Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.out.push(b'\n');
        if self.out.len() >= Self::FLUSH_AT {
            self.flush(w)?;
        }
        Ok(())
    }

    fn flush<W: Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&self.out)?;
        self.out.clear();
        Ok(())
    }
}
