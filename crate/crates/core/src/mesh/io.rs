use super::{obj, ply, MeshError, Precision, TriMesh};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self, MeshError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => Ok(Self::Obj),
            Some("ply") => Ok(Self::Ply),
            _ => Err(MeshError::UnsupportedFormat(path.display().to_string())),
        }
    }
}

/// Loads an OBJ or PLY file, chosen by extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => MeshError::FileNotFound(path.to_path_buf()),
        _ => MeshError::Io(e),
    })?;
    let reader = BufReader::new(file);
    let name = path.display().to_string();
    match format {
        MeshFormat::Obj => obj::read_obj(reader, &name),
        MeshFormat::Ply => ply::read_ply(reader, &name),
    }
}

/// Saves as OBJ or binary little-endian PLY, chosen by extension.
pub fn save_mesh(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    save_mesh_with(mesh, path, Precision::Double)
}

pub fn save_mesh_with(mesh: &TriMesh, path: impl AsRef<Path>, precision: Precision) -> Result<(), MeshError> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Obj => obj::write_obj_with(mesh, w, precision)?,
        MeshFormat::Ply => ply::write_ply_with(mesh, w, ply::PlyEncoding::BinaryLittleEndian, precision)?,
    }
    Ok(())
}
