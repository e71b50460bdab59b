//! Command-line plumbing: metric specs, formulas, CSV tables, slice meshes
//! and file output.

pub mod expr;
pub mod slice;
pub mod spec;
pub mod table;

use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// From the file extension (`.obj` / `.ply`, case-insensitive).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::InvalidParameter(format!(
                "cannot infer mesh format from '{}' (use .obj or .ply)",
                path.display()
            ))),
        }
    }
}

/// Validates the mesh and writes it in the given format.
pub fn export_mesh(mesh: &Mesh, path: &Path, format: MeshFormat) -> Result<()> {
    mesh.validate()?;
    let text = match format {
        MeshFormat::Obj => mesh.to_obj(),
        MeshFormat::Ply => mesh.to_ply(),
    };
    write_file(path, &text)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
