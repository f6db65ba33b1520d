//! Mesh interchange: STL (binary and ASCII read, binary write) and OBJ with
//! region groups.

mod obj;
mod stl;

pub use obj::{load_obj, parse_obj, save_obj, write_obj};
pub use stl::{load_stl, parse_stl, save_stl, write_stl};

use std::path::Path;

use crate::error::{MeshError, Result};
use crate::mesh::TriangleMesh;

/// Loads `.stl` or `.obj` by extension. `unit_scale` applies to STL only.
pub fn load_mesh(path: impl AsRef<Path>, unit_scale: f64) -> Result<TriangleMesh> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("stl") => load_stl(path, unit_scale),
        Some("obj") => load_obj(path),
        _ => Err(MeshError::InvalidParameter(format!(
            "unsupported mesh extension: {}",
            path.display()
        ))),
    }
}

/// Saves `.stl` or `.obj` by extension.
pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("stl") => save_stl(mesh, path),
        Some("obj") => save_obj(mesh, path),
        _ => Err(MeshError::InvalidParameter(format!(
            "unsupported mesh extension: {}",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.display().to_string(),
        source,
    }
}
