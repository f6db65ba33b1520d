use std::fs;
use std::io::Write;
use std::path::Path;

use super::io_error;
use crate::error::{MeshError, Result};
use crate::mesh::{Region, TriangleMesh, Vec3};

/// Reads a Wavefront OBJ. Polygons are fan-triangulated; groups named
/// `skin`, `left_ear` or `right_ear` become face labels.
pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut labels = Vec::new();
    let mut current: Option<Region> = None;
    let mut any_region = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut parts = content.split_whitespace();
        let Some(keyword) = parts.next() else { continue };
        match keyword {
            "v" => {
                let mut xyz = [0.0; 3];
                for slot in &mut xyz {
                    let tok = parts.next().ok_or_else(|| MeshError::ObjParse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        MeshError::ObjParse {
                            line,
                            message: format!("non-numeric coordinate '{tok}'"),
                        }
                    })?;
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            "f" => {
                let mut poly = Vec::new();
                for tok in parts {
                    let idx_text = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_text.parse().map_err(|_| MeshError::ObjParse {
                        line,
                        message: format!("invalid face index '{tok}'"),
                    })?;
                    let resolved = if idx > 0 {
                        idx as usize - 1
                    } else if idx < 0 && (-idx) as usize <= vertices.len() {
                        vertices.len() - (-idx) as usize
                    } else {
                        return Err(MeshError::ObjParse {
                            line,
                            message: format!("face index {idx} out of range"),
                        });
                    };
                    if resolved >= vertices.len() {
                        return Err(MeshError::ObjParse {
                            line,
                            message: format!("face index {idx} references an undefined vertex"),
                        });
                    }
                    poly.push(resolved);
                }
                if poly.len() < 3 {
                    return Err(MeshError::ObjParse {
                        line,
                        message: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..poly.len() - 1 {
                    let tri = [poly[0], poly[k], poly[k + 1]];
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        return Err(MeshError::ObjParse {
                            line,
                            message: "face repeats a vertex".into(),
                        });
                    }
                    faces.push(tri);
                    labels.push(current.unwrap_or(Region::Skin));
                }
            }
            "g" | "o" => {
                let name = parts.next().unwrap_or("");
                current = Region::from_group_name(name);
                any_region |= current.is_some();
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    let mesh = TriangleMesh {
        vertices,
        faces,
        labels: any_region.then_some(labels),
    };
    mesh.check()?;
    Ok(mesh)
}

pub fn save_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_obj(mesh, &mut buf).map_err(|e| io_error(path, e))?;
    fs::write(path, buf).map_err(|e| io_error(path, e))
}

/// Writes vertices with shortest round-trip formatting, then faces grouped
/// by label in face order.
pub fn write_obj(mesh: &TriangleMesh, out: &mut impl Write) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    let mut current = None;
    for (fi, f) in mesh.faces.iter().enumerate() {
        if let Some(label) = mesh.label(fi) {
            if current != Some(label) {
                writeln!(out, "g {}", label.group_name())?;
                current = Some(label);
            }
        }
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
