use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::io_error;
use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

/// Reads a binary or ASCII STL file and scales coordinates by `unit_scale`.
///
/// Facet corners are welded by exact coordinate equality. Facets that
/// collapse onto a repeated vertex are dropped.
pub fn load_stl(path: impl AsRef<Path>, unit_scale: f64) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    parse_stl(&bytes, unit_scale)
}

pub fn parse_stl(bytes: &[u8], unit_scale: f64) -> Result<TriangleMesh> {
    if !(unit_scale.is_finite() && unit_scale > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "unit_scale must be positive, got {unit_scale}"
        )));
    }
    let corners = if is_binary(bytes) {
        parse_binary(bytes)?
    } else if bytes.trim_ascii_start().starts_with(b"solid") {
        parse_ascii(bytes)?
    } else {
        return Err(MeshError::StlParse {
            offset: 0,
            message: "neither a binary STL of consistent length nor an ASCII 'solid'".into(),
        });
    };
    weld(corners, unit_scale)
}

fn is_binary(bytes: &[u8]) -> bool {
    if bytes.len() < HEADER_LEN + 4 {
        return false;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == HEADER_LEN + 4 + n * RECORD_LEN
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[[f64; 3]; 3]>> {
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let base = HEADER_LEN + 4 + i * RECORD_LEN + 12;
        let mut tri = [[0.0; 3]; 3];
        for (k, corner) in tri.iter_mut().enumerate() {
            for (c, slot) in corner.iter_mut().enumerate() {
                let at = base + (k * 3 + c) * 4;
                let value = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
                if !value.is_finite() {
                    return Err(MeshError::StlParse {
                        offset: at,
                        message: "non-finite coordinate".into(),
                    });
                }
                *slot = value as f64;
            }
        }
        out.push(tri);
    }
    Ok(out)
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[[f64; 3]; 3]>> {
    let mut tokens = Tokens { bytes, pos: 0 };
    let mut out = Vec::new();
    let (_, first) = tokens.next().expect("caller checked 'solid'");
    debug_assert_eq!(first, "solid");
    // Skip the solid name up to the first facet.
    loop {
        match tokens.next() {
            Some((_, "facet")) => break,
            Some((_, "endsolid")) | None => return Ok(out),
            Some(_) => {}
        }
    }
    loop {
        tokens.expect("normal")?;
        for _ in 0..3 {
            tokens.number()?;
        }
        tokens.expect("outer")?;
        tokens.expect("loop")?;
        let mut tri = [[0.0; 3]; 3];
        for corner in &mut tri {
            tokens.expect("vertex")?;
            for slot in corner.iter_mut() {
                *slot = tokens.number()?;
            }
        }
        tokens.expect("endloop")?;
        tokens.expect("endfacet")?;
        out.push(tri);
        match tokens.next() {
            Some((_, "facet")) => continue,
            Some((_, "endsolid")) | None => break,
            Some((offset, other)) => {
                return Err(MeshError::StlParse {
                    offset,
                    message: format!("expected 'facet' or 'endsolid', found '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("\u{fffd}");
        Some((start, text))
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        match self.next() {
            Some((_, t)) if t == word => Ok(()),
            Some((offset, t)) => Err(MeshError::StlParse {
                offset,
                message: format!("expected '{word}', found '{t}'"),
            }),
            None => Err(MeshError::StlParse {
                offset: self.bytes.len(),
                message: format!("unexpected end of file, expected '{word}'"),
            }),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.next() {
            Some((offset, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(MeshError::StlParse {
                    offset,
                    message: format!("invalid number '{t}'"),
                }),
            },
            None => Err(MeshError::StlParse {
                offset: self.bytes.len(),
                message: "unexpected end of file, expected a number".into(),
            }),
        }
    }
}

fn weld(corners: Vec<[[f64; 3]; 3]>, unit_scale: f64) -> Result<TriangleMesh> {
    let mut index: HashMap<[u64; 3], usize> = HashMap::with_capacity(corners.len() / 2);
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(corners.len());
    let mut dropped = 0usize;
    for tri in &corners {
        let mut face = [0usize; 3];
        for (k, c) in tri.iter().enumerate() {
            let key = [c[0].to_bits(), c[1].to_bits(), c[2].to_bits()];
            face[k] = *index.entry(key).or_insert_with(|| {
                vertices.push(Vec3::new(c[0], c[1], c[2]) * unit_scale);
                vertices.len() - 1
            });
        }
        if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
            dropped += 1;
            continue;
        }
        faces.push(face);
    }
    if dropped > 0 {
        log::warn!("stl: dropped {dropped} facets with coincident corners");
    }
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    Ok(TriangleMesh {
        vertices,
        faces,
        labels: None,
    })
}

/// Writes a binary STL. Coordinates are stored as f32 in meters.
pub fn save_stl(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut buf = Vec::new();
    write_stl(mesh, &mut buf).map_err(|e| io_error(path, e))?;
    file.write_all(&buf).map_err(|e| io_error(path, e))
}

pub fn write_stl(mesh: &TriangleMesh, out: &mut impl Write) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    let tag = b"binary STL (meters)";
    header[..tag.len()].copy_from_slice(tag);
    out.write_all(&header)?;
    out.write_all(&(mesh.faces.len() as u32).to_le_bytes())?;
    for f in 0..mesh.faces.len() {
        let n = mesh.face_normal(f);
        for c in n.iter() {
            out.write_all(&(*c as f32).to_le_bytes())?;
        }
        for v in mesh.triangle(f) {
            for c in v.iter() {
                out.write_all(&(*c as f32).to_le_bytes())?;
            }
        }
        out.write_all(&0u16.to_le_bytes())?;
    }
    Ok(())
}
