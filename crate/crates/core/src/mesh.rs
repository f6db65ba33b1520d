//! Indexed triangle mesh with optional per-face region labels.

use std::collections::HashMap;
use std::fmt;

use nalgebra::Vector3;

use crate::error::{MeshError, Result};

/// Point or direction in meters.
pub type Vec3 = Vector3<f64>;

/// Boundary-condition region of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Skin,
    LeftEar,
    RightEar,
}

impl Region {
    /// Group name used in OBJ files.
    pub fn group_name(self) -> &'static str {
        match self {
            Region::Skin => "skin",
            Region::LeftEar => "left_ear",
            Region::RightEar => "right_ear",
        }
    }

    pub fn from_group_name(name: &str) -> Option<Self> {
        match name {
            "skin" => Some(Region::Skin),
            "left_ear" => Some(Region::LeftEar),
            "right_ear" => Some(Region::RightEar),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.group_name())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// One label per face when present.
    pub labels: Option<Vec<Region>>,
}

impl TriangleMesh {
    /// Builds a mesh and checks the index invariants.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self {
            vertices,
            faces,
            labels: None,
        };
        mesh.check()?;
        Ok(mesh)
    }

    pub fn with_labels(mut self, labels: Vec<Region>) -> Result<Self> {
        if labels.len() != self.faces.len() {
            return Err(MeshError::LabelCount {
                labels: labels.len(),
                faces: self.faces.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Verifies face indices, repeated indices, finiteness and label count.
    pub fn check(&self) -> Result<()> {
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            for &i in f {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index: i,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[0] == f[2] {
                return Err(MeshError::RepeatedIndex {
                    face: fi,
                    index: f[0],
                });
            }
            if f[1] == f[2] {
                return Err(MeshError::RepeatedIndex {
                    face: fi,
                    index: f[1],
                });
            }
        }
        if let Some(i) = self.vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.faces.len() {
                return Err(MeshError::LabelCount {
                    labels: labels.len(),
                    faces: self.faces.len(),
                });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn label(&self, face: usize) -> Option<Region> {
        self.labels.as_ref().map(|l| l[face])
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Cross product of the two edges leaving the first corner; twice the area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn face_normal(&self, face: usize) -> Vec3 {
        let n = self.face_cross(face);
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn face_centroid(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (a + b + c) / 3.0
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed enclosed volume; positive for outward-oriented closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c])) / 6.0
            })
            .sum()
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Unique undirected edges as `(min, max)` pairs in first-seen order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::with_capacity(self.faces.len() * 3 / 2);
        let mut out = Vec::with_capacity(self.faces.len() * 3 / 2);
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if seen.insert(key, ()).is_none() {
                    out.push([key.0, key.1]);
                }
            }
        }
        out
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges()
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .collect()
    }

    /// Area-weighted vertex normals (unit length, zero for isolated vertices).
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            let n = self.face_cross(fi);
            for &v in f {
                normals[v] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Vertex-to-vertex adjacency lists, sorted and deduplicated.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Faces incident to each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(fi);
            }
        }
        vf
    }

    /// Reverses the winding of every face.
    pub fn flip_orientation(&mut self) {
        for f in &mut self.faces {
            f.swap(1, 2);
        }
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v += offset;
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v *= factor;
        }
        out
    }

    /// Drops vertices not referenced by any face and remaps indices.
    pub fn without_unreferenced_vertices(&self) -> Self {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut faces = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let mut nf = [0; 3];
            for k in 0..3 {
                let v = f[k];
                if remap[v] == usize::MAX {
                    remap[v] = vertices.len();
                    vertices.push(self.vertices[v]);
                }
                nf[k] = remap[v];
            }
            faces.push(nf);
        }
        Self {
            vertices,
            faces,
            labels: self.labels.clone(),
        }
    }

    /// Faces carrying the given label.
    pub fn faces_with_label(&self, region: Region) -> Vec<usize> {
        match &self.labels {
            Some(labels) => labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == region)
                .map(|(i, _)| i)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths().into_iter().fold(0.0, f64::max)
    }

    /// Generalized winding number of the surface around `p`: about 1 inside a
    /// closed outward-oriented mesh, 0 outside.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        let mut total = 0.0;
        for f in &self.faces {
            let a = self.vertices[f[0]] - p;
            let b = self.vertices[f[1]] - p;
            let c = self.vertices[f[2]] - p;
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
            total += 2.0 * num.atan2(den);
        }
        total / (4.0 * std::f64::consts::PI)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let lengths = self.edge_lengths();
        if lengths.is_empty() {
            return 0.0;
        }
        lengths.iter().sum::<f64>() / lengths.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn constructor_rejects_bad_indices() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(matches!(
            TriangleMesh::new(v.clone(), vec![[0, 1, 1]]),
            Err(MeshError::RepeatedIndex { .. })
        ));
        assert!(TriangleMesh::new(v, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn icosahedron_volume_is_positive() {
        let m = shapes::icosahedron();
        assert!(m.signed_volume() > 0.0);
        let mut flipped = m.clone();
        flipped.flip_orientation();
        assert!((flipped.signed_volume() + m.signed_volume()).abs() < 1e-12);
    }

    #[test]
    fn edges_are_unique() {
        let m = shapes::icosahedron();
        assert_eq!(m.edges().len(), 30);
    }
}
