//! Half-edge connectivity derived from an indexed triangle mesh.
//!
//! Half-edge `3f + k` runs from corner `k` to corner `k + 1` of face `f`, so
//! `next` is implicit in the indexing and only twins need a lookup.

use std::collections::HashMap;

use crate::error::{MeshError, Result};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: usize,
    pub face: usize,
    pub next: usize,
    pub twin: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct HalfEdgeMesh {
    pub half_edges: Vec<HalfEdge>,
    /// One outgoing half-edge per vertex; boundary vertices prefer a boundary one.
    pub vertex_half_edge: Vec<Option<usize>>,
}

/// Builds half-edges and twin links.
///
/// Fails on an edge with more than two incident faces or a directed edge
/// used twice (inconsistent winding).
pub fn build_half_edge(mesh: &TriangleMesh) -> Result<HalfEdgeMesh> {
    let nh = mesh.faces.len() * 3;
    let mut half_edges = Vec::with_capacity(nh);
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(nh);
    let mut undirected: HashMap<(usize, usize), u8> = HashMap::with_capacity(nh / 2);
    for (f, tri) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let h = 3 * f + k;
            let count = undirected.entry((a.min(b), a.max(b))).or_insert(0);
            *count += 1;
            if *count > 2 {
                return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b)));
            }
            if directed.insert((a, b), h).is_some() {
                return Err(MeshError::InconsistentOrientation(a, b));
            }
            half_edges.push(HalfEdge {
                origin: a,
                face: f,
                next: 3 * f + (k + 1) % 3,
                twin: None,
            });
        }
    }
    for h in 0..nh {
        let a = half_edges[h].origin;
        let b = half_edges[half_edges[h].next].origin;
        half_edges[h].twin = directed.get(&(b, a)).copied();
    }
    let mut vertex_half_edge = vec![None; mesh.vertices.len()];
    for (h, he) in half_edges.iter().enumerate() {
        let slot = &mut vertex_half_edge[he.origin];
        match slot {
            None => *slot = Some(h),
            Some(_) if he.twin.is_none() => *slot = Some(h),
            _ => {}
        }
    }
    Ok(HalfEdgeMesh {
        half_edges,
        vertex_half_edge,
    })
}

impl HalfEdgeMesh {
    pub fn len(&self) -> usize {
        self.half_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_edges.is_empty()
    }

    pub fn origin(&self, h: usize) -> usize {
        self.half_edges[h].origin
    }

    pub fn dest(&self, h: usize) -> usize {
        self.half_edges[self.half_edges[h].next].origin
    }

    pub fn next(&self, h: usize) -> usize {
        self.half_edges[h].next
    }

    pub fn prev(&self, h: usize) -> usize {
        self.next(self.next(h))
    }

    pub fn twin(&self, h: usize) -> Option<usize> {
        self.half_edges[h].twin
    }

    /// Vertex opposite to half-edge `h` in its own face.
    pub fn opposite(&self, h: usize) -> usize {
        self.origin(self.prev(h))
    }

    pub fn boundary_count(&self) -> usize {
        self.half_edges.iter().filter(|h| h.twin.is_none()).count()
    }

    /// Outgoing half-edges of every vertex, in ascending half-edge order.
    pub fn outgoing(&self, vertex_count: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); vertex_count];
        for (h, he) in self.half_edges.iter().enumerate() {
            out[he.origin].push(h);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec3;
    use crate::shapes;

    #[test]
    fn icosahedron_is_fully_twinned() {
        let he = build_half_edge(&shapes::icosahedron()).unwrap();
        assert_eq!(he.len(), 60);
        assert_eq!(he.boundary_count(), 0);
        for h in 0..he.len() {
            let t = he.twin(h).unwrap();
            assert_eq!(he.twin(t), Some(h));
            assert_eq!(he.origin(t), he.dest(h));
            assert_eq!(he.next(he.next(he.next(h))), h);
        }
    }

    #[test]
    fn open_fan_has_boundary() {
        let mut v = vec![Vec3::zeros()];
        for i in 0..4 {
            let t = i as f64 * 0.5;
            v.push(Vec3::new(t.cos(), t.sin(), 0.0));
        }
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3], [0, 3, 4]]).unwrap();
        let he = build_half_edge(&m).unwrap();
        // Four spokes on the outside: 0-1, 1-2, 2-3, 3-4, 4-0 → 5 boundary, 2 interior pairs.
        assert_eq!(he.boundary_count(), 5);
        assert_eq!(he.len() - he.boundary_count(), 4);
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![
            Vec3::zeros(),
            Vec3::x(),
            Vec3::y(),
            Vec3::z(),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        // Bowtie at vertex 0 plus a third face on edge (0, 1).
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 4, 5], [1, 0, 3], [0, 1, 5]]).unwrap();
        match build_half_edge(&m) {
            Err(MeshError::NonManifoldEdge(0, 1)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
