//! Midpoint (1-to-4) subdivision topology.

use crate::mesh::TriangleMesh;

/// Result of one midpoint subdivision step.
///
/// Vertex `i < V` of the output is vertex `i` of the input; vertex `V + e`
/// is the midpoint of `edges[e]`.
#[derive(Debug, Clone)]
pub struct MidpointSubdivision {
    pub mesh: TriangleMesh,
    pub edges: Vec<[usize; 2]>,
    /// For every input face, the midpoint vertex of its edges `(0,1)`, `(1,2)`, `(2,0)`.
    pub face_midpoints: Vec<[usize; 3]>,
}

/// Splits every face into four, inserting one vertex at the midpoint of each edge.
///
/// Child faces of input face `f` are `4f..4f+4`: the three corner triangles
/// followed by the central one. Labels are inherited.
pub fn midpoint_subdivide(mesh: &TriangleMesh) -> MidpointSubdivision {
    let nv = mesh.vertices.len();
    let edges = mesh.edges();
    let mut index = std::collections::HashMap::with_capacity(edges.len());
    for (e, &[a, b]) in edges.iter().enumerate() {
        index.insert((a, b), nv + e);
    }
    let mid = |a: usize, b: usize| index[&(a.min(b), a.max(b))];

    let mut vertices = mesh.vertices.clone();
    vertices.extend(
        edges
            .iter()
            .map(|&[a, b]| (mesh.vertices[a] + mesh.vertices[b]) * 0.5),
    );

    let mut faces = Vec::with_capacity(mesh.faces.len() * 4);
    let mut face_midpoints = Vec::with_capacity(mesh.faces.len());
    for &[a, b, c] in &mesh.faces {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        faces.push([a, ab, ca]);
        faces.push([ab, b, bc]);
        faces.push([ca, bc, c]);
        faces.push([ab, bc, ca]);
        face_midpoints.push([ab, bc, ca]);
    }
    let labels = mesh
        .labels
        .as_ref()
        .map(|l| l.iter().flat_map(|&r| [r; 4]).collect());

    MidpointSubdivision {
        mesh: TriangleMesh {
            vertices,
            faces,
            labels,
        },
        edges,
        face_midpoints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn icosahedron_counts() {
        let s = midpoint_subdivide(&shapes::icosahedron());
        assert_eq!(s.mesh.vertex_count(), 42);
        assert_eq!(s.mesh.face_count(), 80);
        let s2 = midpoint_subdivide(&s.mesh);
        assert_eq!(s2.mesh.face_count(), 320);
    }

    #[test]
    fn midpoints_are_edge_midpoints() {
        let m = shapes::icosahedron();
        let s = midpoint_subdivide(&m);
        for (e, &[a, b]) in s.edges.iter().enumerate() {
            let expect = (m.vertices[a] + m.vertices[b]) * 0.5;
            assert_eq!(s.mesh.vertices[12 + e], expect);
        }
    }
}
