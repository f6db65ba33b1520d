//! Topological and geometric diagnostics.

use std::collections::HashMap;
use std::fmt;

use crate::mesh::{TriangleMesh, Vec3};

/// Area below which a face counts as degenerate, m².
pub const DEFAULT_AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub face_count: usize,
    pub edge_count: usize,
    pub is_manifold: bool,
    pub is_watertight: bool,
    /// Sum of per-component genera; only computed for watertight manifolds.
    pub genus: Option<i64>,
    pub boundary_edge_count: usize,
    pub non_manifold_edge_count: usize,
    pub non_manifold_vertex_count: usize,
    pub duplicate_vertex_count: usize,
    pub degenerate_face_count: usize,
    pub component_count: usize,
    pub bounding_box: (Vec3, Vec3),
}

impl ValidationReport {
    /// Watertight, manifold and genus 0.
    pub fn is_closed_sphere(&self) -> bool {
        self.is_watertight && self.is_manifold && self.genus == Some(0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count as i64 + self.face_count as i64
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.bounding_box;
        writeln!(f, "vertices: {}", self.vertex_count)?;
        writeln!(f, "faces: {}", self.face_count)?;
        writeln!(f, "edges: {}", self.edge_count)?;
        writeln!(f, "manifold: {}", self.is_manifold)?;
        writeln!(f, "watertight: {}", self.is_watertight)?;
        match self.genus {
            Some(g) => writeln!(f, "genus: {g}")?,
            None => writeln!(f, "genus: n/a")?,
        }
        writeln!(f, "boundary_edges: {}", self.boundary_edge_count)?;
        writeln!(f, "non_manifold_edges: {}", self.non_manifold_edge_count)?;
        writeln!(f, "non_manifold_vertices: {}", self.non_manifold_vertex_count)?;
        writeln!(f, "duplicate_vertices: {}", self.duplicate_vertex_count)?;
        writeln!(f, "degenerate_faces: {}", self.degenerate_face_count)?;
        writeln!(f, "components: {}", self.component_count)?;
        write!(
            f,
            "bounding_box: [{}, {}, {}] .. [{}, {}, {}]",
            lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
        )
    }
}

/// Undirected edge → incident face count.
pub(crate) fn edge_face_counts(mesh: &TriangleMesh) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::with_capacity(mesh.faces.len() * 3 / 2);
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Reports manifoldness, watertightness, genus and defect counts.
pub fn validate(mesh: &TriangleMesh) -> ValidationReport {
    let counts = edge_face_counts(mesh);
    let boundary_edge_count = counts.values().filter(|&&c| c == 1).count();
    let non_manifold_edge_count = counts.values().filter(|&&c| c > 2).count();

    let non_manifold_vertex_count = count_non_manifold_vertices(mesh);
    let is_manifold = non_manifold_edge_count == 0 && non_manifold_vertex_count == 0;
    let is_watertight = !mesh.faces.is_empty() && counts.values().all(|&c| c == 2);

    // Components over faces connected through shared vertices.
    let mut uf = UnionFind::new(mesh.vertices.len());
    for f in &mesh.faces {
        uf.union(f[0], f[1]);
        uf.union(f[1], f[2]);
    }
    let mut comp_of_root: HashMap<usize, usize> = HashMap::new();
    let mut per_comp: Vec<[i64; 3]> = Vec::new(); // V, E, F
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        let root = uf.find(f[0]);
        let next = comp_of_root.len();
        let c = *comp_of_root.entry(root).or_insert(next);
        if c == per_comp.len() {
            per_comp.push([0; 3]);
        }
        per_comp[c][2] += 1;
        for &v in f {
            if !used[v] {
                used[v] = true;
                per_comp[c][0] += 1;
            }
        }
    }
    for &(a, _) in counts.keys() {
        let c = comp_of_root[&uf.find(a)];
        per_comp[c][1] += 1;
    }
    let component_count = per_comp.len();

    let genus = (is_watertight && is_manifold).then(|| {
        per_comp
            .iter()
            .map(|&[v, e, f]| (2 - v + e - f) / 2)
            .sum::<i64>()
    });

    let mut seen = HashMap::with_capacity(mesh.vertices.len());
    let mut duplicate_vertex_count = 0;
    for v in &mesh.vertices {
        let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
        if seen.insert(key, ()).is_some() {
            duplicate_vertex_count += 1;
        }
    }
    let degenerate_face_count = (0..mesh.faces.len())
        .filter(|&f| mesh.face_area(f) < DEFAULT_AREA_EPS)
        .count();

    ValidationReport {
        vertex_count: used.iter().filter(|&&u| u).count(),
        face_count: mesh.faces.len(),
        edge_count: counts.len(),
        is_manifold,
        is_watertight,
        genus,
        boundary_edge_count,
        non_manifold_edge_count,
        non_manifold_vertex_count,
        duplicate_vertex_count,
        degenerate_face_count,
        component_count,
        bounding_box: mesh.bounding_box(),
    }
}

/// Vertices whose incident faces do not form a single edge-connected fan.
fn count_non_manifold_vertices(mesh: &TriangleMesh) -> usize {
    let vf = mesh.vertex_faces();
    let mut bad = 0;
    for (v, faces) in vf.iter().enumerate() {
        if faces.len() <= 1 {
            continue;
        }
        // Faces around v are linked when they share a second vertex.
        let mut uf = UnionFind::new(faces.len());
        let mut by_vertex: HashMap<usize, usize> = HashMap::new();
        for (i, &f) in faces.iter().enumerate() {
            for &w in &mesh.faces[f] {
                if w == v {
                    continue;
                }
                if let Some(&j) = by_vertex.get(&w) {
                    uf.union(i, j);
                } else {
                    by_vertex.insert(w, i);
                }
            }
        }
        let root = uf.find(0);
        if (1..faces.len()).any(|i| uf.find(i) != root) {
            bad += 1;
        }
    }
    bad
}
