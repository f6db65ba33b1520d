//! Welding, defect removal, orientation repair and component selection.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::validate::UnionFind;

pub const DEFAULT_WELD_TOL: f64 = 1e-6;

/// Cleans a raw mesh: welds vertices closer than `weld_tol`, removes
/// degenerate (area < `area_eps`) and duplicate faces, makes the winding
/// consistent and outward, keeps the component with the largest area and
/// drops unreferenced vertices.
pub fn cleanup(mesh: &TriangleMesh, weld_tol: f64, area_eps: f64) -> Result<TriangleMesh> {
    if !(weld_tol >= 0.0 && area_eps >= 0.0) {
        return Err(MeshError::InvalidParameter(
            "weld tolerance and area epsilon must be non-negative".into(),
        ));
    }
    let remap = weld(&mesh.vertices, weld_tol);

    let mut faces = Vec::with_capacity(mesh.faces.len());
    let mut labels = Vec::with_capacity(mesh.faces.len());
    let mut seen = HashSet::with_capacity(mesh.faces.len());
    for (fi, f) in mesh.faces.iter().enumerate() {
        let g = [remap[f[0]], remap[f[1]], remap[f[2]]];
        if g[0] == g[1] || g[1] == g[2] || g[0] == g[2] {
            continue;
        }
        let area = 0.5
            * (mesh.vertices[g[1]] - mesh.vertices[g[0]])
                .cross(&(mesh.vertices[g[2]] - mesh.vertices[g[0]]))
                .norm();
        if area < area_eps {
            continue;
        }
        let mut key = g;
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        faces.push(g);
        labels.push(mesh.label(fi));
    }
    if faces.is_empty() {
        return Err(MeshError::EmptyAfterCleanup);
    }

    orient_consistently(&mut faces);
    let keep = largest_component(&mesh.vertices, &faces);
    let mut out = TriangleMesh {
        vertices: mesh.vertices.clone(),
        faces: keep.iter().map(|&f| faces[f]).collect(),
        labels: mesh
            .labels
            .as_ref()
            .map(|_| keep.iter().map(|&f| labels[f].expect("labeled input")).collect()),
    };
    out = out.without_unreferenced_vertices();
    if out.signed_volume() < 0.0 {
        out.flip_orientation();
    }
    Ok(out)
}

/// Maps every vertex to the first earlier vertex within `tol`, or itself.
fn weld(vertices: &[Vec3], tol: f64) -> Vec<usize> {
    let mut remap = Vec::with_capacity(vertices.len());
    if tol == 0.0 {
        let mut exact: HashMap<[u64; 3], usize> = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            remap.push(*exact.entry(key).or_insert(i));
        }
        return remap;
    }
    let cell = |v: &Vec3| {
        [
            (v.x / tol).floor() as i64,
            (v.y / tol).floor() as i64,
            (v.z / tol).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let c = cell(v);
        let mut found = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &j in list {
                            if (vertices[j] - v).norm() <= tol && found.map_or(true, |f| j < f) {
                                found = Some(j);
                            }
                        }
                    }
                }
            }
        }
        match found {
            Some(j) => remap.push(j),
            None => {
                grid.entry(c).or_default().push(i);
                remap.push(i);
            }
        }
    }
    remap
}

/// Flood-fills orientation across edges shared by exactly two faces.
fn orient_consistently(faces: &mut [[usize; 3]]) {
    let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    let has_directed = |f: &[usize; 3], a: usize, b: usize| {
        (0..3).any(|k| f[k] == a && f[(k + 1) % 3] == b)
    };
    let mut visited = vec![false; faces.len()];
    for seed in 0..faces.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(fi) = queue.pop_front() {
            let f = faces[fi];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let incident = &edge_faces[&(a.min(b), a.max(b))];
                if incident.len() != 2 {
                    continue;
                }
                let g = if incident[0] == fi { incident[1] } else { incident[0] };
                if visited[g] {
                    continue;
                }
                visited[g] = true;
                // A consistent neighbor traverses the shared edge as b -> a.
                if has_directed(&faces[g], a, b) {
                    faces[g].swap(1, 2);
                }
                queue.push_back(g);
            }
        }
    }
}

/// Face indices of the vertex-connected component with the largest area.
fn largest_component(vertices: &[Vec3], faces: &[[usize; 3]]) -> Vec<usize> {
    let mut uf = UnionFind::new(vertices.len());
    for f in faces {
        uf.union(f[0], f[1]);
        uf.union(f[1], f[2]);
    }
    let mut area: HashMap<usize, f64> = HashMap::new();
    let mut order = Vec::new();
    for f in faces {
        let root = uf.find(f[0]);
        let a = 0.5 * (vertices[f[1]] - vertices[f[0]]).cross(&(vertices[f[2]] - vertices[f[0]])).norm();
        let entry = area.entry(root).or_insert_with(|| {
            order.push(root);
            0.0
        });
        *entry += a;
    }
    // First component in face order wins ties.
    let mut best = order[0];
    for &r in &order[1..] {
        if area[&r] > area[&best] {
            best = r;
        }
    }
    (0..faces.len()).filter(|&f| uf.find(faces[f][0]) == best).collect()
}
