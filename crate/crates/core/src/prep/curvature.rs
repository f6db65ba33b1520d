//! Discrete mean curvature from the cotangent Laplacian.

use std::collections::{HashMap, VecDeque};

use crate::mesh::{TriangleMesh, Vec3};

fn cot(u: &Vec3, v: &Vec3) -> f64 {
    let s = u.cross(v).norm();
    if s == 0.0 {
        0.0
    } else {
        u.dot(v) / s
    }
}

/// Mixed Voronoi area of each vertex (obtuse triangles split by halves and quarters).
pub(crate) fn mixed_areas(mesh: &TriangleMesh) -> Vec<f64> {
    let mut area = vec![0.0; mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        let a_face = mesh.face_area(fi);
        let p = [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]];
        let obtuse = (0..3).find(|&k| {
            let e1 = p[(k + 1) % 3] - p[k];
            let e2 = p[(k + 2) % 3] - p[k];
            e1.dot(&e2) < 0.0
        });
        match obtuse {
            None => {
                for k in 0..3 {
                    let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
                    // Edge i-j is opposite corner l, edge i-l opposite corner j.
                    let cot_l = cot(&(p[i] - p[l]), &(p[j] - p[l]));
                    let cot_j = cot(&(p[i] - p[j]), &(p[l] - p[j]));
                    area[f[i]] += ((p[j] - p[i]).norm_squared() * cot_l
                        + (p[l] - p[i]).norm_squared() * cot_j)
                        / 8.0;
                }
            }
            Some(o) => {
                for k in 0..3 {
                    area[f[k]] += if k == o { a_face / 2.0 } else { a_face / 4.0 };
                }
            }
        }
    }
    area
}

/// Absolute mean curvature `|κ|` per vertex in 1/m.
///
/// `|κ(v)| = ‖Σ_j (cot α + cot β)(x_j − x_v)‖ / (4 A_mixed)`. Boundary vertices
/// copy the value of the nearest interior vertex (in edge hops).
pub fn estimate_curvature(mesh: &TriangleMesh) -> Vec<f64> {
    let n = mesh.vertices.len();
    let mut lap = vec![Vec3::zeros(); n];
    let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
    for f in &mesh.faces {
        let p = [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]];
        for k in 0..3 {
            let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
            let w = cot(&(p[i] - p[l]), &(p[j] - p[l]));
            lap[f[i]] += (p[j] - p[i]) * w;
            lap[f[j]] += (p[i] - p[j]) * w;
            let (a, b) = (f[i].min(f[j]), f[i].max(f[j]));
            *edge_count.entry((a, b)).or_insert(0) += 1;
        }
    }
    let mut boundary = vec![false; n];
    for (&(a, b), &c) in &edge_count {
        if c == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
    }
    let areas = mixed_areas(mesh);
    let mut kappa = vec![0.0; n];
    let mut degenerate = 0usize;
    for v in 0..n {
        if areas[v] > 0.0 {
            kappa[v] = lap[v].norm() / (4.0 * areas[v]);
        } else {
            degenerate += 1;
        }
    }
    if degenerate > 0 {
        log::warn!("curvature: {degenerate} vertices with zero mixed area set to 0");
    }

    if boundary.iter().any(|&b| b) {
        let neighbors = mesh.vertex_neighbors();
        let mut source: Vec<Option<usize>> = (0..n).map(|v| (!boundary[v]).then_some(v)).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| !boundary[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &w in &neighbors[v] {
                if source[w].is_none() {
                    source[w] = source[v];
                    queue.push_back(w);
                }
            }
        }
        for v in 0..n {
            if boundary[v] {
                kappa[v] = source[v].map_or(0.0, |s| kappa[s]);
            }
        }
    }
    kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn sphere_mean_curvature() {
        for r in [1.0, 2.0] {
            let m = shapes::icosphere(3, r);
            let k = estimate_curvature(&m);
            for (v, kv) in k.iter().enumerate() {
                assert!((kv * r - 1.0).abs() < 0.05, "vertex {v}: {kv}");
            }
        }
    }

    #[test]
    fn flat_grid_is_zero() {
        let m = shapes::grid_plane(6, 1.0);
        let k = estimate_curvature(&m);
        for kv in k {
            assert!(kv.abs() < 1e-6);
        }
    }

    #[test]
    fn mixed_areas_sum_to_surface_area() {
        let m = shapes::ellipsoid(2, Vec3::new(1.0, 0.5, 0.3));
        let total: f64 = mixed_areas(&m).iter().sum();
        assert!((total - m.surface_area()).abs() < 1e-12 * m.surface_area().max(1.0) * 10.0);
    }
}
