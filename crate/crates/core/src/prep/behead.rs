//! Planar clipping with ear-clipped caps.

use std::collections::HashMap;

use super::CutPlane;
use crate::error::{MeshError, Result};
use crate::mesh::{Region, TriangleMesh, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum BeheadOutcome {
    Clipped(TriangleMesh),
    /// The plane does not intersect the mesh; the input is returned unchanged.
    Untouched(TriangleMesh),
}

impl BeheadOutcome {
    pub fn into_mesh(self) -> TriangleMesh {
        match self {
            BeheadOutcome::Clipped(m) | BeheadOutcome::Untouched(m) => m,
        }
    }
}

/// Keeps the part of `mesh` on the +normal side of `plane` and closes each
/// planar hole with a cap facing `-normal`.
pub fn behead(mesh: &TriangleMesh, plane: &CutPlane) -> Result<BeheadOutcome> {
    plane.check()?;
    if mesh.faces.is_empty() {
        return Err(MeshError::Empty);
    }
    let (lo, hi) = mesh.bounding_box();
    let snap = 1e-9 * (hi - lo).norm().max(f64::MIN_POSITIVE);

    let mut vertices = mesh.vertices.clone();
    let mut s: Vec<f64> = vertices.iter().map(|v| plane.signed_distance(v)).collect();
    for (v, sv) in vertices.iter_mut().zip(s.iter_mut()) {
        if sv.abs() < snap {
            *v -= plane.normal * *sv;
            *sv = 0.0;
        }
    }
    if s.iter().all(|&x| x >= 0.0) || s.iter().all(|&x| x <= 0.0) {
        log::info!("behead: plane does not intersect the mesh; returning input unchanged");
        return Ok(BeheadOutcome::Untouched(mesh.clone()));
    }

    let mut cut_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut labels = Vec::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        let sf = [s[f[0]], s[f[1]], s[f[2]]];
        if sf.iter().all(|&x| x >= 0.0) {
            if sf.iter().any(|&x| x > 0.0) {
                faces.push(*f);
                labels.push(mesh.label(fi));
            }
            continue;
        }
        if sf.iter().all(|&x| x <= 0.0) {
            continue;
        }
        // Sutherland-Hodgman against s >= 0.
        let mut poly = Vec::with_capacity(4);
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let (sa, sb) = (s[a], s[b]);
            if sa >= 0.0 {
                poly.push(a);
            }
            if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
                let key = (a.min(b), a.max(b));
                let idx = *cut_vertex.entry(key).or_insert_with(|| {
                    let (p, q) = (key.0, key.1);
                    let t = s[p] / (s[p] - s[q]);
                    let mut x = vertices[p] + (vertices[q] - vertices[p]) * t;
                    x -= plane.normal * plane.signed_distance(&x);
                    vertices.push(x);
                    vertices.len() - 1
                });
                poly.push(idx);
            }
        }
        for k in 1..poly.len().saturating_sub(1) {
            let tri = [poly[0], poly[k], poly[k + 1]];
            if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                faces.push(tri);
                labels.push(mesh.label(fi));
            }
        }
    }
    s.resize(vertices.len(), 0.0);

    let loops = boundary_loops(&faces)?;
    let (e1, e2) = plane_basis(&plane.normal);
    for lp in &loops {
        // Boundary edges run u -> v on the kept surface; the cap runs v -> u.
        let cap: Vec<usize> = lp.iter().rev().copied().collect();
        if cap.iter().any(|&v| s[v] != 0.0) {
            return Err(MeshError::CapTriangulation(
                "hole boundary does not lie on the cut plane".into(),
            ));
        }
        let pts: Vec<[f64; 2]> = cap
            .iter()
            .map(|&v| {
                let d = vertices[v] - plane.point;
                [d.dot(&e1), d.dot(&e2)]
            })
            .collect();
        for tri in ear_clip(&pts)? {
            faces.push([cap[tri[0]], cap[tri[1]], cap[tri[2]]]);
            labels.push(Some(Region::Skin));
        }
    }

    let out = TriangleMesh {
        vertices,
        faces,
        labels: mesh
            .labels
            .as_ref()
            .map(|_| labels.iter().map(|l| l.unwrap_or(Region::Skin)).collect()),
    };
    Ok(BeheadOutcome::Clipped(out.without_unreferenced_vertices()))
}

/// Basis `(e1, e2)` of the plane with `e1 × e2 = -normal`, so a cap facing
/// `-normal` is counter-clockwise in these coordinates.
fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = normal.cross(&helper).normalize();
    let e2 = (-normal).cross(&e1);
    (e1, e2)
}

/// Closed loops of boundary half-edges, each in mesh traversal order.
fn boundary_loops(faces: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let mut directed = std::collections::HashSet::new();
    for f in faces {
        for k in 0..3 {
            directed.insert((f[k], f[(k + 1) % 3]));
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut starts = Vec::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if !directed.contains(&(b, a)) {
                if next.insert(a, b).is_some() {
                    return Err(MeshError::CapTriangulation(format!(
                        "vertex {a} has two outgoing boundary edges"
                    )));
                }
                starts.push(a);
            }
        }
    }
    let mut loops = Vec::new();
    let mut used = std::collections::HashSet::new();
    for &start in &starts {
        if used.contains(&start) {
            continue;
        }
        let mut lp = vec![start];
        used.insert(start);
        let mut v = next[&start];
        while v != start {
            if !used.insert(v) {
                return Err(MeshError::CapTriangulation("boundary loops are tangled".into()));
            }
            lp.push(v);
            v = *next.get(&v).ok_or_else(|| {
                MeshError::CapTriangulation("open boundary chain".into())
            })?;
        }
        loops.push(lp);
    }
    Ok(loops)
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Triangulates a simple counter-clockwise polygon by ear clipping.
pub(crate) fn ear_clip(pts: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    if n < 3 {
        return Err(MeshError::CapTriangulation(format!("loop of {n} vertices")));
    }
    let area2: f64 = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    if area2 <= 0.0 {
        return Err(MeshError::CapTriangulation(
            "hole loop is clockwise in the cap frame (nested or inverted loop)".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            let convex = cross2(a, b, c);
            if convex <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ip || j == ic || j == inx {
                    return false;
                }
                let p = pts[j];
                cross2(a, b, p) >= 0.0 && cross2(b, c, p) >= 0.0 && cross2(c, a, p) >= 0.0
            });
            if blocked {
                continue;
            }
            // Prefer the ear with the best minimum angle proxy.
            let quality = convex
                / ((b[0] - a[0]).hypot(b[1] - a[1]).max((c[0] - b[0]).hypot(c[1] - b[1]))
                    .max((a[0] - c[0]).hypot(a[1] - c[1])))
                .powi(2);
            if best.map_or(true, |(_, q)| quality > q) {
                best = Some((i, quality));
            }
        }
        let Some((i, _)) = best else {
            return Err(MeshError::CapTriangulation("no ear found".into()));
        };
        let m = idx.len();
        tris.push([idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]]);
        idx.remove(i);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}
