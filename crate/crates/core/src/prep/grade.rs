//! Curvature-adaptive isotropic remeshing.
//!
//! Each iteration splits long edges, collapses short ones, flips edges toward
//! valence 6 and applies tangential smoothing followed by projection back onto
//! the input surface. Target lengths come from a sizing field defined on the
//! input mesh.

use std::collections::{HashMap, HashSet};

use super::{estimate_curvature, GradingParams};
use crate::bvh::TriangleBvh;
use crate::error::{MeshError, Result};
use crate::mesh::{Region, TriangleMesh, Vec3};
use crate::validate::validate;

const SPLIT_RATIO: f64 = 4.0 / 3.0;
const COLLAPSE_RATIO: f64 = 4.0 / 5.0;
const MAX_SPLIT_PASSES: usize = 12;
const MAX_COLLAPSE_PASSES: usize = 12;

/// Target edge length per point, interpolated from per-vertex values of the
/// reference mesh at the closest surface point.
#[derive(Debug, Clone)]
pub struct SizingField {
    reference: TriangleMesh,
    bvh: TriangleBvh,
    target: Vec<f64>,
}

impl SizingField {
    pub fn from_curvature(reference: &TriangleMesh, params: &GradingParams) -> Self {
        let kappa = estimate_curvature(reference);
        let target = kappa.iter().map(|&k| params.target_length(k)).collect();
        Self {
            reference: reference.clone(),
            bvh: TriangleBvh::build(reference),
            target,
        }
    }

    pub fn vertex_targets(&self) -> &[f64] {
        &self.target
    }

    /// Target length and closest reference point.
    pub fn query(&self, p: &Vec3) -> (f64, Vec3) {
        let hit = self.bvh.closest_point(p).expect("reference has faces");
        let f = self.reference.faces[hit.face];
        let w = hit.barycentric;
        let h = self.target[f[0]] * w[0] + self.target[f[1]] * w[1] + self.target[f[2]] * w[2];
        (h, hit.point)
    }
}

/// Fraction of edges whose length lies in `[4/5 h̄, 4/3 h̄]`, with `h̄` the mean
/// target of the two endpoints.
pub fn edge_conformance(mesh: &TriangleMesh, sizing: &SizingField) -> f64 {
    let h: Vec<f64> = mesh.vertices.iter().map(|v| sizing.query(v).0).collect();
    let edges = mesh.edges();
    if edges.is_empty() {
        return 1.0;
    }
    let ok = edges
        .iter()
        .filter(|&&[a, b]| {
            let hb = 0.5 * (h[a] + h[b]);
            let len = (mesh.vertices[a] - mesh.vertices[b]).norm();
            // Small relative slack so lengths exactly at a bound count as inside.
            len >= COLLAPSE_RATIO * hb * (1.0 - 1e-9) && len <= SPLIT_RATIO * hb * (1.0 + 1e-9)
        })
        .count();
    ok as f64 / edges.len() as f64
}

struct Work {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    labels: Option<Vec<Region>>,
    h: Vec<f64>,
}

impl Work {
    fn target(&self, a: usize, b: usize) -> f64 {
        0.5 * (self.h[a] + self.h[b])
    }

    fn len(&self, a: usize, b: usize) -> f64 {
        (self.vertices[a] - self.vertices[b]).norm()
    }

    fn into_mesh(self) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices,
            faces: self.faces,
            labels: self.labels,
        }
    }
}

/// Remeshes a watertight manifold mesh against the curvature sizing field.
pub fn grade(mesh: &TriangleMesh, params: &GradingParams) -> Result<TriangleMesh> {
    params.check()?;
    let report = validate(mesh);
    if !(report.is_watertight && report.is_manifold) {
        return Err(MeshError::NotWatertight(format!(
            "grading needs a watertight manifold ({} boundary, {} non-manifold edges)",
            report.boundary_edge_count, report.non_manifold_edge_count
        )));
    }
    let sizing = SizingField::from_curvature(mesh, params);
    let mut w = Work {
        vertices: mesh.vertices.clone(),
        faces: mesh.faces.clone(),
        labels: mesh.labels.clone(),
        h: sizing.vertex_targets().to_vec(),
    };
    for it in 0..params.iterations {
        let splits = split_long_edges(&mut w, &sizing);
        let collapses = collapse_short_edges(&mut w, &sizing);
        let flips = flip_edges(&mut w);
        smooth_and_project(&mut w, &sizing, params.smoothing_lambda);
        log::debug!(
            "grade iteration {}: {splits} splits, {collapses} collapses, {flips} flips, {} faces",
            it + 1,
            w.faces.len()
        );
    }
    let out = w.into_mesh();
    let after = validate(&out);
    if after.genus != report.genus || !after.is_watertight {
        return Err(MeshError::NotWatertight(format!(
            "grading changed topology: genus {:?} -> {:?}",
            report.genus, after.genus
        )));
    }
    Ok(out)
}

/// Red-green refinement of every edge longer than `4/3 h̄`, repeated until none remain.
fn split_long_edges(w: &mut Work, sizing: &SizingField) -> usize {
    let mut total = 0;
    for _ in 0..MAX_SPLIT_PASSES {
        let mut marked: HashSet<(usize, usize)> = HashSet::new();
        for f in &w.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if w.len(a, b) > SPLIT_RATIO * w.target(a, b) {
                    marked.insert((a.min(b), a.max(b)));
                }
            }
        }
        if marked.is_empty() {
            break;
        }
        // Closure: faces with two marked edges get the third as well.
        loop {
            let mut added = false;
            for f in &w.faces {
                let keys = [0, 1, 2].map(|k| {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    (a.min(b), a.max(b))
                });
                let count = keys.iter().filter(|k| marked.contains(k)).count();
                if count == 2 {
                    for k in keys {
                        added |= marked.insert(k);
                    }
                }
            }
            if !added {
                break;
            }
        }
        let mut sorted: Vec<(usize, usize)> = marked.into_iter().collect();
        sorted.sort_unstable();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(sorted.len());
        for &(a, b) in &sorted {
            let p = (w.vertices[a] + w.vertices[b]) * 0.5;
            let (h, _) = sizing.query(&p);
            w.vertices.push(p);
            w.h.push(h);
            mid.insert((a, b), w.vertices.len() - 1);
        }
        total += sorted.len();
        let get = |a: usize, b: usize| mid.get(&(a.min(b), a.max(b))).copied();
        let mut faces = Vec::with_capacity(w.faces.len() * 2);
        let mut labels = w.labels.as_ref().map(|_| Vec::with_capacity(w.faces.len() * 2));
        for (fi, &[a, b, c]) in w.faces.iter().enumerate() {
            let m = [get(a, b), get(b, c), get(c, a)];
            let children: Vec<[usize; 3]> = match m {
                [None, None, None] => vec![[a, b, c]],
                [Some(ab), Some(bc), Some(ca)] => {
                    vec![[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
                }
                [Some(ab), None, None] => vec![[a, ab, c], [ab, b, c]],
                [None, Some(bc), None] => vec![[b, bc, a], [bc, c, a]],
                [None, None, Some(ca)] => vec![[c, ca, b], [ca, a, b]],
                _ => unreachable!("closure leaves no face with two split edges"),
            };
            if let (Some(out), Some(src)) = (labels.as_mut(), w.labels.as_ref()) {
                out.extend(std::iter::repeat(src[fi]).take(children.len()));
            }
            faces.extend(children);
        }
        w.faces = faces;
        w.labels = labels;
    }
    total
}

fn build_vertex_faces(w: &Work) -> Vec<Vec<usize>> {
    let mut vf = vec![Vec::new(); w.vertices.len()];
    for (fi, f) in w.faces.iter().enumerate() {
        for &v in f {
            vf[v].push(fi);
        }
    }
    vf
}

fn face_normal_of(vertices: &[Vec3], f: &[usize; 3]) -> Vec3 {
    (vertices[f[1]] - vertices[f[0]]).cross(&(vertices[f[2]] - vertices[f[0]]))
}

/// Collapses edges shorter than `4/5 h̄` into their midpoint when the link
/// condition holds and no incident face flips or grows an edge beyond `4/3 h̄`.
fn collapse_short_edges(w: &mut Work, sizing: &SizingField) -> usize {
    let mut total = 0;
    for _ in 0..MAX_COLLAPSE_PASSES {
        let mut vf = build_vertex_faces(w);
        let mut alive_face = vec![true; w.faces.len()];
        let mut locked = vec![false; w.vertices.len()];
        let mut candidates: Vec<(f64, usize, usize)> = w
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
            .filter(|&(a, b)| a < b)
            .filter(|&(a, b)| w.len(a, b) < COLLAPSE_RATIO * w.target(a, b))
            .map(|(a, b)| (w.len(a, b), a, b))
            .collect();
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        candidates.dedup_by(|x, y| x.1 == y.1 && x.2 == y.2);
        let mut done = 0;
        let live_vertex_count = |vf: &Vec<Vec<usize>>| vf.iter().filter(|l| !l.is_empty()).count();
        let mut remaining_vertices = live_vertex_count(&vf);

        for (_, a, b) in candidates {
            if locked[a] || locked[b] || remaining_vertices <= 4 {
                continue;
            }
            let shared: Vec<usize> = vf[a].iter().copied().filter(|f| vf[b].contains(f)).collect();
            if shared.len() != 2 {
                continue;
            }
            // Link condition: common neighbors are exactly the two opposite vertices.
            let neighbors = |v: usize, vf: &Vec<Vec<usize>>| -> HashSet<usize> {
                vf[v].iter().flat_map(|&f| w.faces[f]).filter(|&x| x != v).collect()
            };
            let na = neighbors(a, &vf);
            let nb = neighbors(b, &vf);
            let common = na.intersection(&nb).count();
            if common != 2 {
                continue;
            }
            let p = (w.vertices[a] + w.vertices[b]) * 0.5;
            let (h_new, _) = sizing.query(&p);
            let mut ok = true;
            for &f in vf[a].iter().chain(vf[b].iter()) {
                if shared.contains(&f) {
                    continue;
                }
                let old = w.faces[f];
                let mut new = old;
                for v in new.iter_mut() {
                    if *v == a || *v == b {
                        *v = usize::MAX;
                    }
                }
                let mut pos = [Vec3::zeros(); 3];
                for k in 0..3 {
                    pos[k] = if new[k] == usize::MAX { p } else { w.vertices[new[k]] };
                }
                let n_old = face_normal_of(&w.vertices, &old);
                let n_new = (pos[1] - pos[0]).cross(&(pos[2] - pos[0]));
                if n_new.norm() <= 1e-12 * n_old.norm() || n_old.dot(&n_new) <= 0.5 * n_old.norm() * n_new.norm() {
                    ok = false;
                    break;
                }
                for k in 0..3 {
                    if new[k] != usize::MAX {
                        let hb = 0.5 * (h_new + w.h[new[k]]);
                        if (pos[k] - p).norm() > SPLIT_RATIO * hb {
                            ok = false;
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            // Apply: b merges into a.
            for &f in &shared {
                alive_face[f] = false;
            }
            let b_faces = std::mem::take(&mut vf[b]);
            for f in b_faces {
                if !alive_face[f] {
                    continue;
                }
                for v in w.faces[f].iter_mut() {
                    if *v == b {
                        *v = a;
                    }
                }
                vf[a].push(f);
            }
            vf[a].retain(|&f| alive_face[f]);
            for &s in &shared {
                for &v in &w.faces[s] {
                    vf[v].retain(|&f| f != s);
                }
            }
            w.vertices[a] = p;
            w.h[a] = h_new;
            locked[a] = true;
            locked[b] = true;
            for x in na.iter().chain(nb.iter()) {
                locked[*x] = true;
            }
            remaining_vertices -= 1;
            done += 1;
        }
        if done == 0 {
            break;
        }
        total += done;
        let faces: Vec<[usize; 3]> = (0..w.faces.len()).filter(|&f| alive_face[f]).map(|f| w.faces[f]).collect();
        let labels = w
            .labels
            .as_ref()
            .map(|l| (0..l.len()).filter(|&f| alive_face[f]).map(|f| l[f]).collect());
        let compact = TriangleMesh {
            vertices: std::mem::take(&mut w.vertices),
            faces,
            labels,
        };
        let mut remap_h = vec![0.0; 0];
        {
            // Carry per-vertex targets through the compaction.
            let mut seen = vec![false; compact.vertices.len()];
            for f in &compact.faces {
                for &v in f {
                    if !seen[v] {
                        seen[v] = true;
                        remap_h.push(w.h[v]);
                    }
                }
            }
        }
        let compact = compact.without_unreferenced_vertices();
        w.vertices = compact.vertices;
        w.faces = compact.faces;
        w.labels = compact.labels;
        w.h = remap_h;
    }
    total
}

/// Flips interior edges when it reduces the total valence deviation from 6.
fn flip_edges(w: &mut Work) -> usize {
    let mut valence = vec![0i64; w.vertices.len()];
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(w.faces.len() * 3);
    for (fi, f) in w.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            directed.insert((a, b), fi);
            if a < b {
                valence[a] += 1;
                valence[b] += 1;
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = directed.keys().copied().filter(|&(a, b)| a < b).collect();
    edges.sort_unstable();
    let opposite = |f: &[usize; 3], a: usize, b: usize| -> usize {
        *f.iter().find(|&&v| v != a && v != b).expect("triangle")
    };
    let mut flips = 0;
    for (a, b) in edges {
        let (Some(&f1), Some(&f2)) = (directed.get(&(a, b)), directed.get(&(b, a))) else {
            continue;
        };
        let c = opposite(&w.faces[f1], a, b);
        let d = opposite(&w.faces[f2], a, b);
        if c == d || directed.contains_key(&(c, d)) || directed.contains_key(&(d, c)) {
            continue;
        }
        if valence[a] <= 3 || valence[b] <= 3 {
            continue;
        }
        let dev = |v: i64| (v - 6).abs();
        let before = dev(valence[a]) + dev(valence[b]) + dev(valence[c]) + dev(valence[d]);
        let after = dev(valence[a] - 1) + dev(valence[b] - 1) + dev(valence[c] + 1) + dev(valence[d] + 1);
        if after >= before {
            continue;
        }
        // f1 = (a, b, c), f2 = (b, a, d)  ->  (a, d, c), (d, b, c).
        let n_old = face_normal_of(&w.vertices, &[a, b, c]) + face_normal_of(&w.vertices, &[b, a, d]);
        let g1 = [a, d, c];
        let g2 = [d, b, c];
        let n1 = face_normal_of(&w.vertices, &g1);
        let n2 = face_normal_of(&w.vertices, &g2);
        let cos_ok = |n: &Vec3| n.dot(&n_old) > 0.5 * n.norm() * n_old.norm();
        if !(cos_ok(&n1) && cos_ok(&n2)) || n1.dot(&n2) <= 0.0 {
            continue;
        }
        for (f, g) in [(f1, g1), (f2, g2)] {
            let old = w.faces[f];
            for k in 0..3 {
                directed.remove(&(old[k], old[(k + 1) % 3]));
            }
            w.faces[f] = g;
        }
        for (f, g) in [(f1, g1), (f2, g2)] {
            for k in 0..3 {
                directed.insert((g[k], g[(k + 1) % 3]), f);
            }
        }
        valence[a] -= 1;
        valence[b] -= 1;
        valence[c] += 1;
        valence[d] += 1;
        flips += 1;
    }
    flips
}

/// Area-weighted tangential relaxation, then projection onto the reference.
fn smooth_and_project(w: &mut Work, sizing: &SizingField, lambda: f64) {
    let n = w.vertices.len();
    let mut centroid = vec![Vec3::zeros(); n];
    let mut weight = vec![0.0; n];
    let mut normal = vec![Vec3::zeros(); n];
    for f in &w.faces {
        let p = [w.vertices[f[0]], w.vertices[f[1]], w.vertices[f[2]]];
        let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let area = 0.5 * cross.norm();
        let c = (p[0] + p[1] + p[2]) / 3.0;
        for &v in f {
            centroid[v] += c * area;
            weight[v] += area;
            normal[v] += cross;
        }
    }
    let moved: Vec<Vec3> = (0..n)
        .map(|v| {
            if weight[v] <= 0.0 {
                return w.vertices[v];
            }
            let nv = normal[v].normalize();
            let mut d = centroid[v] / weight[v] - w.vertices[v];
            d -= nv * nv.dot(&d);
            w.vertices[v] + d * lambda
        })
        .collect();
    for (v, p) in moved.iter().enumerate() {
        let (h, q) = sizing.query(p);
        w.vertices[v] = q;
        w.h[v] = h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn params(alpha: f64, h_min: f64, h_max: f64) -> GradingParams {
        GradingParams {
            alpha,
            h_min,
            h_max,
            iterations: 8,
            smoothing_lambda: 0.5,
            kappa_floor: 1e-3,
        }
    }

    #[test]
    fn sphere_grades_to_uniform_length() {
        let m = shapes::icosphere(2, 1.0);
        let p = params(0.15, 0.01, 1.0);
        let out = grade(&m, &p).unwrap();
        assert!(validate(&out).is_closed_sphere());
        let sizing = SizingField::from_curvature(&m, &p);
        let c = edge_conformance(&out, &sizing);
        assert!(c >= 0.9, "conformance {c}");
        let mean = out.mean_edge_length();
        assert!((mean - 0.15).abs() < 0.15 * 0.2, "mean {mean}");
    }

    #[test]
    fn rejects_open_mesh() {
        let m = shapes::grid_plane(4, 1.0);
        assert!(matches!(grade(&m, &GradingParams::default()), Err(MeshError::NotWatertight(_))));
    }
}
