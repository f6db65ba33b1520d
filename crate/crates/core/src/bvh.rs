//! Axis-aligned bounding-volume hierarchy for exact closest-point queries.

use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};

const LEAF_SIZE: usize = 4;

/// Distances closer than this are ties, resolved toward the lower face index.
pub const TIE_TOL: f64 = 1e-13;

/// Closest point on a triangle and its barycentric weights for `(a, b, c)`.
///
/// Region classification follows the Voronoi-region walk; degenerate
/// triangles fall back to the closest point on their three edges.
pub fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let n2 = ab.cross(&ac).norm_squared();
    if !(n2 > 1e-30 * ab.norm_squared() * ac.norm_squared()) || n2 == 0.0 {
        return closest_on_edges(p, a, b, c);
    }
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

fn closest_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> (Vec3, f64) {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * t, t)
}

fn closest_on_edges(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let (q0, t0) = closest_on_segment(p, a, b);
    let (q1, t1) = closest_on_segment(p, b, c);
    let (q2, t2) = closest_on_segment(p, c, a);
    let cands = [
        (q0, [1.0 - t0, t0, 0.0]),
        (q1, [0.0, 1.0 - t1, t1]),
        (q2, [t2, 0.0, 1.0 - t2]),
    ];
    let mut best = cands[0];
    for cand in &cands[1..] {
        if (cand.0 - p).norm_squared() < (best.0 - p).norm_squared() {
            best = *cand;
        }
    }
    best
}

/// Closest point on triangle `(a, b, c)` to `p` and the Euclidean distance.
pub fn point_to_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Result<(Vec3, f64)> {
    let n = (b - a).cross(&(c - a)).norm();
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if !(n > 1e-14 * scale * scale) {
        return Err(MeshError::DegenerateTriangle);
    }
    let (q, _) = closest_on_triangle(&p, &a, &b, &c);
    Ok((q, (p - q).norm()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestHit {
    pub face: usize,
    pub point: Vec3,
    pub distance: f64,
    pub barycentric: [f64; 3],
}

#[derive(Debug, Clone)]
struct Node {
    min: Vec3,
    max: Vec3,
    /// Leaf: `count > 0` faces starting at `start` in `order`.
    /// Interior: `count == 0`, children at `left` and `right`.
    start: usize,
    count: usize,
    left: usize,
    right: usize,
}

/// Bounding-volume hierarchy over the faces of one mesh.
///
/// Holds its own copy of the triangles, so queries do not need the mesh.
#[derive(Debug, Clone)]
pub struct TriangleBvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    triangles: Vec<[Vec3; 3]>,
}

fn box_distance2(p: &Vec3, min: &Vec3, max: &Vec3) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let v = if p[k] < min[k] {
            min[k] - p[k]
        } else if p[k] > max[k] {
            p[k] - max[k]
        } else {
            0.0
        };
        d2 += v * v;
    }
    d2
}

impl TriangleBvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        if !triangles.is_empty() {
            build_node(&mut nodes, &mut order, 0, triangles.len(), &triangles, &centroids);
        }
        Self {
            nodes,
            order,
            triangles,
        }
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, face: usize) -> &[Vec3; 3] {
        &self.triangles[face]
    }

    /// Exact closest point over all faces. Among faces within [`TIE_TOL`] of
    /// the minimum distance the lowest index wins.
    pub fn closest_point(&self, p: &Vec3) -> Option<ClosestHit> {
        self.closest_point_filtered(p, |_| true)
    }

    /// Closest point restricted to faces accepted by `accept`.
    pub fn closest_point_filtered(
        &self,
        p: &Vec3,
        accept: impl Fn(usize) -> bool,
    ) -> Option<ClosestHit> {
        if self.nodes.is_empty() {
            return None;
        }
        // (distance, face, point, barycentric)
        let mut best: Option<(f64, usize, Vec3, [f64; 3])> = None;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let bound = box_distance2(p, &node.min, &node.max).sqrt();
            if let Some((bd, ..)) = best {
                if bound > bd + TIE_TOL {
                    continue;
                }
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    if !accept(f) {
                        continue;
                    }
                    let [a, b, c] = &self.triangles[f];
                    let (q, bary) = closest_on_triangle(p, a, b, c);
                    let d = (p - q).norm();
                    let better = match best {
                        None => true,
                        Some((bd, bf, ..)) => d < bd - TIE_TOL || (d <= bd + TIE_TOL && f < bf),
                    };
                    if better {
                        best = Some((d, f, q, bary));
                    }
                }
            } else {
                let l = &self.nodes[node.left];
                let r = &self.nodes[node.right];
                let dl = box_distance2(p, &l.min, &l.max);
                let dr = box_distance2(p, &r.min, &r.max);
                // Push the farther child first so the nearer one is visited next.
                if dl <= dr {
                    stack.push(node.right);
                    stack.push(node.left);
                } else {
                    stack.push(node.left);
                    stack.push(node.right);
                }
            }
        }
        best.map(|(distance, face, point, barycentric)| ClosestHit {
            face,
            point,
            distance,
            barycentric,
        })
    }

    /// Distance from `p` to the surface (infinite for an empty hierarchy).
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest_point(p).map_or(f64::INFINITY, |h| h.distance)
    }

    /// Checks structural invariants: every face referenced once, parent
    /// boxes contain child boxes.
    pub fn check_invariants(&self) -> bool {
        let mut seen = vec![0u32; self.triangles.len()];
        for &f in &self.order {
            seen[f] += 1;
        }
        if seen.iter().any(|&c| c != 1) {
            return false;
        }
        let contains = |outer: &Node, inner: &Node| {
            (0..3).all(|k| outer.min[k] <= inner.min[k] && outer.max[k] >= inner.max[k])
        };
        self.nodes.iter().all(|n| {
            if n.count > 0 {
                self.order[n.start..n.start + n.count].iter().all(|&f| {
                    self.triangles[f]
                        .iter()
                        .all(|v| (0..3).all(|k| n.min[k] <= v[k] && v[k] <= n.max[k]))
                })
            } else {
                contains(n, &self.nodes[n.left]) && contains(n, &self.nodes[n.right])
            }
        })
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    triangles: &[[Vec3; 3]],
    centroids: &[Vec3],
) -> usize {
    let mut min = Vec3::repeat(f64::INFINITY);
    let mut max = Vec3::repeat(f64::NEG_INFINITY);
    let mut cmin = Vec3::repeat(f64::INFINITY);
    let mut cmax = Vec3::repeat(f64::NEG_INFINITY);
    for &f in &order[start..end] {
        for v in &triangles[f] {
            min = min.inf(v);
            max = max.sup(v);
        }
        cmin = cmin.inf(&centroids[f]);
        cmax = cmax.sup(&centroids[f]);
    }
    let index = nodes.len();
    nodes.push(Node {
        min,
        max,
        start,
        count: end - start,
        left: 0,
        right: 0,
    });
    if end - start <= LEAF_SIZE {
        return index;
    }
    let extent = cmax - cmin;
    let axis = extent.imax();
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    let left = build_node(nodes, order, start, mid, triangles, centroids);
    let right = build_node(nodes, order, mid, end, triangles, centroids);
    let node = &mut nodes[index];
    node.count = 0;
    node.left = left;
    node.right = right;
    index
}
