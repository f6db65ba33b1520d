//! Half-flaps: the four-vertex stencil around a directed interior edge.

use hrtf_core::{HalfEdgeMesh, TriangleMesh, Vec3};
use nalgebra::Matrix3;

use crate::error::{Result, SubdivError};
use crate::params::{SubdivNetParams, GEO_DIM};

/// Stencil `[i, j, k, l]` of half-edge `i → j`: `k` is opposite in its own
/// face, `l` opposite in the twin face.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfFlap {
    pub half_edge: usize,
    pub stencil: [usize; 4],
    /// Columns `e1, e2, e3`: `e1` along the edge, `e3` the averaged face
    /// normal made orthogonal to `e1`.
    pub frame: Matrix3<f64>,
    /// Edge length, the scale unit of the flap.
    pub length: f64,
}

impl HalfFlap {
    /// Stencil positions relative to `i`, in the local frame, divided by the edge length.
    pub fn geometry(&self, vertices: &[Vec3]) -> [f64; GEO_DIM] {
        let [i, j, k, l] = self.stencil;
        let origin = vertices[i];
        let mut out = [0.0; GEO_DIM];
        for (slot, v) in [j, k, l].into_iter().enumerate() {
            let local = self.frame.tr_mul(&(vertices[v] - origin)) / self.length;
            out[3 * slot..3 * slot + 3].copy_from_slice(local.as_slice());
        }
        out
    }

    /// Maps a local-frame network output to a world-space displacement.
    pub fn to_world(&self, local: &[f64]) -> Vec3 {
        self.frame * Vec3::new(local[0], local[1], local[2]) * self.length
    }

    /// Adjoint of [`HalfFlap::to_world`].
    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        self.frame.tr_mul(world) * self.length
    }
}

fn unit_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vec3::zeros()
    }
}

/// Any unit vector orthogonal to unit `e`.
fn perpendicular(e: &Vec3) -> Vec3 {
    let axis = if e.x.abs() <= e.y.abs() && e.x.abs() <= e.z.abs() {
        Vec3::x()
    } else if e.y.abs() <= e.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    e.cross(&axis).normalize()
}

/// One flap per half-edge that has a twin, in half-edge order.
///
/// Boundary half-edges are skipped. Fails on a zero-length edge.
pub fn half_flaps(mesh: &TriangleMesh, he: &HalfEdgeMesh) -> Result<Vec<HalfFlap>> {
    let x = &mesh.vertices;
    let mut flaps = Vec::with_capacity(he.len());
    for h in 0..he.len() {
        let Some(t) = he.twin(h) else { continue };
        let (i, j) = (he.origin(h), he.dest(h));
        let (k, l) = (he.opposite(h), he.opposite(t));
        let edge = x[j] - x[i];
        let length = edge.norm();
        if !(length > 0.0 && length.is_finite()) {
            return Err(SubdivError::Topology(format!("zero-length edge ({i}, {j})")));
        }
        let e1 = edge / length;
        let n = unit_normal(&x[i], &x[j], &x[k]) + unit_normal(&x[j], &x[i], &x[l]);
        let ortho = n - e1 * n.dot(&e1);
        let e3 = if ortho.norm() > 1e-12 {
            ortho.normalize()
        } else {
            perpendicular(&e1)
        };
        let e2 = e3.cross(&e1);
        flaps.push(HalfFlap {
            half_edge: h,
            stencil: [i, j, k, l],
            frame: Matrix3::from_columns(&[e1, e2, e3]),
            length,
        });
    }
    Ok(flaps)
}

/// Network input for one flap: geometry followed by the four stencil features.
pub(crate) fn flap_input(geo: &[f64; GEO_DIM], stencil: &[usize; 4], features: &[f64], d: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(GEO_DIM + 4 * d);
    v.extend_from_slice(geo);
    for &s in stencil {
        v.extend_from_slice(&features[s * d..(s + 1) * d]);
    }
    v
}

/// Per-half-flap input vectors `[geometry, F_i, F_j, F_k, F_l]`.
///
/// `level_features` holds `feature_dim` values per vertex, row-major.
pub fn half_flap_features(
    mesh: &TriangleMesh,
    params: &SubdivNetParams,
    level_features: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let d = params.feature_dim;
    if level_features.len() != mesh.vertex_count() * d {
        return Err(SubdivError::DimensionMismatch(format!(
            "{} feature values for {} vertices of width {d}",
            level_features.len(),
            mesh.vertex_count()
        )));
    }
    let he = hrtf_core::build_half_edge(mesh)?;
    let flaps = half_flaps(mesh, &he)?;
    Ok(flaps
        .iter()
        .map(|f| flap_input(&f.geometry(&mesh.vertices), &f.stencil, level_features, d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_core::{build_half_edge, shapes};

    #[test]
    fn frames_are_orthonormal() {
        let m = shapes::ellipsoid(1, Vec3::new(1.0, 0.7, 0.4));
        let he = build_half_edge(&m).unwrap();
        let flaps = half_flaps(&m, &he).unwrap();
        assert_eq!(flaps.len(), 3 * m.face_count());
        for f in &flaps {
            let err = (f.frame.transpose() * f.frame - Matrix3::identity()).abs().max();
            assert!(err < 1e-9);
            assert!((f.frame.determinant() - 1.0).abs() < 1e-9);
            let g = f.geometry(&m.vertices);
            assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12 && g[2].abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_half_edges_are_skipped() {
        let m = shapes::grid_plane(3, 1.0);
        let he = build_half_edge(&m).unwrap();
        let flaps = half_flaps(&m, &he).unwrap();
        assert_eq!(flaps.len(), he.len() - he.boundary_count());
        assert!(flaps.iter().all(|f| he.twin(f.half_edge).is_some()));
    }

    #[test]
    fn local_world_adjoint() {
        let m = shapes::icosahedron();
        let he = build_half_edge(&m).unwrap();
        let f = &half_flaps(&m, &he).unwrap()[5];
        let a = [0.3, -1.2, 0.7];
        let w = Vec3::new(-0.4, 0.9, 2.0);
        let lhs = f.to_world(&a).dot(&w);
        let rhs = Vec3::new(a[0], a[1], a[2]).dot(&f.to_local(&w));
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
