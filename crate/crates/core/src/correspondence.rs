//! Normal-gated closest-point correspondence onto a target surface.
//!
//! A query point with normal `n` maps to the closest target point among faces
//! whose normal lies within a cone around `n`. When no face qualifies the
//! unconstrained closest point is used and the point is marked as a fallback.

use rayon::prelude::*;

use crate::bvh::TriangleBvh;
use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};

pub const DEFAULT_MAX_NORMAL_ANGLE_DEG: f64 = 60.0;

/// Largest fallback fraction accepted by [`build_correspondence`].
pub const MAX_FALLBACK_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub face: usize,
    pub barycentric: [f64; 3],
}

/// Target mesh with its hierarchy, face normals and content identifier.
#[derive(Debug, Clone)]
pub struct TargetSurface {
    pub mesh: TriangleMesh,
    pub bvh: TriangleBvh,
    pub face_normals: Vec<Vec3>,
    pub id: String,
}

impl TargetSurface {
    pub fn new(mesh: TriangleMesh) -> Result<Self> {
        if mesh.faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let bvh = TriangleBvh::build(&mesh);
        let face_normals = (0..mesh.faces.len()).map(|f| mesh.face_normal(f)).collect();
        let id = mesh_id(&mesh);
        Ok(Self {
            mesh,
            bvh,
            face_normals,
            id,
        })
    }
}

/// FNV-1a over vertex bits and face indices, as 16 hex digits.
pub fn mesh_id(mesh: &TriangleMesh) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(mesh.vertices.len() as u64);
    for v in &mesh.vertices {
        for c in v.iter() {
            eat(c.to_bits());
        }
    }
    eat(mesh.faces.len() as u64);
    for f in &mesh.faces {
        for &i in f {
            eat(i as u64);
        }
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: SurfacePoint,
    pub position: Vec3,
    pub distance: f64,
    /// No face passed the normal gate; `point` is the unconstrained closest point.
    pub fallback: bool,
}

/// Projects `p` with unit normal `n` onto the target.
pub fn project_point(p: &Vec3, n: &Vec3, target: &TargetSurface, max_normal_angle_deg: f64) -> Projection {
    let cos_max = max_normal_angle_deg.to_radians().cos();
    let gated = target
        .bvh
        .closest_point_filtered(p, |f| target.face_normals[f].dot(n) >= cos_max);
    let (hit, fallback) = match gated {
        Some(hit) => (hit, false),
        None => (
            target.bvh.closest_point(p).expect("target has faces"),
            true,
        ),
    };
    Projection {
        point: SurfacePoint {
            face: hit.face,
            barycentric: hit.barycentric,
        },
        position: hit.point,
        distance: hit.distance,
        fallback,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap {
    pub target_mesh_id: String,
    /// One entry per accepted query point.
    pub entries: Vec<SurfacePoint>,
    /// Query index of each entry.
    pub query_indices: Vec<usize>,
    /// Query points that failed the normal gate.
    pub rejected: Vec<usize>,
}

impl CorrespondenceMap {
    pub fn query_count(&self) -> usize {
        self.entries.len() + self.rejected.len()
    }

    pub fn fallback_fraction(&self) -> f64 {
        if self.query_count() == 0 {
            0.0
        } else {
            self.rejected.len() as f64 / self.query_count() as f64
        }
    }
}

/// Projects every query vertex along its area-weighted normal.
///
/// Fails when more than half of the vertices fall back, which indicates the
/// meshes are not aligned.
pub fn build_correspondence(
    query: &TriangleMesh,
    target: &TargetSurface,
    max_normal_angle_deg: f64,
) -> Result<CorrespondenceMap> {
    let normals = query.vertex_normals();
    let projections: Vec<Projection> = query
        .vertices
        .par_iter()
        .zip(normals.par_iter())
        .map(|(p, n)| project_point(p, n, target, max_normal_angle_deg))
        .collect();
    let mut map = CorrespondenceMap {
        target_mesh_id: target.id.clone(),
        entries: Vec::new(),
        query_indices: Vec::new(),
        rejected: Vec::new(),
    };
    for (i, pr) in projections.iter().enumerate() {
        if pr.fallback {
            map.rejected.push(i);
        } else {
            map.entries.push(pr.point);
            map.query_indices.push(i);
        }
    }
    let fraction = map.fallback_fraction();
    if fraction > MAX_FALLBACK_FRACTION {
        return Err(MeshError::CorrespondenceFallback { fraction });
    }
    if !map.rejected.is_empty() {
        log::info!(
            "correspondence: {} of {} points fell back ({:.1}%)",
            map.rejected.len(),
            map.query_count(),
            100.0 * fraction
        );
    }
    Ok(map)
}

/// Positions `b0·A + b1·B + b2·C` of every entry.
pub fn resolve(map: &CorrespondenceMap, target: &TargetSurface) -> Result<Vec<Vec3>> {
    if map.target_mesh_id != target.id {
        return Err(MeshError::TargetMismatch {
            expected: map.target_mesh_id.clone(),
            found: target.id.clone(),
        });
    }
    resolve_points(&map.entries, &target.mesh)
}

/// Resolves surface points against a mesh without the identifier check.
pub fn resolve_points(points: &[SurfacePoint], mesh: &TriangleMesh) -> Result<Vec<Vec3>> {
    points
        .iter()
        .enumerate()
        .map(|(entry, sp)| {
            if sp.face >= mesh.faces.len() {
                return Err(MeshError::CorrespondenceFace {
                    entry,
                    face: sp.face,
                    face_count: mesh.faces.len(),
                });
            }
            let [a, b, c] = mesh.triangle(sp.face);
            let w = sp.barycentric;
            Ok(a * w[0] + b * w[1] + c * w[2])
        })
        .collect()
}
