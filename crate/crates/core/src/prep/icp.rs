//! Point-to-surface ICP with a Kabsch best fit per iteration.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::bvh::TriangleBvh;
use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::transform::RigidTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcpStatus {
    Converged,
    MaxIterations,
    /// RMS failed to improve for three consecutive iterations; best-so-far returned.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpResult {
    pub transform: RigidTransform,
    pub rms: f64,
    pub iterations: usize,
    pub status: IcpStatus,
}

/// Matches closest points; returns them with the RMS distance.
fn match_points(points: &[Vec3], target: &TriangleBvh) -> (Vec<Vec3>, f64) {
    let hits: Vec<(Vec3, f64)> = points
        .par_iter()
        .map(|p| {
            let h = target.closest_point(p).expect("target has faces");
            (h.point, h.distance * h.distance)
        })
        .collect();
    // Sequential sum keeps the result independent of the thread count.
    let sum: f64 = hits.iter().map(|h| h.1).sum();
    let rms = (sum / points.len() as f64).sqrt();
    (hits.into_iter().map(|h| h.0).collect(), rms)
}

/// Least-squares rigid transform mapping `src[i]` onto `dst[i]`.
pub(crate) fn kabsch(src: &[Vec3], dst: &[Vec3]) -> RigidTransform {
    let n = src.len() as f64;
    let cs = src.iter().sum::<Vec3>() / n;
    let cd = dst.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s - cs) * (d - cd).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    let v = vt.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    RigidTransform {
        rotation,
        translation: cd - rotation * cs,
    }
}

/// Aligns `source` onto `target`, returning the transform to apply to `source`.
pub fn icp_align(
    source: &TriangleMesh,
    target: &TriangleMesh,
    max_iters: usize,
    convergence_eps: f64,
) -> Result<IcpResult> {
    if source.vertices.is_empty() || target.faces.is_empty() {
        return Err(MeshError::Empty);
    }
    let bvh = TriangleBvh::build(target);
    let mut current = RigidTransform::identity();
    let moved: Vec<Vec3> = source.vertices.clone();
    let (mut matches, mut rms) = match_points(&moved, &bvh);
    let mut best = (current, rms);
    let mut no_improvement = 0;
    let mut status = IcpStatus::MaxIterations;
    let mut iterations = 0;

    for it in 0..max_iters {
        iterations = it + 1;
        if rms == 0.0 {
            status = IcpStatus::Converged;
            break;
        }
        current = kabsch(&source.vertices, &matches);
        let moved: Vec<Vec3> = source.vertices.iter().map(|v| current.apply(v)).collect();
        let (next_matches, next_rms) = match_points(&moved, &bvh);
        let improvement = rms - next_rms;
        matches = next_matches;
        rms = next_rms;
        if rms < best.1 {
            best = (current, rms);
            no_improvement = 0;
        } else {
            no_improvement += 1;
            if no_improvement >= 3 {
                status = IcpStatus::Stalled;
                log::warn!("icp: RMS did not improve for 3 iterations; keeping best {:.3e}", best.1);
                break;
            }
        }
        if improvement >= 0.0 && improvement < convergence_eps {
            status = IcpStatus::Converged;
            break;
        }
    }
    Ok(IcpResult {
        transform: best.0,
        rms: best.1,
        iterations,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use crate::transform::apply_transform;

    #[test]
    fn identical_meshes_give_identity() {
        let m = shapes::ellipsoid(2, Vec3::new(0.1, 0.08, 0.06));
        let r = icp_align(&m, &m, 50, 1e-12).unwrap();
        assert_eq!(r.status, IcpStatus::Converged);
        assert!(r.rms < 1e-9);
        assert!((r.transform.rotation - Matrix3::identity()).amax() < 1e-9);
        assert!(r.transform.translation.norm() < 1e-9);
    }

    #[test]
    fn kabsch_recovers_exact_transform() {
        let m = shapes::ellipsoid(1, Vec3::new(1.0, 0.7, 0.4));
        let t = RigidTransform::from_axis_angle(Vec3::new(0.3, 1.0, 0.2), 0.4, Vec3::new(0.1, -0.2, 0.3));
        let dst: Vec<Vec3> = m.vertices.iter().map(|v| t.apply(v)).collect();
        let fit = kabsch(&m.vertices, &dst);
        assert!((fit.rotation - t.rotation).amax() < 1e-12);
        assert!((fit.translation - t.translation).norm() < 1e-12);
    }

    #[test]
    fn recovers_small_rigid_motion() {
        let target = shapes::ellipsoid(3, Vec3::new(0.1, 0.075, 0.06));
        let t = RigidTransform::from_axis_angle(Vec3::new(0.2, 0.3, 1.0), 5f64.to_radians(), Vec3::new(0.01, 0.0, 0.0));
        let source = apply_transform(&target, &t).unwrap();
        let r = icp_align(&source, &target, 300, 1e-14).unwrap();
        assert!(r.rms < 1e-6, "rms {} after {} ({:?})", r.rms, r.iterations, r.status);
        let recovered = r.transform.compose(&t);
        assert!((recovered.rotation - Matrix3::identity()).amax() < 1e-4);
    }
}
