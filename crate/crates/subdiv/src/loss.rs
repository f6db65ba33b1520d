//! Surface-fit loss: Chamfer mean plus a soft maximum of squared distances.
//!
//! With `d_i` the distance of predicted vertex `i` to its assigned truth face,
//! `N` the vertex count and `T` the temperature:
//!
//! ```text
//! value = w_c · mean(d_i²) + w_h · T · ln(mean(exp(d_i² / T)))
//! ```
//!
//! The soft maximum uses the mean inside the logarithm so that a prediction
//! lying on the truth surface scores exactly zero. Faces are assigned once per
//! evaluation and held fixed when differentiating.

use hrtf_core::{closest_on_triangle, project_point, TargetSurface, TriangleMesh, Vec3};
use rayon::prelude::*;

use crate::config::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// `∂value/∂p_i` for every predicted vertex.
    pub grad: Vec<Vec3>,
}

/// Normal-gated truth face for every predicted vertex (plain closest face when none passes the gate).
pub fn assign_faces(pred: &TriangleMesh, truth: &TargetSurface, max_normal_angle_deg: f64) -> Vec<usize> {
    let normals = pred.vertex_normals();
    pred.vertices
        .par_iter()
        .zip(&normals)
        .map(|(p, n)| project_point(p, n, truth, max_normal_angle_deg).point.face)
        .collect()
}

/// Loss and gradient with a fixed face assignment.
pub fn loss_with_faces(points: &[Vec3], truth: &TriangleMesh, faces: &[usize], cfg: &TrainConfig) -> LossValue {
    assert_eq!(points.len(), faces.len(), "one face per point");
    let n = points.len();
    if n == 0 {
        return LossValue { value: 0.0, grad: Vec::new() };
    }
    let offsets: Vec<Vec3> = points
        .iter()
        .zip(faces)
        .map(|(p, &f)| {
            let [a, b, c] = truth.triangle(f);
            p - closest_on_triangle(p, &a, &b, &c).0
        })
        .collect();
    let sq: Vec<f64> = offsets.iter().map(|o| o.norm_squared()).collect();
    let t = cfg.soft_hausdorff_temperature;
    let nf = n as f64;

    let chamfer = sq.iter().sum::<f64>() / nf;
    let peak = sq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = sq.iter().map(|s| ((s - peak) / t).exp()).collect();
    let z: f64 = weights.iter().sum();
    let soft = peak + t * (z / nf).ln();

    let value = cfg.chamfer_weight * chamfer + cfg.hausdorff_weight * soft;
    let grad = offsets
        .iter()
        .zip(&weights)
        .map(|(o, w)| o * (2.0 * (cfg.chamfer_weight / nf + cfg.hausdorff_weight * w / z)))
        .collect();
    LossValue { value, grad }
}

/// Assigns faces on `pred` and evaluates the loss.
pub fn loss(pred: &TriangleMesh, truth: &TargetSurface, cfg: &TrainConfig) -> LossValue {
    let faces = assign_faces(pred, truth, cfg.max_normal_angle_deg);
    loss_with_faces(&pred.vertices, &truth.mesh, &faces, cfg)
}
