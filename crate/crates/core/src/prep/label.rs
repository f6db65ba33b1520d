//! Ear/skin face labeling from user-supplied markers.

use super::EarMarkers;
use crate::error::{MeshError, Result};
use crate::mesh::{Region, TriangleMesh};

/// Labels faces whose centroid is within `markers.radius` of an ear marker.
/// The nearer marker wins when both are in range; ties go to the left ear.
pub fn label_regions(mesh: &TriangleMesh, markers: &EarMarkers) -> Result<TriangleMesh> {
    markers.check()?;
    let mut labels = Vec::with_capacity(mesh.faces.len());
    let (mut near_left, mut near_right) = (false, false);
    for f in 0..mesh.faces.len() {
        let c = mesh.face_centroid(f);
        let dl = (c - markers.left).norm();
        let dr = (c - markers.right).norm();
        near_left |= dl <= markers.radius;
        near_right |= dr <= markers.radius;
        let label = if dl <= markers.radius && dl <= dr {
            Region::LeftEar
        } else if dr <= markers.radius {
            Region::RightEar
        } else {
            Region::Skin
        };
        labels.push(label);
    }
    if !near_left {
        return Err(MeshError::MarkerMisplaced("left"));
    }
    if !near_right {
        return Err(MeshError::MarkerMisplaced("right"));
    }
    let mut out = mesh.clone();
    out.labels = Some(labels);
    Ok(out)
}
