//! Rigid transforms (rotation + translation).

use nalgebra::{Matrix3, Rotation3, Unit};

use crate::error::{MeshError, Result};
use crate::mesh::{TriangleMesh, Vec3};

/// Tolerance on `RᵀR = I` and `det R = 1`.
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Checked constructor.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let t = Self {
            rotation,
            translation,
        };
        t.check()?;
        Ok(t)
    }

    pub fn translation(offset: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: offset,
        }
    }

    /// Rotation by `angle` radians about `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self {
            rotation: *rot.matrix(),
            translation,
        }
    }

    /// Largest deviation from orthonormality or unit determinant.
    pub fn rotation_error(&self) -> f64 {
        let r = &self.rotation;
        let ortho = (r.transpose() * r - Matrix3::identity()).amax();
        let det = (r.determinant() - 1.0).abs();
        if ortho.is_finite() && det.is_finite() {
            ortho.max(det)
        } else {
            f64::INFINITY
        }
    }

    pub fn check(&self) -> Result<()> {
        let err = self.rotation_error();
        if err > ROTATION_TOL || !self.translation.iter().all(|c| c.is_finite()) {
            return Err(MeshError::NotARotation(err));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Rotation angle in radians.
    pub fn angle(&self) -> f64 {
        ((self.rotation.trace() - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
    }
}

/// `v' = R v + t` for every vertex; faces and labels unchanged.
pub fn apply_transform(mesh: &TriangleMesh, t: &RigidTransform) -> Result<TriangleMesh> {
    t.check()?;
    Ok(TriangleMesh {
        vertices: mesh.vertices.iter().map(|v| t.apply(v)).collect(),
        faces: mesh.faces.clone(),
        labels: mesh.labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_is_noop() {
        let m = shapes::icosphere(1, 1.0);
        assert_eq!(apply_transform(&m, &RigidTransform::identity()).unwrap(), m);
    }

    #[test]
    fn translation_shifts_bounding_box() {
        let m = shapes::icosphere(1, 1.0);
        let off = Vec3::new(1.0, 2.0, 3.0);
        let out = apply_transform(&m, &RigidTransform::translation(off)).unwrap();
        let (lo, hi) = m.bounding_box();
        let (lo2, hi2) = out.bounding_box();
        assert!((lo2 - lo - off).norm() < 1e-12);
        assert!((hi2 - hi - off).norm() < 1e-12);
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = RigidTransform::from_axis_angle(Vec3::z(), FRAC_PI_2, Vec3::zeros());
        assert!((t.apply(&Vec3::x()) - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn rejects_scaling_and_reflection() {
        let m = shapes::icosahedron();
        let scale = RigidTransform {
            rotation: Matrix3::identity() * 1.001,
            translation: Vec3::zeros(),
        };
        assert!(matches!(apply_transform(&m, &scale), Err(MeshError::NotARotation(_))));
        let mirror = RigidTransform {
            rotation: Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0)),
            translation: Vec3::zeros(),
        };
        assert!(mirror.check().is_err());
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::from_axis_angle(Vec3::new(1.0, 2.0, -0.5), 0.7, Vec3::new(0.3, -1.0, 2.0));
        let id = t.compose(&t.inverse());
        assert!((id.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }
}
