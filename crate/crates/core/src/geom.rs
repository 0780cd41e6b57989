//! Rigid motions of ℝ³.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub type Vec3 = Vector3<f64>;

/// x ↦ rotation·x + translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidMotion {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Checked constructor; the rotation must be orthogonal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if defect > 1e-12 || (rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(GeomError::Domain(format!(
                "rotation is not special orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self { rotation, translation })
    }

    pub fn translation(t: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn rotation_axis_angle(axis: Vec3, angle: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self {
            rotation: *r.matrix(),
            translation: Vec3::zeros(),
        }
    }

    /// Rotation taking the unit vector `from` to the unit vector `to`.
    pub fn rotation_between(from: Vec3, to: Vec3) -> Self {
        let f = from.normalize();
        let t = to.normalize();
        let r = match Rotation3::rotation_between(&f, &t) {
            Some(r) => r,
            None => {
                let helper = if f.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                let axis = f.cross(&helper).normalize();
                Rotation3::from_axis_angle(&Unit::new_normalize(axis), std::f64::consts::PI)
            }
        };
        Self {
            rotation: *r.matrix(),
            translation: Vec3::zeros(),
        }
    }

    /// Local frame whose z-axis is `axis` and whose origin is `origin`.
    pub fn frame(axis: Vec3, origin: Vec3) -> Self {
        let mut m = Self::rotation_between(Vec3::z(), axis);
        m.translation = origin;
        m
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn apply_inverse(&self, x: &Vec3) -> Vec3 {
        self.rotation.transpose() * (x - self.translation)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidMotion) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn then_translate(&self, t: Vec3) -> Self {
        Self {
            rotation: self.rotation,
            translation: self.translation + t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_matches_sequential_application() {
        let a = RigidMotion::rotation_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7).then_translate(Vec3::new(1.0, 0.0, -2.0));
        let b = RigidMotion::rotation_axis_angle(Vec3::new(-1.0, 0.5, 0.0), 1.9).then_translate(Vec3::new(0.3, 4.0, 0.0));
        let x = Vec3::new(0.2, -0.7, 1.1);
        let ab = a.compose(&b);
        assert!((ab.apply(&x) - a.apply(&b.apply(&x))).norm() < 1e-12);
        assert!((ab.inverse().apply(&ab.apply(&x)) - x).norm() < 1e-12);
    }

    #[test]
    fn rotation_between_antiparallel() {
        let m = RigidMotion::rotation_between(Vec3::z(), -Vec3::z());
        assert!((m.apply_vector(&Vec3::z()) + Vec3::z()).norm() < 1e-12);
        assert!(RigidMotion::new(m.rotation, Vec3::zeros()).is_ok());
    }

    #[test]
    fn reflection_rejected() {
        let mut r = Matrix3::identity();
        r[(2, 2)] = -1.0;
        assert!(RigidMotion::new(r, Vec3::zeros()).is_err());
    }
}
