//! Unit quaternions `Q = [q0, qv] ∈ S³` and their map onto SO(3).

use std::ops::{Mul, Neg};

use crate::error::{Error, Result};
use crate::so3::{hat, Mat3, RotationMatrix, Vec3, SMALL_ANGLE};

/// Norm deviation accepted by [`UnitQuaternion::new`].
pub const QUAT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub q0: f64,
    pub qv: Vec3,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        UnitQuaternion { q0: 1.0, qv: Vec3::zeros() }
    }

    /// Rejects `|‖Q‖ − 1| > QUAT_NORM_TOL`; the stored value is not renormalized.
    pub fn new(q0: f64, qv: Vec3) -> Result<Self> {
        let norm = (q0 * q0 + qv.norm_squared()).sqrt();
        if !((norm - 1.0).abs() <= QUAT_NORM_TOL) {
            return Err(Error::NotUnitQuaternion(norm));
        }
        Ok(UnitQuaternion { q0, qv })
    }

    pub fn norm(&self) -> f64 {
        (self.q0 * self.q0 + self.qv.norm_squared()).sqrt()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q0, self.qv.x, self.qv.y, self.qv.z]
    }

    /// `[cos‖v‖, sin‖v‖ v/‖v‖]`.
    pub fn exp(v: &Vec3) -> Self {
        let theta = v.norm();
        if theta < SMALL_ANGLE {
            // Second-order expansion keeps the norm at 1 + O(θ⁴).
            let q0 = 1.0 - 0.5 * theta * theta;
            return UnitQuaternion { q0, qv: v * (1.0 - theta * theta / 6.0) };
        }
        let (s, c) = theta.sin_cos();
        UnitQuaternion { q0: c, qv: v * (s / theta) }
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    /// Hamilton product, so that `R(Q₁ ⊗ Q₂) = R(Q₁) R(Q₂)`.
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion {
            q0: self.q0 * rhs.q0 - self.qv.dot(&rhs.qv),
            qv: rhs.qv * self.q0 + self.qv * rhs.q0 + self.qv.cross(&rhs.qv),
        }
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;

    fn neg(self) -> UnitQuaternion {
        UnitQuaternion { q0: -self.q0, qv: -self.qv }
    }
}

/// `(q0² − ‖q‖²) I₃ + 2 q qᵀ + 2 q0 [q]×`.
pub fn rot_from_quat(q: &UnitQuaternion) -> Result<RotationMatrix> {
    let norm = q.norm();
    if !((norm - 1.0).abs() <= QUAT_NORM_TOL) {
        return Err(Error::NotUnitQuaternion(norm));
    }
    Ok(RotationMatrix::new_unchecked(rot_from_quat_raw(q)))
}

fn rot_from_quat_raw(q: &UnitQuaternion) -> Mat3 {
    Mat3::identity() * (q.q0 * q.q0 - q.qv.norm_squared()) + q.qv * q.qv.transpose() * 2.0 + hat(&q.qv) * (2.0 * q.q0)
}

/// Inverse of [`rot_from_quat`], canonicalized to `q0 ≥ 0`.
///
/// Uses the largest-diagonal pivot so the extraction stays well conditioned
/// near π rotations.
pub fn quat_from_rot(r: &RotationMatrix) -> UnitQuaternion {
    let m = r.matrix();
    let trace = m.trace();
    let (q0, x, y, z);
    if trace > m[(0, 0)] && trace > m[(1, 1)] && trace > m[(2, 2)] {
        let s = (1.0 + trace).sqrt() * 2.0;
        q0 = 0.25 * s;
        x = (m[(2, 1)] - m[(1, 2)]) / s;
        y = (m[(0, 2)] - m[(2, 0)]) / s;
        z = (m[(1, 0)] - m[(0, 1)]) / s;
    } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        q0 = (m[(2, 1)] - m[(1, 2)]) / s;
        x = 0.25 * s;
        y = (m[(0, 1)] + m[(1, 0)]) / s;
        z = (m[(0, 2)] + m[(2, 0)]) / s;
    } else if m[(1, 1)] >= m[(2, 2)] {
        let s = (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        q0 = (m[(0, 2)] - m[(2, 0)]) / s;
        x = (m[(0, 1)] + m[(1, 0)]) / s;
        y = 0.25 * s;
        z = (m[(1, 2)] + m[(2, 1)]) / s;
    } else {
        let s = (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).sqrt() * 2.0;
        q0 = (m[(1, 0)] - m[(0, 1)]) / s;
        x = (m[(0, 2)] + m[(2, 0)]) / s;
        y = (m[(1, 2)] + m[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let n = (q0 * q0 + x * x + y * y + z * z).sqrt();
    let q = UnitQuaternion { q0: q0 / n, qv: Vec3::new(x, y, z) / n };
    if q.q0 < 0.0 {
        -q
    } else {
        q
    }
}

/// Exact solution of `Q̇ = ½ ℋ(h) Q` for a rate `h` held constant over `dt`.
pub fn quat_step(q: &UnitQuaternion, h: &Vec3, dt: f64) -> UnitQuaternion {
    *q * UnitQuaternion::exp(&(h * (0.5 * dt)))
}
