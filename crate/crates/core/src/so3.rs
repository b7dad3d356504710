//! Small fixed-size algebra on SO(3) and its Lie algebra so(3).
//!
//! Vectors and matrices are plain `nalgebra` 3-vectors and 3×3 matrices; the
//! only validated type is [`RotationMatrix`], which guarantees `RᵀR = I₃` and
//! `det R = +1` at construction.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `‖RᵀR − I‖_F` and `|det R − 1|` accepted by [`RotationMatrix::new`].
pub const ROTATION_TOL: f64 = 1e-9;
/// Tolerance on the symmetric-part norm accepted by [`vex`].
pub const ANTISYMMETRY_TOL: f64 = 1e-9;
/// Below this rotation angle [`exp_so3`] switches to its second-order Taylor form.
pub const SMALL_ANGLE: f64 = 1e-8;
/// Pitch within this distance of ±π/2 is reported as gimbal-degenerate.
pub const GIMBAL_TOL: f64 = 1e-6;

/// The skew-symmetric matrix `[u]×` with `[u]× v = u × v`.
pub fn hat(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds [`ANTISYMMETRY_TOL`].
pub fn vex(m: &Mat3) -> Result<Vec3> {
    let sym = (m + m.transpose()).norm() * 0.5;
    if !(sym <= ANTISYMMETRY_TOL) {
        return Err(Error::NotAntisymmetric(sym));
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Antisymmetric projection `(A − Aᵀ)/2`.
pub fn pa(a: &Mat3) -> Mat3 {
    (a - a.transpose()) * 0.5
}

/// `vex(pa(A))`, evaluated directly from the off-diagonal entries.
pub fn upsilon(a: &Mat3) -> Vec3 {
    Vec3::new(a[(2, 1)] - a[(1, 2)], a[(0, 2)] - a[(2, 0)], a[(1, 0)] - a[(0, 1)]) * 0.5
}

/// `Tr{M} I₃ − M`.
pub fn mbar(m: &Mat3) -> Mat3 {
    Mat3::identity() * m.trace() - m
}

/// Normalized Euclidean attitude distance `¼ Tr{I₃ − R}`, in `[0, 1]`.
pub fn ecl_dist(r: &RotationMatrix) -> f64 {
    0.25 * (3.0 - r.0.trace())
}

/// A 3×3 proper orthogonal matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat3", into = "Mat3")]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    /// Validates `m` against [`ROTATION_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        let orthogonality = orthonormality_error(&m);
        let det = m.determinant();
        if !(orthogonality <= ROTATION_TOL && (det - 1.0).abs() <= ROTATION_TOL) {
            return Err(Error::NotRotation { orthogonality, det });
        }
        Ok(RotationMatrix(m))
    }

    /// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
    ///
    /// Used for matrices printed to a few significant digits. Fails when the
    /// input is far from SO(3) (orthogonality residual above 1e-2) or reflects.
    pub fn from_approximate(m: Mat3) -> Result<Self> {
        let orthogonality = orthonormality_error(&m);
        let det = m.determinant();
        if !(orthogonality <= 1e-2 && det > 0.0) {
            return Err(Error::NotRotation { orthogonality, det });
        }
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        RotationMatrix::new(u * v_t)
    }

    pub(crate) fn new_unchecked(m: Mat3) -> Self {
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// `‖RᵀR − I₃‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }
}

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

impl TryFrom<Mat3> for RotationMatrix {
    type Error = Error;

    fn try_from(m: Mat3) -> Result<Self> {
        RotationMatrix::new(m)
    }
}

impl From<RotationMatrix> for Mat3 {
    fn from(r: RotationMatrix) -> Mat3 {
        r.0
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl Mul<&RotationMatrix> for &RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

fn orthonormality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// Unit axis and angle (rad). The axis is arbitrary (x) when the angle is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vec3,
    pub angle: f64,
}

impl AxisAngle {
    /// Splits a rotation vector into `(η/‖η‖, ‖η‖)`.
    pub fn from_rotation_vector(eta: &Vec3) -> Self {
        let angle = eta.norm();
        if angle == 0.0 {
            AxisAngle { axis: Vec3::x(), angle: 0.0 }
        } else {
            AxisAngle { axis: eta / angle, angle }
        }
    }

    /// Rodrigues form `I₃ + sin β [u]× + (1 − cos β)[u]×²`.
    pub fn to_rotation(&self) -> RotationMatrix {
        let k = hat(&self.axis);
        let (s, c) = self.angle.sin_cos();
        RotationMatrix(Mat3::identity() + k * s + k * k * (1.0 - c))
    }
}

/// Exponential of the constant body rate `w` held for `dt` seconds.
pub fn exp_so3(w: &Vec3, dt: f64) -> RotationMatrix {
    let eta = w * dt;
    if eta.norm() < SMALL_ANGLE {
        let k = hat(&eta);
        return RotationMatrix(Mat3::identity() + k + k * k * 0.5);
    }
    AxisAngle::from_rotation_vector(&eta).to_rotation()
}

/// Roll, pitch, yaw (rad) of the ZYX convention `R = Rz(ψ) Ry(θ) Rx(φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerZyx {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Pitch is within [`GIMBAL_TOL`] of ±π/2; roll is then pinned to zero.
    pub gimbal_degenerate: bool,
}

impl EulerZyx {
    pub fn to_rotation(&self) -> RotationMatrix {
        let rz = AxisAngle { axis: Vec3::z(), angle: self.yaw }.to_rotation();
        let ry = AxisAngle { axis: Vec3::y(), angle: self.pitch }.to_rotation();
        let rx = AxisAngle { axis: Vec3::x(), angle: self.roll }.to_rotation();
        rz * ry * rx
    }
}

pub fn euler_zyx(r: &RotationMatrix) -> EulerZyx {
    let m = &r.0;
    let pitch = (-m[(2, 0)]).clamp(-1.0, 1.0).asin();
    let gimbal_degenerate = (pitch.abs() - std::f64::consts::FRAC_PI_2).abs() < GIMBAL_TOL;
    if gimbal_degenerate {
        // Only yaw ∓ roll is observable; put it all in yaw.
        let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
        return EulerZyx { roll: 0.0, pitch, yaw, gimbal_degenerate };
    }
    EulerZyx { roll: m[(2, 1)].atan2(m[(2, 2)]), pitch, yaw: m[(1, 0)].atan2(m[(0, 0)]), gimbal_degenerate }
}
