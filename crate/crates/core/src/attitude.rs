use serde::{Deserialize, Serialize};

use crate::quat::{quat_from_rot, quat_step, rot_from_quat, UnitQuaternion};
use crate::so3::{exp_so3, RotationMatrix, Vec3};

/// Attitude representation used by the filter and controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Matrix,
    #[serde(alias = "quat")]
    Quaternion,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "matrix" => Ok(Backend::Matrix),
            "quat" | "quaternion" => Ok(Backend::Quaternion),
            other => Err(format!("unknown backend '{other}' (expected matrix|quat)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attitude {
    Matrix(RotationMatrix),
    Quaternion(UnitQuaternion),
}

impl Attitude {
    pub fn from_rotation(backend: Backend, r: &RotationMatrix) -> Self {
        match backend {
            Backend::Matrix => Attitude::Matrix(*r),
            Backend::Quaternion => Attitude::Quaternion(quat_from_rot(r)),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Attitude::Matrix(_) => Backend::Matrix,
            Attitude::Quaternion(_) => Backend::Quaternion,
        }
    }

    pub fn rotation(&self) -> RotationMatrix {
        match self {
            Attitude::Matrix(r) => *r,
            // Quaternions produced here stay unit-norm to machine precision.
            Attitude::Quaternion(q) => rot_from_quat(q).expect("attitude quaternion left S³"),
        }
    }

    /// Right-multiplies by the exponential of the body rate `h` held over `dt`.
    pub fn propagate(&self, h: &Vec3, dt: f64) -> Self {
        match self {
            Attitude::Matrix(r) => Attitude::Matrix(r * &exp_so3(h, dt)),
            Attitude::Quaternion(q) => Attitude::Quaternion(quat_step(q, h, dt)),
        }
    }
}
