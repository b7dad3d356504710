//! Strategies and independent oracles shared by the integration tests.
#![allow(dead_code)]

use att_nnsf::so3::{Mat3, RotationMatrix, Vec3};
use nalgebra::Vector4;
use proptest::prelude::*;

pub fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-range..range).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
}

pub fn unit3() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("non-degenerate", |v| v.norm() > 1e-3).prop_map(|v| v.normalize())
}

pub fn mat3(range: f64) -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-range..range).prop_map(|a| Mat3::from_row_slice(&a))
}

/// Power series of the matrix exponential; independent of the Rodrigues code.
pub fn expm_series(a: &Mat3) -> Mat3 {
    let mut term = Mat3::identity();
    let mut sum = Mat3::identity();
    for k in 1..60 {
        term = term * a / k as f64;
        sum += term;
    }
    sum
}

pub fn skew(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    Vec3::new(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)
}

/// Uniform-ish rotations: axis on the sphere, angle in `[0, π]`.
pub fn rotation() -> impl Strategy<Value = RotationMatrix> {
    (unit3(), 0.0..std::f64::consts::PI)
        .prop_map(|(u, a)| RotationMatrix::new(expm_series(&skew(&(u * a)))).expect("series exponential is a rotation"))
}

/// Unit quaternion `[q0, qv]` drawn on S³.
pub fn quaternion() -> impl Strategy<Value = Vector4<f64>> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_map(|a| Vector4::new(a[0], a[1], a[2], a[3]))
        .prop_filter("non-degenerate", |v| v.norm() > 1e-3)
        .prop_map(|v| v.normalize())
}

/// `M = Σ s_i r_i r_iᵀ` for 2–4 unit directions with at least two non-collinear.
pub fn weighted_outer_matrix() -> impl Strategy<Value = Mat3> {
    prop::collection::vec((unit3(), 0.1f64..2.0), 2..5)
        .prop_filter("rank at least two", |v| {
            v.iter().enumerate().any(|(i, a)| v[i + 1..].iter().any(|b| a.0.cross(&b.0).norm() > 0.05))
        })
        .prop_map(|v| v.iter().map(|(r, s)| r * r.transpose() * *s).sum())
}

/// Torque-free body rates integrated by classical RK4 with many substeps.
pub fn rk4_rates(j: &Mat3, torque: &Vec3, omega: &Vec3, dt: f64, substeps: usize) -> Vec3 {
    let j_inv = j.try_inverse().unwrap();
    let f = |w: &Vec3| j_inv * (cross(&(j * w), w) + torque);
    let h = dt / substeps as f64;
    let mut w = *omega;
    for _ in 0..substeps {
        let k1 = f(&w);
        let k2 = f(&(w + k1 * (h / 2.0)));
        let k3 = f(&(w + k2 * (h / 2.0)));
        let k4 = f(&(w + k3 * h));
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    w
}

/// Symmetric eigenvalues in ascending order.
pub fn sym_eigs(m: &Mat3) -> [f64; 3] {
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [e[0], e[1], e[2]]
}
