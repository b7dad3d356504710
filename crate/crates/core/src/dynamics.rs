//! Ground-truth rigid-body motion, the desired trajectory and synthetic sensors.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{gaussian3, NoiseStreams};
use crate::so3::{exp_so3, hat, Mat3, RotationMatrix, Vec3};

/// Raw measured vectors shorter than this cannot be normalized.
pub const DEGENERATE_VECTOR_NORM: f64 = 1e-9;

/// Inertia `J` (kg·m²) and the constant body-frame disturbance `d` (N·m).
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaParams {
    inertia: Mat3,
    inertia_inv: Mat3,
    pub disturbance: Vec3,
}

impl InertiaParams {
    /// `inertia` must be symmetric (1e-12) and positive definite.
    pub fn new(inertia: Mat3, disturbance: Vec3) -> Result<Self> {
        if (inertia - inertia.transpose()).norm() > 1e-12 {
            return Err(Error::config("inertia matrix is not symmetric"));
        }
        let chol = inertia.cholesky().ok_or_else(|| Error::config("inertia matrix is not positive definite"))?;
        if !disturbance.iter().all(|v| v.is_finite()) {
            return Err(Error::config("disturbance must be finite"));
        }
        Ok(InertiaParams { inertia, inertia_inv: chol.inverse(), disturbance })
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub attitude: RotationMatrix,
    /// Body-frame angular velocity, rad/s.
    pub omega: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredState {
    pub attitude: RotationMatrix,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

/// Angular acceleration profile of the desired trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesiredProfile {
    /// `0.1 [sin(0.15t + π/4), 0.5 sin(0.1t + π/3), 0.8 cos(0.12t + π/2)]`.
    #[default]
    Sinusoid,
    /// `Ω̇_d ≡ 0`.
    ConstantRate,
}

impl DesiredProfile {
    pub fn rate_dot(&self, t: f64) -> Vec3 {
        match self {
            DesiredProfile::Sinusoid => desired_rate_dot(t),
            DesiredProfile::ConstantRate => Vec3::zeros(),
        }
    }
}

pub fn desired_rate_dot(t: f64) -> Vec3 {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
    Vec3::new((0.15 * t + FRAC_PI_4).sin(), 0.5 * (0.1 * t + FRAC_PI_3).sin(), 0.8 * (0.12 * t + FRAC_PI_2).cos()) * 0.1
}

impl DesiredState {
    pub fn new(attitude: RotationMatrix, omega: Vec3, profile: DesiredProfile) -> Self {
        DesiredState { attitude, omega, omega_dot: profile.rate_dot(0.0) }
    }
}

/// Advances the desired state from `t` to `t + dt`.
///
/// Same semi-implicit scheme as [`truth_step`]: the attitude moves with the
/// rate held at `t`, then the rate integrates `Ω̇_d(t)`. A body that matches
/// the desired state and receives the exact feed-forward torque therefore
/// tracks it with no discretization error.
pub fn desired_step(ds: &DesiredState, profile: DesiredProfile, t: f64, dt: f64) -> DesiredState {
    DesiredState {
        attitude: ds.attitude * exp_so3(&ds.omega, dt),
        omega: ds.omega + profile.rate_dot(t) * dt,
        omega_dot: profile.rate_dot(t + dt),
    }
}

/// `Ω̇ = J⁻¹([JΩ]× Ω + 𝒯 + d)`.
pub fn angular_acceleration(omega: &Vec3, torque: &Vec3, p: &InertiaParams) -> Vec3 {
    p.inertia_inv * (hat(&(p.inertia * omega)) * omega + torque + p.disturbance)
}

/// Semi-implicit geometric Euler: `R ← R exp(Ω dt)` with the pre-update rate.
pub fn truth_step(s: &BodyState, torque: &Vec3, p: &InertiaParams, dt: f64) -> BodyState {
    BodyState {
        attitude: s.attitude * exp_so3(&s.omega, dt),
        omega: s.omega + angular_acceleration(&s.omega, torque, p) * dt,
    }
}

/// Inertial reference direction `r_i` (unit) with confidence `s_i ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub direction: Vec3,
    pub confidence: f64,
}

/// Rejects sets without two non-collinear references of positive confidence.
pub fn check_references(refs: &[Reference]) -> Result<()> {
    if refs.len() < 2 {
        return Err(Error::config(format!("need at least 2 reference vectors, got {}", refs.len())));
    }
    for r in refs {
        if !((r.direction.norm() - 1.0).abs() <= 1e-12) {
            return Err(Error::config("reference directions must be unit vectors"));
        }
        if !(r.confidence >= 0.0) {
            return Err(Error::config("confidences must be non-negative"));
        }
    }
    let active: Vec<_> = refs.iter().filter(|r| r.confidence > 0.0).collect();
    let spans = active
        .iter()
        .enumerate()
        .any(|(i, a)| active[i + 1..].iter().any(|b| a.direction.cross(&b.direction).norm() > 1e-6));
    if !spans {
        return Err(Error::config("reference vectors are collinear"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSensor {
    pub reference: Reference,
    /// Constant body-frame bias `b_i`.
    pub bias: Vec3,
    pub noise_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorParams {
    /// Gyro bias `W_b`, rad/s.
    pub gyro_bias: Vec3,
    pub gyro_noise_std: f64,
    pub vectors: Vec<VectorSensor>,
}

impl SensorParams {
    pub fn references(&self) -> Vec<Reference> {
        self.vectors.iter().map(|v| v.reference).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check_references(&self.references())?;
        let stds = std::iter::once(self.gyro_noise_std).chain(self.vectors.iter().map(|v| v.noise_std));
        for s in stds {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config("noise standard deviations must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// One tick of sensor output.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub omega_m: Vec3,
    /// Normalized body-frame vectors, same order as the sensors.
    pub vectors: Vec<Vec3>,
}

/// `Ω_m = Ω + W_b + n` and `y_i = normalize(Rᵀ r_i + b_i + n_i)`.
pub fn measure(s: &BodyState, p: &SensorParams, rng: &mut NoiseStreams) -> Result<MeasurementFrame> {
    let omega_m = s.omega + p.gyro_bias + gaussian3(&mut rng.gyro, p.gyro_noise_std);
    let rt = s.attitude.transpose();
    let vectors = p
        .vectors
        .iter()
        .zip(rng.vectors.iter_mut())
        .enumerate()
        .map(|(i, (sensor, stream))| measure_vector(&rt, sensor, stream, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementFrame { omega_m, vectors })
}

fn measure_vector<R: Rng>(rt: &RotationMatrix, sensor: &VectorSensor, rng: &mut R, index: usize) -> Result<Vec3> {
    let clean = rt.rotate(&sensor.reference.direction) + sensor.bias;
    for _ in 0..2 {
        let raw = clean + gaussian3(rng, sensor.noise_std);
        let n = raw.norm();
        if n >= DEGENERATE_VECTOR_NORM {
            return Ok(raw / n);
        }
    }
    Err(Error::DegenerateMeasurement { sensor: index })
}
