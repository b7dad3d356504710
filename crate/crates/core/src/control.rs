//! Filter-coupled attitude tracking law with adaptive disturbance rejection.
//!
//! The controller only ever sees filter outputs (`Ŵ_b`, `ŷ_i`) and raw sensor
//! data; the true bias and disturbance never cross this interface.

use serde::{Deserialize, Serialize};

use crate::attitude::{Attitude, Backend};
use crate::dynamics::{check_references, DesiredState, Reference};
use crate::error::{Error, Result};
use crate::so3::{hat, Mat3, RotationMatrix, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlGains {
    /// `k_c1`, attitude feedback.
    pub k_c1: f64,
    /// `k_c2`, rate feedback.
    pub k_c2: f64,
    /// `k_d`, disturbance adaptation.
    pub k_d: f64,
    /// `γ_d`, disturbance-estimate leak.
    pub gamma_d: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        ControlGains { k_c1: 10.0, k_c2: 2.0, k_d: 10.0, gamma_d: 0.01 }
    }
}

impl ControlGains {
    pub fn validate(&self, dt: f64) -> Result<()> {
        for (name, v) in [("k_c1", self.k_c1), ("k_c2", self.k_c2), ("k_d", self.k_d), ("gamma_d", self.gamma_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if dt * self.gamma_d * self.k_d >= 1.0 {
            return Err(Error::config("dt·γ_d·k_d must be below 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    /// `d̂`, N·m.
    pub d_hat: Vec3,
}

/// Which body vectors feed the tracking innovation `Υ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorSource {
    /// Sensor vectors `y_i` (continuous-time law).
    Measured,
    /// Filter-predicted vectors `ŷ_i = R̂ᵀ r_i` (discrete algorithm).
    #[default]
    Estimated,
}

impl std::str::FromStr for VectorSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "measured" => Ok(VectorSource::Measured),
            "estimated" => Ok(VectorSource::Estimated),
            other => Err(format!("unknown innovation source '{other}' (expected measured|estimated)")),
        }
    }
}

/// Sign of the rate-error drive in the `d̂` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DhatSign {
    /// `+ (k_d/k_c1)(Ω_m − Ŵ_b − Ω_d)`.
    #[default]
    #[serde(rename = "sectionV")]
    SectionV,
    /// `+ (k_d/k_c1)(Ω_d − Ω_m + Ŵ_b)`.
    #[serde(rename = "algorithm1")]
    Algorithm1,
}

impl std::str::FromStr for DhatSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sectionV" | "section_v" => Ok(DhatSign::SectionV),
            "algorithm1" => Ok(DhatSign::Algorithm1),
            other => Err(format!("unknown d-hat sign '{other}' (expected sectionV|algorithm1)")),
        }
    }
}

/// `Υ_c = Σ s_i (R_d v_i) × r_i`.
///
/// With noise-free `v_i = Rᵀ r_i` this is `2 Υ(M_r R̃_c)`, `R̃_c = R R_dᵀ`.
pub fn control_innovation(vectors: &[Vec3], refs: &[Reference], desired: &RotationMatrix) -> Result<Vec3> {
    if vectors.len() != refs.len() {
        return Err(Error::config(format!("{} vectors for {} references", vectors.len(), refs.len())));
    }
    check_references(refs)?;
    Ok(vectors
        .iter()
        .zip(refs)
        .fold(Vec3::zeros(), |acc, (v, r)| acc + desired.rotate(v).cross(&r.direction) * r.confidence))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueCommand {
    /// `𝒯`, N·m.
    pub torque: Vec3,
    /// Feedback part `w_c`.
    pub w_c: Vec3,
}

/// `𝒯 = J Ω̇_d − [J(Ω_m − Ŵ_b)]× Ω_d − d̂ − w_c`,
/// `w_c = k_c1 R_dᵀ Υ_c + k_c2 (Ω_m − Ŵ_b − Ω_d)`.
#[allow(clippy::too_many_arguments)]
pub fn torque(
    cs: &ControllerState,
    omega_m: &Vec3,
    bias_estimate: &Vec3,
    ds: &DesiredState,
    desired_attitude: &RotationMatrix,
    ups_c: &Vec3,
    inertia: &Mat3,
    g: &ControlGains,
) -> TorqueCommand {
    let rate = omega_m - bias_estimate;
    let w_c = desired_attitude.transpose().rotate(ups_c) * g.k_c1 + (rate - ds.omega) * g.k_c2;
    let torque = inertia * ds.omega_dot - hat(&(inertia * rate)) * ds.omega - cs.d_hat - w_c;
    TorqueCommand { torque, w_c }
}

pub fn disturbance_update(
    cs: &ControllerState,
    omega_m: &Vec3,
    bias_estimate: &Vec3,
    omega_d: &Vec3,
    g: &ControlGains,
    sign: DhatSign,
    dt: f64,
) -> ControllerState {
    let mut err = omega_m - bias_estimate - omega_d;
    if sign == DhatSign::Algorithm1 {
        err = -err;
    }
    ControllerState { d_hat: cs.d_hat + (err * (g.k_d / g.k_c1) - cs.d_hat * (g.gamma_d * g.k_d)) * dt }
}

/// Everything the controller reads in one tick.
#[derive(Debug, Clone, Copy)]
pub struct ControlInputs<'a> {
    pub omega_m: &'a Vec3,
    pub bias_estimate: &'a Vec3,
    /// Vectors selected by [`VectorSource`].
    pub vectors: &'a [Vec3],
    pub refs: &'a [Reference],
    pub desired: &'a DesiredState,
    pub inertia: &'a Mat3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gains: ControlGains,
    pub dhat_sign: DhatSign,
    pub backend: Backend,
}

/// Innovation, then `d̂` update, then torque with the updated `d̂`.
pub fn controller_step(
    cs: &ControllerState,
    inp: &ControlInputs<'_>,
    cfg: &ControllerConfig,
    dt: f64,
) -> Result<(ControllerState, TorqueCommand, Vec3)> {
    // Quaternion backend: R_d goes through Q_d and back.
    let r_d = Attitude::from_rotation(cfg.backend, &inp.desired.attitude).rotation();
    let ups_c = control_innovation(inp.vectors, inp.refs, &r_d)?;
    let next =
        disturbance_update(cs, inp.omega_m, inp.bias_estimate, &inp.desired.omega, &cfg.gains, cfg.dhat_sign, dt);
    let cmd = torque(&next, inp.omega_m, inp.bias_estimate, inp.desired, &r_d, &ups_c, inp.inertia, &cfg.gains);
    Ok((next, cmd, ups_c))
}
