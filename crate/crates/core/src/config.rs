//! Simulation configuration.
//!
//! Every field has a default reproducing the reference experiment, so an empty
//! JSON object `{}` is a complete configuration. Unknown keys are rejected.
//! Matrices are written row-major as `[[a, b, c], [d, e, f], [g, h, i]]`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attitude::{Attitude, Backend};
use crate::control::{ControlGains, ControllerConfig, ControllerState, DhatSign, VectorSource};
use crate::dynamics::{BodyState, DesiredProfile, DesiredState, InertiaParams, Reference, SensorParams, VectorSensor};
use crate::error::{Error, Result};
use crate::filter::{default_bias_weights, FilterGains, FilterState};
use crate::rng::activation_weight_stream;
use crate::so3::{Mat3, RotationMatrix, Vec3};

pub type Rows3 = [[f64; 3]; 3];

fn mat_from_rows(rows: &Rows3) -> Mat3 {
    Mat3::from_fn(|i, j| rows[i][j])
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

const IDENTITY_ROWS: Rows3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Pattern of the activation input weights `K_Υ` (q×3), before scaling by
/// `activation_gain`. Random patterns draw from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationInit {
    /// Every entry i.i.d. uniform on `[0, 1)`.
    Uniform,
    /// Uniform `[0, 1)` on the `Γ_b` support (`i mod 3 = j`), zero elsewhere.
    AlignedUniform,
    /// One on the `Γ_b` support, zero elsewhere.
    #[default]
    Aligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// `γ_b`.
    pub bias_rate: f64,
    /// `k_ob`.
    pub bias_leak: f64,
    /// `k_oσ`.
    pub sigma_leak: f64,
    /// `Γ_b(i, j) = scale · [i mod 3 = j]`.
    pub bias_weight_scale: f64,
    /// `Γ_σ = rate · I_q`.
    pub sigma_rate: f64,
    pub activation_init: ActivationInit,
    /// Scale applied to the `activation_init` pattern.
    pub activation_gain: f64,
    /// Overrides `activation_init` when present (q rows of 3).
    pub input_weights: Option<Vec<[f64; 3]>>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            bias_rate: 1.0,
            bias_leak: 1.0,
            sigma_leak: 1.0,
            bias_weight_scale: 2.0,
            sigma_rate: 2.0,
            activation_init: ActivationInit::default(),
            activation_gain: 10.0,
            input_weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorSensorConfig {
    /// Inertial reference; normalized on load.
    pub reference: [f64; 3],
    pub bias: [f64; 3],
    pub noise_std: f64,
    pub confidence: f64,
}

impl Default for VectorSensorConfig {
    fn default() -> Self {
        VectorSensorConfig { reference: [0.0, 0.0, 1.0], bias: [0.0; 3], noise_std: 0.05, confidence: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub gyro_bias: [f64; 3],
    pub gyro_noise_std: f64,
    pub vectors: Vec<VectorSensorConfig>,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            gyro_bias: [0.03, 0.015, 0.021],
            gyro_noise_std: 0.05,
            vectors: vec![
                VectorSensorConfig { reference: [1.0, 1.0, -1.0], bias: [0.01, 0.005, -0.04], ..Default::default() },
                VectorSensorConfig { reference: [0.0, 0.0, 1.0], bias: [0.025, -0.03, 0.02], ..Default::default() },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyConfig {
    pub inertia: Rows3,
    pub disturbance: [f64; 3],
}

impl Default for BodyConfig {
    fn default() -> Self {
        BodyConfig { inertia: [[0.016, 0.0, 0.0], [0.0, 0.015, 0.0], [0.0, 0.0, 0.03]], disturbance: [0.1, 0.3, 0.2] }
    }
}

/// Printed to four digits; projected onto SO(3) on load.
pub const REFERENCE_INITIAL_ATTITUDE: Rows3 =
    [[-0.7060, 0.0956, 0.7018], [0.1274, -0.9576, 0.2585], [0.6967, 0.2719, 0.6638]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// True attitude `R(0)`; projected to the nearest rotation.
    pub attitude: Rows3,
    pub omega: [f64; 3],
    pub desired_attitude: Rows3,
    pub desired_omega: [f64; 3],
    pub attitude_estimate: Rows3,
    pub bias_estimate: [f64; 3],
    pub disturbance_estimate: [f64; 3],
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            attitude: REFERENCE_INITIAL_ATTITUDE,
            omega: [0.2, 0.3, 0.3],
            desired_attitude: IDENTITY_ROWS,
            desired_omega: [0.0; 3],
            attitude_estimate: IDENTITY_ROWS,
            bias_estimate: [0.0; 3],
            disturbance_estimate: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Sample time, s.
    pub dt: f64,
    /// Simulated time, s.
    pub duration: f64,
    /// Neuron count `q`.
    pub neurons: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Zero every noise standard deviation (biases and disturbance untouched).
    pub noise_free: bool,
    pub innovation_source: VectorSource,
    pub dhat_sign: DhatSign,
    /// Truth integration substeps per control tick.
    pub truth_substeps: usize,
    pub desired_profile: DesiredProfile,
    pub filter: FilterConfig,
    pub control: ControlGains,
    pub sensors: SensorConfig,
    pub body: BodyConfig,
    pub initial: InitialConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            duration: 50.0,
            neurons: 3,
            seed: 0,
            backend: Backend::Matrix,
            noise_free: false,
            innovation_source: VectorSource::Estimated,
            dhat_sign: DhatSign::SectionV,
            truth_substeps: 1,
            desired_profile: DesiredProfile::Sinusoid,
            filter: FilterConfig::default(),
            control: ControlGains::default(),
            sensors: SensorConfig::default(),
            body: BodyConfig::default(),
            initial: InitialConfig::default(),
        }
    }
}

/// Fully validated, typed simulation setup.
#[derive(Debug, Clone)]
pub struct Setup {
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub truth_substeps: usize,
    pub innovation_source: VectorSource,
    pub profile: DesiredProfile,
    pub inertia: InertiaParams,
    pub sensors: SensorParams,
    pub refs: Vec<Reference>,
    pub filter_gains: FilterGains,
    pub controller: ControllerConfig,
    pub truth0: BodyState,
    pub desired0: DesiredState,
    pub filter0: FilterState,
    pub controller0: ControllerState,
}

impl SimConfig {
    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_json_str(&text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })
    }

    /// Number of control ticks; the record has one more row than this.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn build(&self) -> Result<Setup> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::config("duration must be at least dt"));
        }
        if self.truth_substeps == 0 {
            return Err(Error::config("truth_substeps must be at least 1"));
        }
        if self.neurons == 0 {
            return Err(Error::config("neurons must be at least 1"));
        }
        self.control.validate(self.dt)?;
        let f = &self.filter;
        if self.dt * f.bias_rate * f.bias_leak >= 1.0 {
            return Err(Error::config("dt·γ_b·k_ob must be below 1"));
        }
        if self.dt * f.sigma_rate * f.sigma_leak >= 1.0 {
            return Err(Error::config("dt·Γ_σ·k_oσ must be below 1"));
        }

        let inertia = InertiaParams::new(mat_from_rows(&self.body.inertia), vec3(self.body.disturbance))?;
        let sensors = self.sensor_params()?;
        let refs = sensors.references();

        let q = self.neurons;
        let filter_gains = FilterGains::new(
            default_bias_weights(q, f.bias_weight_scale),
            DVector::from_element(q, f.sigma_rate),
            self.input_weights()?,
            f.bias_rate,
            f.bias_leak,
            f.sigma_leak,
        )?;

        let init = &self.initial;
        let truth0 = BodyState {
            attitude: RotationMatrix::from_approximate(mat_from_rows(&init.attitude))?,
            omega: vec3(init.omega),
        };
        let desired0 = DesiredState::new(
            RotationMatrix::from_approximate(mat_from_rows(&init.desired_attitude))?,
            vec3(init.desired_omega),
            self.desired_profile,
        );
        let r_hat0 = RotationMatrix::from_approximate(mat_from_rows(&init.attitude_estimate))?;
        let mut filter0 = FilterState::new(Attitude::from_rotation(self.backend, &r_hat0), q);
        filter0.bias = vec3(init.bias_estimate);
        let controller0 = ControllerState { d_hat: vec3(init.disturbance_estimate) };

        Ok(Setup {
            dt: self.dt,
            steps: self.steps(),
            seed: self.seed,
            truth_substeps: self.truth_substeps,
            innovation_source: self.innovation_source,
            profile: self.desired_profile,
            inertia,
            sensors,
            refs,
            filter_gains,
            controller: ControllerConfig { gains: self.control, dhat_sign: self.dhat_sign, backend: self.backend },
            truth0,
            desired0,
            filter0,
            controller0,
        })
    }

    fn sensor_params(&self) -> Result<SensorParams> {
        let s = &self.sensors;
        let noise_scale = if self.noise_free { 0.0 } else { 1.0 };
        let vectors = s
            .vectors
            .iter()
            .map(|v| {
                let raw = vec3(v.reference);
                let n = raw.norm();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::config("reference vectors must be non-zero"));
                }
                Ok(VectorSensor {
                    reference: Reference { direction: raw / n, confidence: v.confidence },
                    bias: vec3(v.bias),
                    noise_std: v.noise_std * noise_scale,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let params =
            SensorParams { gyro_bias: vec3(s.gyro_bias), gyro_noise_std: s.gyro_noise_std * noise_scale, vectors };
        params.validate()?;
        Ok(params)
    }

    /// `K_Υ` for this configuration and seed.
    pub fn input_weights(&self) -> Result<DMatrix<f64>> {
        let q = self.neurons;
        if let Some(rows) = &self.filter.input_weights {
            if rows.len() != q {
                return Err(Error::config(format!("input_weights has {} rows, expected {q}", rows.len())));
            }
            return Ok(DMatrix::from_fn(q, 3, |i, j| rows[i][j]));
        }
        let gain = self.filter.activation_gain;
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::config("activation_gain must be positive"));
        }
        let mut rng = activation_weight_stream(self.seed);
        let mut draw = || rng.random::<f64>();
        let pattern = match self.filter.activation_init {
            ActivationInit::Uniform => DMatrix::from_fn(q, 3, |_, _| draw()),
            ActivationInit::AlignedUniform => DMatrix::from_fn(q, 3, |i, j| if i % 3 == j { draw() } else { 0.0 }),
            ActivationInit::Aligned => DMatrix::from_fn(q, 3, |i, j| if i % 3 == j { 1.0 } else { 0.0 }),
        };
        Ok(pattern * gain)
    }
}
