//! Closed-loop simulation.
//!
//! Each tick `k` (time `t = k·dt`):
//!
//! 1. sample sensors from the true state,
//! 2. run the filter,
//! 3. compute the torque from the tick-`k` estimates and desired state,
//! 4. advance the desired trajectory and the true body, holding the torque
//!    over `[t, t + dt)`.
//!
//! Row `k` of the record holds the states at `t` (before the tick's updates)
//! together with the torque computed during the tick.

use serde::{Deserialize, Serialize};

use crate::config::{Setup, SimConfig};
use crate::control::{controller_step, ControlInputs, ControllerState, VectorSource};
use crate::dynamics::{desired_step, measure, truth_step, BodyState, DesiredState};
use crate::error::{Error, Result};
use crate::filter::{filter_step, FilterState};
use crate::rng::NoiseStreams;
use crate::so3::{ecl_dist, euler_zyx, Vec3};

/// Fixed CSV column order.
pub const CSV_HEADER: [&str; 19] = [
    "t",
    "phi",
    "theta",
    "psi",
    "phi_hat",
    "theta_hat",
    "psi_hat",
    "phi_d",
    "theta_d",
    "psi_d",
    "Ro_dist",
    "Rc_dist",
    "omega_err",
    "dist_err",
    "wb_norm",
    "wsigma_fro",
    "tau_x",
    "tau_y",
    "tau_z",
];

/// One logged sample. Field names match [`CSV_HEADER`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Row {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub phi_hat: f64,
    pub theta_hat: f64,
    pub psi_hat: f64,
    pub phi_d: f64,
    pub theta_d: f64,
    pub psi_d: f64,
    /// `‖RᵀR̂‖_I`.
    pub Ro_dist: f64,
    /// `‖R R_dᵀ‖_I`.
    pub Rc_dist: f64,
    /// `‖Ω − Ω_d‖`.
    pub omega_err: f64,
    /// `‖d − d̂‖`.
    pub dist_err: f64,
    pub wb_norm: f64,
    pub wsigma_fro: f64,
    pub tau_x: f64,
    pub tau_y: f64,
    pub tau_z: f64,
}

impl Row {
    pub fn values(&self) -> [f64; 19] {
        [
            self.t,
            self.phi,
            self.theta,
            self.psi,
            self.phi_hat,
            self.theta_hat,
            self.psi_hat,
            self.phi_d,
            self.theta_d,
            self.psi_d,
            self.Ro_dist,
            self.Rc_dist,
            self.omega_err,
            self.dist_err,
            self.wb_norm,
            self.wsigma_fro,
            self.tau_x,
            self.tau_y,
            self.tau_z,
        ]
    }

    pub fn from_values(v: &[f64; 19]) -> Self {
        Row {
            t: v[0],
            phi: v[1],
            theta: v[2],
            psi: v[3],
            phi_hat: v[4],
            theta_hat: v[5],
            psi_hat: v[6],
            phi_d: v[7],
            theta_d: v[8],
            psi_d: v[9],
            Ro_dist: v[10],
            Rc_dist: v[11],
            omega_err: v[12],
            dist_err: v[13],
            wb_norm: v[14],
            wsigma_fro: v[15],
            tau_x: v[16],
            tau_y: v[17],
            tau_z: v[18],
        }
    }
}

/// Worst-case integrity measures seen over a run (not part of the CSV).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max ‖RᵀR − I‖_F` of the true attitude.
    pub truth_orthonormality: f64,
    /// Same for the estimate (matrix backend) or its image under the quaternion map.
    pub estimate_orthonormality: f64,
    /// `max |‖Q̂‖ − 1|`; zero on the matrix backend.
    pub estimate_quat_norm: f64,
    /// `max ‖Ŵ_σ − Ŵ_σᵀ‖_F`.
    pub sigma_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<Row>,
    #[serde(skip)]
    pub diagnostics: Diagnostics,
    /// Activation input weights `K_Υ` used by the run, row-major.
    #[serde(skip)]
    pub input_weights: Vec<[f64; 3]>,
}

impl RunRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = CSV_HEADER.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r.values()[idx]).collect())
    }
}

/// Full closed-loop state between ticks, exposed for step-wise inspection.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub truth: BodyState,
    pub desired: DesiredState,
    pub filter: FilterState,
    pub controller: ControllerState,
}

/// What one tick produced.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub next: LoopState,
    pub torque: Vec3,
}

/// Executes tick `k` from `state`.
pub fn tick(setup: &Setup, state: &LoopState, k: usize, streams: &mut NoiseStreams) -> Result<TickOutput> {
    let dt = setup.dt;
    let t = k as f64 * dt;
    let frame = measure(&state.truth, &setup.sensors, streams)?;
    let (filter, bundle) = filter_step(&state.filter, &frame, &setup.refs, &setup.filter_gains, dt)?;
    let vectors = match setup.innovation_source {
        VectorSource::Measured => &frame.vectors,
        VectorSource::Estimated => &bundle.predicted,
    };
    let inputs = ControlInputs {
        omega_m: &frame.omega_m,
        bias_estimate: &filter.bias,
        vectors,
        refs: &setup.refs,
        desired: &state.desired,
        inertia: setup.inertia.inertia(),
    };
    let (controller, cmd, _) = controller_step(&state.controller, &inputs, &setup.controller, dt)?;

    let desired = desired_step(&state.desired, setup.profile, t, dt);
    let h = dt / setup.truth_substeps as f64;
    let mut truth = state.truth;
    for _ in 0..setup.truth_substeps {
        truth = truth_step(&truth, &cmd.torque, &setup.inertia, h);
    }
    Ok(TickOutput { next: LoopState { truth, desired, filter, controller }, torque: cmd.torque })
}

fn row(t: f64, s: &LoopState, disturbance: &Vec3, torque: &Vec3) -> Row {
    let r = &s.truth.attitude;
    let r_hat = s.filter.attitude.rotation();
    let r_d = &s.desired.attitude;
    let e = euler_zyx(r);
    let e_hat = euler_zyx(&r_hat);
    let e_d = euler_zyx(r_d);
    Row {
        t,
        phi: e.roll,
        theta: e.pitch,
        psi: e.yaw,
        phi_hat: e_hat.roll,
        theta_hat: e_hat.pitch,
        psi_hat: e_hat.yaw,
        phi_d: e_d.roll,
        theta_d: e_d.pitch,
        psi_d: e_d.yaw,
        Ro_dist: ecl_dist(&(r.transpose() * r_hat)),
        Rc_dist: ecl_dist(&(r * &r_d.transpose())),
        omega_err: (s.truth.omega - s.desired.omega).norm(),
        dist_err: (disturbance - s.controller.d_hat).norm(),
        wb_norm: s.filter.bias.norm(),
        wsigma_fro: s.filter.sigma_weights.norm(),
        tau_x: torque.x,
        tau_y: torque.y,
        tau_z: torque.z,
    }
}

fn check_finite(s: &LoopState, torque: &Vec3, tick: usize) -> Result<()> {
    let checks: [(&'static str, bool); 5] = [
        ("true angular velocity", s.truth.omega.iter().all(|v| v.is_finite())),
        ("true attitude", s.truth.attitude.matrix().iter().all(|v| v.is_finite())),
        ("bias estimate", s.filter.bias.iter().all(|v| v.is_finite())),
        ("noise weights", s.filter.sigma_weights.iter().all(|v| v.is_finite())),
        ("torque", torque.iter().all(|v| v.is_finite())),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((what, _)) => Err(Error::NonFinite { tick, what }),
        None => Ok(()),
    }
}

fn update_diagnostics(d: &mut Diagnostics, s: &LoopState) {
    d.truth_orthonormality = d.truth_orthonormality.max(s.truth.attitude.orthonormality_error());
    d.estimate_orthonormality = d.estimate_orthonormality.max(s.filter.attitude.rotation().orthonormality_error());
    if let crate::attitude::Attitude::Quaternion(q) = s.filter.attitude {
        d.estimate_quat_norm = d.estimate_quat_norm.max((q.norm() - 1.0).abs());
    }
    d.sigma_asymmetry = d.sigma_asymmetry.max(s.filter.sigma_asymmetry());
}

pub fn run_setup(setup: &Setup) -> Result<RunRecord> {
    let mut streams = NoiseStreams::new(setup.seed, setup.sensors.vectors.len());
    let mut state = LoopState {
        truth: setup.truth0,
        desired: setup.desired0,
        filter: setup.filter0.clone(),
        controller: setup.controller0,
    };
    let disturbance = setup.inertia.disturbance;
    let mut rows = Vec::with_capacity(setup.steps + 1);
    let mut diagnostics = Diagnostics::default();
    update_diagnostics(&mut diagnostics, &state);
    for k in 0..=setup.steps {
        let out = tick(setup, &state, k, &mut streams).map_err(|e| e.at_tick(k))?;
        check_finite(&out.next, &out.torque, k)?;
        rows.push(row(k as f64 * setup.dt, &state, &disturbance, &out.torque));
        if k < setup.steps {
            state = out.next;
            update_diagnostics(&mut diagnostics, &state);
        }
    }
    let k = setup.filter_gains.input_weights();
    let input_weights = (0..k.nrows()).map(|i| [k[(i, 0)], k[(i, 1)], k[(i, 2)]]).collect();
    Ok(RunRecord { rows, diagnostics, input_weights })
}

/// Validates `cfg` and runs it to completion.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunRecord> {
    run_setup(&cfg.build()?)
}
