//! Adaptive neural-network stochastic attitude filter.
//!
//! The filter runs directly on normalized vector measurements and the gyro
//! reading. Each tick it
//!
//! 1. forms the innovation `Υ_o = Σ (s_i/2) ŷ_i × y_i` and the weighted
//!    distance `‖M_y R̃_o‖_I` from the predicted vectors `ŷ_i = R̂ᵀ r_i`,
//! 2. evaluates the adaptive gains `Ψ₁`, `Ψ₂` and the tanh activation
//!    `φ = tanh(K_Υ Υ_o)`,
//! 3. adapts the gyro-bias weights `Ŵ_b` and noise weights `Ŵ_σ`,
//! 4. builds the correction `C` and propagates `R̂ ← R̂ exp((Ω_m − Ŵ_b − C) dt)`.
//!
//! The attitude can be carried as a rotation matrix or a unit quaternion; see
//! [`Attitude`].

use nalgebra::{DMatrix, DVector};

use crate::attitude::Attitude;
use crate::dynamics::{check_references, MeasurementFrame, Reference};
use crate::error::{Error, Result};
use crate::so3::{Mat3, RotationMatrix, Vec3};

/// Filter gains and the fixed activation input weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGains {
    /// `Γ_b`, q×3.
    bias_weights: DMatrix<f64>,
    /// `(Γ_bᵀΓ_b)⁻¹ Γ_bᵀ`, 3×q.
    bias_weights_pinv: DMatrix<f64>,
    /// Diagonal of `Γ_σ`.
    sigma_rates: DVector<f64>,
    /// `K_Υ`, q×3.
    input_weights: DMatrix<f64>,
    /// `γ_b`.
    pub bias_rate: f64,
    /// `k_ob`.
    pub bias_leak: f64,
    /// `k_oσ`.
    pub sigma_leak: f64,
}

impl FilterGains {
    pub fn new(
        bias_weights: DMatrix<f64>,
        sigma_rates: DVector<f64>,
        input_weights: DMatrix<f64>,
        bias_rate: f64,
        bias_leak: f64,
        sigma_leak: f64,
    ) -> Result<Self> {
        let q = bias_weights.nrows();
        if q == 0 || bias_weights.ncols() != 3 {
            return Err(Error::config("Γ_b must be q×3 with q ≥ 1"));
        }
        if sigma_rates.len() != q || input_weights.shape() != (q, 3) {
            return Err(Error::config(format!("Γ_σ and K_Υ must match q = {q}")));
        }
        if !sigma_rates.iter().all(|g| *g > 0.0 && g.is_finite()) {
            return Err(Error::config("Γ_σ must have positive diagonal entries"));
        }
        for (name, v) in [("γ_b", bias_rate), ("k_ob", bias_leak), ("k_oσ", sigma_leak)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if !input_weights.iter().chain(bias_weights.iter()).all(|v| v.is_finite()) {
            return Err(Error::config("Γ_b and K_Υ must be finite"));
        }
        let gram = bias_weights.transpose() * &bias_weights;
        let chol = gram.cholesky().ok_or_else(|| Error::config("Γ_bᵀΓ_b is not positive definite"))?;
        let bias_weights_pinv = chol.inverse() * bias_weights.transpose();
        Ok(FilterGains {
            bias_weights,
            bias_weights_pinv,
            sigma_rates,
            input_weights,
            bias_rate,
            bias_leak,
            sigma_leak,
        })
    }

    /// Neuron count `q`.
    pub fn neurons(&self) -> usize {
        self.bias_weights.nrows()
    }

    pub fn bias_weights(&self) -> &DMatrix<f64> {
        &self.bias_weights
    }

    pub fn sigma_rates(&self) -> &DVector<f64> {
        &self.sigma_rates
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input_weights
    }
}

/// `Γ_b(i, j) = scale` when `i mod 3 = j`, else 0.
pub fn default_bias_weights(q: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(q, 3, |i, j| if i % 3 == j { scale } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub attitude: Attitude,
    /// `Ŵ_b`, gyro-bias estimate (rad/s).
    pub bias: Vec3,
    /// `Ŵ_σ`, q×q.
    pub sigma_weights: DMatrix<f64>,
}

impl FilterState {
    /// Zero weights, given initial attitude.
    pub fn new(attitude: Attitude, neurons: usize) -> Self {
        FilterState { attitude, bias: Vec3::zeros(), sigma_weights: DMatrix::zeros(neurons, neurons) }
    }

    /// `‖Ŵ_σ − Ŵ_σᵀ‖_F`.
    pub fn sigma_asymmetry(&self) -> f64 {
        (&self.sigma_weights - self.sigma_weights.transpose()).norm()
    }
}

/// Per-tick intermediate quantities, kept for logging.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationBundle {
    /// `Υ_o`.
    pub ups_o: Vec3,
    /// `‖M_y R̃_o‖_I`.
    pub dist: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub phi: DVector<f64>,
    /// Correction `C`, rad/s.
    pub correction: Vec3,
    /// Predicted body vectors `ŷ_i = R̂ᵀ r_i` from the pre-update estimate.
    pub predicted: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Innovation {
    pub ups_o: Vec3,
    pub dist: f64,
    pub predicted: Vec<Vec3>,
}

/// `Υ_o = Σ (s_i/2) ŷ_i × y_i` and `‖M_y R̃_o‖_I = ¼ Σ s_i y_iᵀ(y_i − ŷ_i)`.
pub fn innovation(measured: &[Vec3], refs: &[Reference], r_hat: &RotationMatrix) -> Result<Innovation> {
    if measured.len() != refs.len() {
        return Err(Error::config(format!("{} measured vectors for {} references", measured.len(), refs.len())));
    }
    check_references(refs)?;
    let rt = r_hat.transpose();
    let predicted: Vec<Vec3> = refs.iter().map(|r| rt.rotate(&r.direction)).collect();
    let mut ups_o = Vec3::zeros();
    let mut dist = 0.0;
    for ((y, y_hat), r) in measured.iter().zip(&predicted).zip(refs) {
        ups_o += y_hat.cross(y) * (0.5 * r.confidence);
        dist += r.confidence * y.dot(&(y - y_hat));
    }
    Ok(Innovation { ups_o, dist: 0.25 * dist, predicted })
}

/// `Ψ₁ = (d + 1) eᵈ`, `Ψ₂ = (d + 2) eᵈ`.
pub fn psi(dist: f64) -> (f64, f64) {
    let e = dist.exp();
    ((dist + 1.0) * e, (dist + 2.0) * e)
}

/// `φ = tanh(K_Υ Υ_o)`.
pub fn activation(ups_o: &Vec3, input_weights: &DMatrix<f64>) -> DVector<f64> {
    let x = DVector::from_column_slice(ups_o.as_slice());
    (input_weights * x).map(f64::tanh)
}

/// One explicit Euler step of both weight-adaptation laws.
pub fn weight_update(
    fs: &FilterState,
    phi: &DVector<f64>,
    psi1: f64,
    psi2: f64,
    g: &FilterGains,
    dt: f64,
) -> FilterState {
    let drive = g.bias_weights.tr_mul(phi);
    let drive = Vec3::new(drive[0], drive[1], drive[2]);
    let bias = fs.bias + (drive * psi1 - fs.bias * g.bias_leak) * (g.bias_rate * dt);

    let mut rate = phi * phi.transpose() * (psi2 / 4.0) - &fs.sigma_weights * g.sigma_leak;
    for (mut row, gamma) in rate.row_iter_mut().zip(g.sigma_rates.iter()) {
        row *= *gamma;
    }
    let sigma_weights = &fs.sigma_weights + rate * dt;

    FilterState { attitude: fs.attitude, bias, sigma_weights }
}

/// `C = (Γ_bᵀ + Ψ₂/(4Ψ₁) (Γ_bᵀΓ_b)⁻¹ Γ_bᵀ Ŵ_σ) φ`.
pub fn correction(phi: &DVector<f64>, psi1: f64, psi2: f64, sigma_weights: &DMatrix<f64>, g: &FilterGains) -> Vec3 {
    let c = g.bias_weights.tr_mul(phi) + &g.bias_weights_pinv * (sigma_weights * phi) * (psi2 / (4.0 * psi1));
    Vec3::new(c[0], c[1], c[2])
}

/// `R̂ ← R̂ exp((Ω_m − Ŵ_b − C) dt)` on either backend.
pub fn attitude_update(fs: &FilterState, omega_m: &Vec3, correction: &Vec3, dt: f64) -> FilterState {
    let h = omega_m - fs.bias - correction;
    FilterState { attitude: fs.attitude.propagate(&h, dt), ..fs.clone() }
}

/// Steps 2–8 of the discrete filter, in order.
pub fn filter_step(
    fs: &FilterState,
    frame: &MeasurementFrame,
    refs: &[Reference],
    g: &FilterGains,
    dt: f64,
) -> Result<(FilterState, InnovationBundle)> {
    let r_hat = fs.attitude.rotation();
    let inn = innovation(&frame.vectors, refs, &r_hat)?;
    let (psi1, psi2) = psi(inn.dist);
    let phi = activation(&inn.ups_o, &g.input_weights);
    let weighted = weight_update(fs, &phi, psi1, psi2, g, dt);
    let c = correction(&phi, psi1, psi2, &weighted.sigma_weights, g);
    let next = attitude_update(&weighted, &frame.omega_m, &c, dt);
    let bundle =
        InnovationBundle { ups_o: inn.ups_o, dist: inn.dist, psi1, psi2, phi, correction: c, predicted: inn.predicted };
    Ok((next, bundle))
}

/// `M = Σ s_i v_i v_iᵀ`.
pub fn weighted_outer(vectors: &[Vec3], refs: &[Reference]) -> Mat3 {
    vectors.iter().zip(refs).fold(Mat3::zeros(), |acc, (v, r)| acc + v * v.transpose() * r.confidence)
}
