//! Whitened frequency-domain residuals and the MAP objective.
//!
//! Measured spectra are whitened channelwise by `1 / (sigma sqrt(N/2))`,
//! where `sigma` is the known time-domain noise std and `N = 2K + 1` the
//! record length: the DFT of white noise then has unit variance per real
//! component in every bin. In whitened coordinates the admittance becomes
//! `Yt[i][j] = Y[i][j] sigma_u[j] / sigma_y[i]` and the per-bin noise vector
//! `q = eta - Yt eps` (output noise minus the response to input noise) has
//! real 4x4 covariance
//!
//! ```text
//! Gamma_q(k) = I4 + B(Yt_k) B(Yt_k)^T
//! ```
//!
//! with `B` the real block representation of the complex 2x2 matrix acting on
//! `[re q1, im q1, re q2, im q2]`. Bins are independent because the injected
//! noise is white, so the misfit is a straight sum over active bins of
//! `r^T Gamma_q^{-1} r`, evaluated with a 4x4 Cholesky solve. The prior adds
//! a diagonal Gaussian penalty `(theta - theta_p)^T Gamma_theta^{-1}
//! (theta - theta_p)`; the constant log-determinant terms are dropped as they
//! do not move the optimum for known noise levels.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;


use crate::model::{AdmittanceEval, AdmittanceModel, ModelError};
use crate::params::ParamVec;
use crate::spectral::{FreqGrid, Spectrum};

/// Diagonal Gaussian prior over the uncertain parameters.
#[derive(Clone, Debug)]
pub struct Prior {
    pub mean: ParamVec,
    /// Per-component variances (diagonal of the prior covariance).
    pub variances: Vec<f64>,
}

impl Prior {
    pub fn new(mean: ParamVec, variances: Vec<f64>) -> Result<Self, InferenceError> {
        if variances.len() != mean.len() {
            return Err(InferenceError::Invalid { reason: "prior variance length mismatch" });
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(InferenceError::Invalid { reason: "prior variances must be > 0" });
        }
        Ok(Prior { mean, variances })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InferenceError {
    Model(ModelError),
    /// Objective or residual accumulated a NaN or infinity.
    NonFiniteObjective,
    /// Problem assembly rejected (mismatched grids, bad noise levels...).
    Invalid { reason: &'static str },
}

impl fmt::Display for InferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InferenceError::Model(e) => write!(f, "{e}"),
            InferenceError::NonFiniteObjective => write!(f, "objective is not finite"),
            InferenceError::Invalid { reason } => write!(f, "invalid posterior problem: {reason}"),
        }
    }
}

impl core::error::Error for InferenceError {}

impl From<ModelError> for InferenceError {
    fn from(e: ModelError) -> Self {
        InferenceError::Model(e)
    }
}

/// MAP objective split into its two terms; `total = misfit + prior_penalty`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub total: f64,
    pub misfit: f64,
    pub prior_penalty: f64,
}

/// Frequency-domain identification problem: measured spectra, known noise
/// levels, a model, and a prior. Spectra are whitened once at assembly.
pub struct PosteriorProblem {
    model: Box<dyn AdmittanceModel>,
    grid: FreqGrid,
    /// Raw (unwhitened) measured spectra, kept for reporting.
    u_raw: [Vec<Complex64>; 2],
    y_raw: [Vec<Complex64>; 2],
    /// Whitened measured spectra.
    u_wh: [Vec<Complex64>; 2],
    y_wh: [Vec<Complex64>; 2],
    /// Active bin indices (DC excluded by the grid's own flag).
    active: Vec<usize>,
    noise_std_u: [f64; 2],
    noise_std_y: [f64; 2],
    /// `ratio[i][j] = sigma_u[j] / sigma_y[i]`, the whitened-domain transfer
    /// scaling.
    ratio: [[f64; 2]; 2],
    prior: Prior,
}

impl PosteriorProblem {
    pub fn new(
        model: Box<dyn AdmittanceModel>,
        u: &Spectrum,
        y: &Spectrum,
        noise_std_u: [f64; 2],
        noise_std_y: [f64; 2],
        prior: Prior,
    ) -> Result<Self, InferenceError> {
        if u.grid != y.grid {
            return Err(InferenceError::Invalid { reason: "input/output grids differ" });
        }
        for s in noise_std_u.iter().chain(&noise_std_y) {
            if !(s.is_finite() && *s > 0.0) {
                return Err(InferenceError::Invalid { reason: "noise stds must be > 0" });
            }
        }
        if prior.mean.len() != model.param_names().len() {
            return Err(InferenceError::Invalid { reason: "prior dimension mismatch" });
        }
        let n = u.grid.record_len() as f64;
        let half = (n / 2.0).sqrt();
        let whiten = |spec: &Spectrum, stds: &[f64; 2]| -> [Vec<Complex64>; 2] {
            [0, 1].map(|c| {
                let w = 1.0 / (stds[c] * half);
                spec.channel(c).iter().map(|z| z * w).collect()
            })
        };
        let ratio = [
            [noise_std_u[0] / noise_std_y[0], noise_std_u[1] / noise_std_y[0]],
            [noise_std_u[0] / noise_std_y[1], noise_std_u[1] / noise_std_y[1]],
        ];
        Ok(PosteriorProblem {
            grid: u.grid.clone(),
            u_raw: [u.channel(0).to_vec(), u.channel(1).to_vec()],
            y_raw: [y.channel(0).to_vec(), y.channel(1).to_vec()],
            u_wh: whiten(u, &noise_std_u),
            y_wh: whiten(y, &noise_std_y),
            active: u.grid.active_bins().collect(),
            noise_std_u,
            noise_std_y,
            ratio,
            prior,
            model,
        })
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn model(&self) -> &dyn AdmittanceModel {
        &*self.model
    }

    pub fn noise_std_u(&self) -> [f64; 2] {
        self.noise_std_u
    }

    pub fn noise_std_y(&self) -> [f64; 2] {
        self.noise_std_y
    }

    pub fn active_bins(&self) -> &[usize] {
        &self.active
    }

    fn whitened_eval(&self, y: &AdmittanceEval) -> AdmittanceEval {
        AdmittanceEval {
            y11: y.y11 * self.ratio[0][0],
            y12: y.y12 * self.ratio[0][1],
            y21: y.y21 * self.ratio[1][0],
            y22: y.y22 * self.ratio[1][1],
        }
    }

    /// Whitened residual at bin `k`: `r = y_wh - Yt u_wh`.
    pub fn residual(&self, theta: &[f64], k: usize) -> Result<[Complex64; 2], InferenceError> {
        let eval = self.model.admittance(theta, self.grid.omegas()[k])?;
        Ok(self.residual_with(&self.whitened_eval(&eval), k))
    }

    fn residual_with(&self, yt: &AdmittanceEval, k: usize) -> [Complex64; 2] {
        let u = [self.u_wh[0][k], self.u_wh[1][k]];
        let pred = yt.mul(u);
        [self.y_wh[0][k] - pred[0], self.y_wh[1][k] - pred[1]]
    }

    /// Per-bin noise covariance `Gamma_q(k) = I4 + B B^T` in whitened
    /// coordinates.
    pub fn noise_covariance(&self, theta: &[f64], k: usize) -> Result<[[f64; 4]; 4], InferenceError> {
        let eval = self.model.admittance(theta, self.grid.omegas()[k])?;
        Ok(gamma_q(&self.whitened_eval(&eval)))
    }

    /// Full MAP objective at `theta`.
    pub fn objective(&self, theta: &[f64]) -> Result<ObjectiveValue, InferenceError> {
        if theta.len() != self.prior.mean.len() {
            return Err(InferenceError::Invalid { reason: "theta dimension mismatch" });
        }
        let omegas_active: Vec<f64> =
            self.active.iter().map(|&k| self.grid.omegas()[k]).collect();
        let evals = self.model.admittance_grid(theta, &omegas_active)?;

        let mut misfit = 0.0_f64;
        for (i, &k) in self.active.iter().enumerate() {
            let yt = self.whitened_eval(&evals[i]);
            let r = self.residual_with(&yt, k);
            let rv = [r[0].re, r[0].im, r[1].re, r[1].im];
            let gamma = gamma_q(&yt);
            let l = cholesky4(&gamma).ok_or(InferenceError::NonFiniteObjective)?;
            // r^T Gamma^{-1} r = |L^{-1} r|^2.
            let z = forward_sub4(&l, &rv);
            misfit += z.iter().map(|v| v * v).sum::<f64>();
        }

        let mut prior_penalty = 0.0_f64;
        for (j, (&t, &m)) in theta.iter().zip(self.prior.mean.values()).enumerate() {
            let d = t - m;
            prior_penalty += d * d / self.prior.variances[j];
        }

        let total = misfit + prior_penalty;
        if !total.is_finite() {
            return Err(InferenceError::NonFiniteObjective);
        }
        Ok(ObjectiveValue { total, misfit, prior_penalty })
    }

    /// Predicted raw output spectrum `Y(theta) u_meas`, for PSD reporting.
    /// The DC bin is zeroed, matching the synthesis convention.
    pub fn predicted_output(&self, theta: &[f64]) -> Result<Spectrum, InferenceError> {
        let omegas = self.grid.omegas();
        let evals = self.model.admittance_grid(theta, &omegas[1..])?;
        let bins = self.grid.len();
        let mut y1 = Vec::with_capacity(bins);
        let mut y2 = Vec::with_capacity(bins);
        y1.push(Complex64::new(0.0, 0.0));
        y2.push(Complex64::new(0.0, 0.0));
        for (i, eval) in evals.iter().enumerate() {
            let k = i + 1;
            let out = eval.mul([self.u_raw[0][k], self.u_raw[1][k]]);
            y1.push(out[0]);
            y2.push(out[1]);
        }
        Ok(Spectrum::new(self.grid.clone(), y1, y2)
            .expect("bin count matches the grid by construction"))
    }

    /// Measured raw output spectrum, for PSD reporting.
    pub fn measured_output(&self) -> Spectrum {
        Spectrum::new(self.grid.clone(), self.y_raw[0].clone(), self.y_raw[1].clone())
            .expect("stored channels match the grid")
    }
}

/// Real 4x4 block representation of a complex 2x2 matrix acting on
/// `[re x1, im x1, re x2, im x2]`.
fn block4(y: &AdmittanceEval) -> [[f64; 4]; 4] {
    let b = |z: Complex64| [[z.re, -z.im], [z.im, z.re]];
    let (a, c, d, e) = (b(y.y11), b(y.y12), b(y.y21), b(y.y22));
    [
        [a[0][0], a[0][1], c[0][0], c[0][1]],
        [a[1][0], a[1][1], c[1][0], c[1][1]],
        [d[0][0], d[0][1], e[0][0], e[0][1]],
        [d[1][0], d[1][1], e[1][0], e[1][1]],
    ]
}

/// `Gamma_q = I4 + B B^T` for a whitened admittance evaluation.
pub fn gamma_q(yt: &AdmittanceEval) -> [[f64; 4]; 4] {
    let b = block4(yt);
    let mut g = [[0.0_f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for (bi, bj) in b[i].iter().zip(&b[j]) {
                acc += bi * bj;
            }
            g[i][j] = acc;
        }
    }
    g
}

/// Lower-triangular Cholesky factor of a symmetric 4x4 matrix; `None` when a
/// pivot is not strictly positive.
pub fn cholesky4(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut l = [[0.0_f64; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L z = b` for lower-triangular `L`.
pub fn forward_sub4(l: &[[f64; 4]; 4], b: &[f64; 4]) -> [f64; 4] {
    let mut z = [0.0_f64; 4];
    for i in 0..4 {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * z[k];
        }
        z[i] = sum / l[i][i];
    }
    z
}
