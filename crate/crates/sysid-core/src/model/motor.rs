//! Induction motor with first-order slip dynamics.
//!
//! Steady-state electrical power at slip `sigma` on a bus of magnitude `U`:
//!
//! ```text
//! p_e(sigma) = sigma R U^2 / (R^2 + sigma^2 X^2)
//! ```
//!
//! The rotor speed follows `(2H / we0) d(wm)/dt = (we0 / we) p_e - p_m`, and
//! the local electrical frequency `we` is recovered from the bus angle with a
//! first-order filtered derivative. Linearizing both around the operating
//! slip `sigma0` yields the 2x2 admittance assembled in [`motor_admittance`];
//! the derivation, including the per-unit rebasing described below, is in
//! `docs/models.md`.
//!
//! Channel convention: the admittance is expressed in a per-unit system
//! rescaled to the operating point, with voltage base `V0` and power base
//! `p_m` (which equals the steady electrical power). Inputs are
//! `(dU / V0, dtheta)` and outputs are current deviations in units of
//! `p_m / V0`. Impedances and the inertia constant are rebased internally
//! (`R -> R pm / V0^2`, `X -> X pm / V0^2`, `H -> H / pm`), so callers keep
//! working with nameplate values.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{AdmittanceEval, AdmittanceModel, ModelError};

const SINGULAR_EPS: f64 = 1e-14;

/// Motor parameters. The uncertain vector is `[h, r, x, pm]`; `v0` and `we0`
/// are known boundary data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorParams {
    /// Inertia constant, s.
    pub h: f64,
    /// Rotor resistance, p.u.
    pub r: f64,
    /// Stator plus rotor reactance, p.u.
    pub x: f64,
    /// Mechanical load power, p.u.
    pub pm: f64,
    /// Bus voltage magnitude, p.u.
    pub v0: f64,
    /// Nominal electrical frequency, rad/s.
    pub we0: f64,
}

impl MotorParams {
    pub fn new(h: f64, r: f64, x: f64, pm: f64, v0: f64, we0: f64) -> Result<Self, ModelError> {
        let all_finite = h.is_finite()
            && r.is_finite()
            && x.is_finite()
            && pm.is_finite()
            && v0.is_finite()
            && we0.is_finite();
        if !all_finite || h <= 0.0 || r <= 0.0 || x <= 0.0 || pm < 0.0 || v0 <= 0.0 || we0 <= 0.0 {
            return Err(ModelError::Infeasible { reason: "motor parameters out of range" });
        }
        Ok(MotorParams { h, r, x, pm, v0, we0 })
    }

    /// Study-case values used across the test fleet (50 Hz system).
    pub fn reference() -> Self {
        MotorParams {
            h: 0.5,
            r: 0.08,
            x: 0.2,
            pm: 0.5,
            v0: 1.0,
            we0: 2.0 * core::f64::consts::PI * 50.0,
        }
    }

    /// Electrical power as a function of slip at bus magnitude `v0`.
    pub fn electrical_power(&self, sigma: f64) -> f64 {
        sigma * self.r * self.v0 * self.v0 / (self.r * self.r + sigma * sigma * self.x * self.x)
    }
}

/// Solves `p_e(sigma) = p_m` for the stable branch `0 <= sigma < R/X` by
/// bisection. `p_e` is strictly increasing there and peaks at
/// `V0^2 / (2X)` when `sigma = R/X`, so the root is unique when it exists.
pub fn motor_steady_state(p: &MotorParams) -> Result<f64, ModelError> {
    if p.pm == 0.0 {
        return Ok(0.0);
    }
    let peak = p.v0 * p.v0 / (2.0 * p.x);
    if p.pm >= peak {
        return Err(ModelError::Infeasible {
            reason: "load power exceeds the motor pull-out limit",
        });
    }
    let (mut lo, mut hi) = (0.0_f64, p.r / p.x);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p.electrical_power(mid) < p.pm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * (p.r / p.x) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// 2x2 admittance from `(dU / V0, dtheta)` to normalized current deviations
/// `(di_d, di_q)` at `omega` rad/s, around operating slip `sigma0`.
///
/// Requires `sigma0 > 0`: at zero load the normalization base collapses and
/// the slip dynamics decouple from the bus entirely.
pub fn motor_admittance(
    p: &MotorParams,
    sigma0: f64,
    omega: f64,
) -> Result<AdmittanceEval, ModelError> {
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(ModelError::Infeasible {
            reason: "zero or invalid operating slip: normalized admittance undefined",
        });
    }
    // Rebase to the operating-point units (voltage base V0, power base pm).
    let scale = p.pm / (p.v0 * p.v0);
    let rt = p.r * scale;
    let xt = p.x * scale;
    let ht = p.h / p.pm;
    let qe0 = sigma0 * p.x / p.r;

    let r2 = rt * rt;
    let sx2 = sigma0 * sigma0 * xt * xt;
    let s = Complex64::new(0.0, omega);

    // Slip response: d(sigma) = dsig_d * v_d + dsig_q * v_q, with the
    // mechanical denominator beta(s) = 2 H we0 s + we0 (R^2 - s0^2 X^2) /
    // (s0 (R^2 + s0^2 X^2)) in rebased units.
    let beta = 2.0 * ht * p.we0 * s + p.we0 * (r2 - sx2) / (sigma0 * (r2 + sx2));
    if beta.norm() < SINGULAR_EPS {
        return Err(ModelError::SingularFrequency { omega });
    }
    let dsig_d = -2.0 * p.we0 / beta;
    let dsig_q = (2.0 * ht * (1.0 - sigma0) * s * s + s) / beta;

    // Algebraic current sensitivities at frozen slip, plus the slip route.
    let cd = (r2 - sx2) / (sigma0 * sigma0 * rt);
    let cq = 2.0 * xt / sigma0;
    Ok(AdmittanceEval {
        y11: 1.0 + cd * dsig_d,
        y12: qe0 + cd * dsig_q,
        y21: -qe0 - cq * dsig_d,
        y22: 1.0 - cq * dsig_q,
    })
}

/// Motor model bound to known boundary data `(V0, we0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorModel {
    pub v0: f64,
    pub we0: f64,
}

impl MotorModel {
    pub fn reference() -> Self {
        let p = MotorParams::reference();
        MotorModel { v0: p.v0, we0: p.we0 }
    }

    pub fn params(&self, theta: &[f64]) -> Result<MotorParams, ModelError> {
        if theta.len() != 4 {
            return Err(ModelError::Dimension { expected: 4, got: theta.len() });
        }
        MotorParams::new(theta[0], theta[1], theta[2], theta[3], self.v0, self.we0)
    }
}

impl AdmittanceModel for MotorModel {
    fn param_names(&self) -> &'static [&'static str] {
        &["h", "r", "x", "pm"]
    }

    fn input_labels(&self) -> [&'static str; 2] {
        ["v_d", "v_q"]
    }

    fn output_labels(&self) -> [&'static str; 2] {
        ["i_d", "i_q"]
    }

    fn admittance(&self, theta: &[f64], omega: f64) -> Result<AdmittanceEval, ModelError> {
        let p = self.params(theta)?;
        let sigma0 = motor_steady_state(&p)?;
        motor_admittance(&p, sigma0, omega)
    }

    fn admittance_grid(
        &self,
        theta: &[f64],
        omegas: &[f64],
    ) -> Result<Vec<AdmittanceEval>, ModelError> {
        let p = self.params(theta)?;
        let sigma0 = motor_steady_state(&p)?;
        omegas.iter().map(|&w| motor_admittance(&p, sigma0, w)).collect()
    }
}
