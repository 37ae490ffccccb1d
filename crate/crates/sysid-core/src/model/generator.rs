//! Classical second-order synchronous generator behind a transient reactance.
//!
//! Swing dynamics with constant flux magnitude `E'`:
//!
//! ```text
//! M d(omega)/dt = Pm - D omega - E' V sin(delta - theta) / Xd'
//! d(delta)/dt   = omega
//! I_bar         = (E' e^{j delta} - V e^{j theta}) / (j Xd')
//! ```
//!
//! Terminal measurements are polar: inputs are bus voltage magnitude and
//! angle fluctuations `(dV, dtheta)`, outputs are current magnitude and angle
//! fluctuations `(dI, dphi)`. Linearizing the swing equation and the current
//! phasor around a steady operating point gives the 2x2 admittance assembled
//! in [`gen_admittance`]; the step-by-step derivation is in `docs/models.md`.

use alloc::vec::Vec;

use num_complex::Complex64;
// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;


use super::{AdmittanceEval, AdmittanceModel, ModelError};

/// Pole threshold for `|den(j omega)|`; below this the swing resonance is
/// treated as exactly hit (only reachable with `D = 0`).
const SINGULAR_EPS: f64 = 1e-14;

/// Current magnitude below which the polar output channels are undefined.
const ZERO_CURRENT_EPS: f64 = 1e-12;

/// Uncertain generator parameters, in the order used everywhere:
/// `[d, e_prime, m, xd_prime]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    /// Damping coefficient, p.u. torque per rad/s. May be zero.
    pub d: f64,
    /// Internal EMF magnitude, p.u.
    pub e_prime: f64,
    /// Inertia constant, s^2 (2H / omega_s absorbed).
    pub m: f64,
    /// Transient reactance, p.u.
    pub xd_prime: f64,
}

impl GenParams {
    pub fn new(d: f64, e_prime: f64, m: f64, xd_prime: f64) -> Result<Self, ModelError> {
        let all_finite =
            d.is_finite() && e_prime.is_finite() && m.is_finite() && xd_prime.is_finite();
        if !all_finite || d < 0.0 || e_prime <= 0.0 || m <= 0.0 || xd_prime <= 0.0 {
            return Err(ModelError::Infeasible { reason: "generator parameters out of range" });
        }
        Ok(GenParams { d, e_prime, m, xd_prime })
    }

    /// Study-case values used across the test fleet.
    pub fn reference() -> Self {
        GenParams { d: 0.25, e_prime: 1.0, m: 1.0, xd_prime: 0.01 }
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self, ModelError> {
        if theta.len() != 4 {
            return Err(ModelError::Dimension { expected: 4, got: theta.len() });
        }
        GenParams::new(theta[0], theta[1], theta[2], theta[3])
    }
}

/// Steady operating point. `v0`, `theta0`, `pm` are boundary data; `delta0`
/// and `i0` are solved from them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenOperatingPoint {
    pub v0: f64,
    pub theta0: f64,
    pub pm: f64,
    pub delta0: f64,
    /// Steady current phasor.
    pub i0: Complex64,
}

/// Solves the power balance `Pm = E' V0 sin(delta0 - theta0) / Xd'` for the
/// stable branch `|delta0 - theta0| < pi/2`.
pub fn gen_steady_state(
    p: &GenParams,
    v0: f64,
    theta0: f64,
    pm: f64,
) -> Result<GenOperatingPoint, ModelError> {
    if !(v0.is_finite() && v0 > 0.0) || !theta0.is_finite() || !pm.is_finite() {
        return Err(ModelError::Infeasible { reason: "bad operating-point inputs" });
    }
    let arg = pm * p.xd_prime / (p.e_prime * v0);
    if arg.abs() >= 1.0 {
        return Err(ModelError::Infeasible {
            reason: "mechanical power exceeds the static transfer limit",
        });
    }
    let delta0 = theta0 + arg.asin();
    let e_phasor = Complex64::from_polar(p.e_prime, delta0);
    let v_phasor = Complex64::from_polar(v0, theta0);
    let i0 = (e_phasor - v_phasor) / Complex64::new(0.0, p.xd_prime);
    Ok(GenOperatingPoint { v0, theta0, pm, delta0, i0 })
}

/// 2x2 admittance from `(dV, dtheta)` to `(dI, dphi)` at `omega` rad/s.
///
/// With `den(s) = M s^2 + D s + Ks`, `Ks = E' V0 cos(delta0 - theta0) / Xd'`,
/// the rotor responds as `ddelta = (Ks dtheta - Tv dV) / den`, and the polar
/// current outputs follow by projecting the current phasor deviation onto and
/// across `i0`. All four entries share the single pole pair of `den`.
pub fn gen_admittance(
    p: &GenParams,
    op: &GenOperatingPoint,
    omega: f64,
) -> Result<AdmittanceEval, ModelError> {
    let i0_abs = op.i0.norm();
    if i0_abs < ZERO_CURRENT_EPS {
        return Err(ModelError::Infeasible {
            reason: "zero steady current: polar current channels undefined",
        });
    }
    let load_angle = op.delta0 - op.theta0;
    let ks = p.e_prime * op.v0 * load_angle.cos() / p.xd_prime;
    let tv = p.e_prime * load_angle.sin() / p.xd_prime;

    let s = Complex64::new(0.0, omega);
    let den = p.m * s * s + p.d * s + ks;
    if den.norm() < SINGULAR_EPS {
        return Err(ModelError::SingularFrequency { omega });
    }
    let g_v = -tv / den;
    let g_t = ks / den;

    // Phasor sensitivities: dI_bar = a ddelta + b dV + c dtheta.
    let a = Complex64::from_polar(p.e_prime, op.delta0) / p.xd_prime;
    let b = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, op.theta0) / p.xd_prime;
    let c = -Complex64::from_polar(op.v0, op.theta0) / p.xd_prime;

    let ia = op.i0.conj() * a;
    let ib = op.i0.conj() * b;
    let ic = op.i0.conj() * c;

    // dI = Re(i0* dI_bar)/|i0|, dphi = Im(i0* dI_bar)/|i0|^2. The real-part
    // projection commutes with the (real-coefficient) rotor response, so it
    // lands on the constant factors only.
    let i2 = i0_abs * i0_abs;
    Ok(AdmittanceEval {
        y11: (ia.re * g_v + ib.re) / i0_abs,
        y12: (ia.re * g_t + ic.re) / i0_abs,
        y21: (ia.im * g_v + ib.im) / i2,
        y22: (ia.im * g_t + ic.im) / i2,
    })
}

/// Generator model bound to known boundary data `(V0, theta0, Pm)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorModel {
    pub v0: f64,
    pub theta0: f64,
    pub pm: f64,
}

impl GeneratorModel {
    /// Study-case operating point: 1 p.u. bus voltage at angle zero, half
    /// p.u. mechanical power.
    pub fn reference() -> Self {
        GeneratorModel { v0: 1.0, theta0: 0.0, pm: 0.5 }
    }

    pub fn steady_state(&self, theta: &[f64]) -> Result<(GenParams, GenOperatingPoint), ModelError> {
        let p = GenParams::from_slice(theta)?;
        let op = gen_steady_state(&p, self.v0, self.theta0, self.pm)?;
        Ok((p, op))
    }
}

impl AdmittanceModel for GeneratorModel {
    fn param_names(&self) -> &'static [&'static str] {
        &["d", "e_prime", "m", "xd_prime"]
    }

    fn input_labels(&self) -> [&'static str; 2] {
        ["V", "theta"]
    }

    fn output_labels(&self) -> [&'static str; 2] {
        ["I", "phi"]
    }

    fn admittance(&self, theta: &[f64], omega: f64) -> Result<AdmittanceEval, ModelError> {
        let (p, op) = self.steady_state(theta)?;
        gen_admittance(&p, &op, omega)
    }

    fn admittance_grid(
        &self,
        theta: &[f64],
        omegas: &[f64],
    ) -> Result<Vec<AdmittanceEval>, ModelError> {
        let (p, op) = self.steady_state(theta)?;
        omegas.iter().map(|&w| gen_admittance(&p, &op, w)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    /// Nonlinear steady-state output map (I, phi) as a function of the
    /// boundary inputs, used to finite-difference the DC gains.
    fn nl_outputs(p: &GenParams, v0: f64, theta0: f64, pm: f64) -> (f64, f64) {
        let op = gen_steady_state(p, v0, theta0, pm).unwrap();
        (op.i0.norm(), op.i0.arg())
    }

    #[test]
    fn steady_state_balances_power() {
        let p = GenParams::reference();
        let op = gen_steady_state(&p, 1.0, 0.1, 0.5).unwrap();
        // Load angle for the study case: asin(0.5 * 0.01 / 1).
        assert!((op.delta0 - op.theta0 - 0.005f64.asin()).abs() < 1e-15);
        // Bus power equals Pm: the branch is lossless.
        let v = Complex64::from_polar(1.0, 0.1);
        let pe = (v * op.i0.conj()).re;
        assert!((pe - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_power_means_zero_current() {
        let p = GenParams::reference();
        let op = gen_steady_state(&p, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(op.delta0, 0.0);
        assert!(op.i0.norm() < 1e-15);
        // Polar current channels are undefined there.
        assert!(matches!(
            gen_admittance(&p, &op, 1.0),
            Err(ModelError::Infeasible { .. })
        ));
    }

    #[test]
    fn transfer_limit_is_infeasible() {
        let p = GenParams::reference();
        assert!(matches!(
            gen_steady_state(&p, 1.0, 0.0, 150.0),
            Err(ModelError::Infeasible { .. })
        ));
    }

    #[test]
    fn dc_gain_matches_nonlinear_sensitivity() {
        // Y(0) must equal the finite-difference sensitivity of the nonlinear
        // equilibrium map, channel by channel.
        let p = GenParams::reference();
        let (v0, theta0, pm) = (1.0, 0.0, 0.5);
        let op = gen_steady_state(&p, v0, theta0, pm).unwrap();
        let y = gen_admittance(&p, &op, 0.0).unwrap();
        let h = 1e-6;
        let fd = |f: &dyn Fn(f64) -> (f64, f64)| {
            let (ip, pp) = f(h);
            let (im, pm_) = f(-h);
            ((ip - im) / (2.0 * h), (pp - pm_) / (2.0 * h))
        };
        let (di_dv, dphi_dv) = fd(&|e| nl_outputs(&p, v0 + e, theta0, pm));
        let (di_dth, dphi_dth) = fd(&|e| nl_outputs(&p, v0, theta0 + e, pm));
        for (got, want) in [
            (y.y11.re, di_dv),
            (y.y12.re, di_dth),
            (y.y21.re, dphi_dv),
            (y.y22.re, dphi_dth),
        ] {
            let scale = want.abs().max(1.0);
            assert!((got - want).abs() < 1e-5 * scale, "dc gain {got} vs fd {want}");
        }
        // DC entries are purely real and the angle channel passes through.
        for z in [y.y11, y.y12, y.y21, y.y22] {
            assert!(z.im.abs() < 1e-15);
        }
        assert!(y.y12.norm() < 1e-9);
        assert!((y.y22.re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn high_frequency_freezes_the_rotor() {
        // As omega -> inf the swing response dies as 1/omega^2 and only the
        // algebraic phasor sensitivities at frozen delta survive.
        let p = GenParams::reference();
        let (v0, theta0, pm) = (1.0, 0.0, 0.5);
        let op = gen_steady_state(&p, v0, theta0, pm).unwrap();
        let y = gen_admittance(&p, &op, 1e6).unwrap();
        let h = 1e-7;
        let frozen = |v: f64, th: f64| -> (f64, f64) {
            let i = (Complex64::from_polar(p.e_prime, op.delta0)
                - Complex64::from_polar(v, th))
                / Complex64::new(0.0, p.xd_prime);
            (i.norm(), i.arg())
        };
        let (i_p, phi_p) = frozen(v0 + h, theta0);
        let (i_m, phi_m) = frozen(v0 - h, theta0);
        let di_dv = (i_p - i_m) / (2.0 * h);
        let dphi_dv = (phi_p - phi_m) / (2.0 * h);
        let (i_p, phi_p) = frozen(v0, theta0 + h);
        let (i_m, phi_m) = frozen(v0, theta0 - h);
        let di_dth = (i_p - i_m) / (2.0 * h);
        let dphi_dth = (phi_p - phi_m) / (2.0 * h);
        for (got, want) in [
            (y.y11.re, di_dv),
            (y.y12.re, di_dth),
            (y.y21.re, dphi_dv),
            (y.y22.re, dphi_dth),
        ] {
            let scale = want.abs().max(1.0);
            assert!((got - want).abs() < 1e-5 * scale, "hf limit {got} vs frozen fd {want}");
        }
    }

    #[test]
    fn undamped_resonance_is_singular() {
        // With D = 0 the swing pole sits on the imaginary axis at
        // omega_n = sqrt(Ks / M); evaluating there must fail loudly.
        let p = GenParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let op = gen_steady_state(&p, 1.0, 0.0, 0.1).unwrap();
        let ks = p.e_prime * op.v0 * (op.delta0 - op.theta0).cos() / p.xd_prime;
        let omega_n = (ks / p.m).sqrt();
        assert!(matches!(
            gen_admittance(&p, &op, omega_n),
            Err(ModelError::SingularFrequency { .. })
        ));
        // Slightly off resonance it evaluates again.
        assert!(gen_admittance(&p, &op, omega_n * 1.001).is_ok());
    }

    #[test]
    fn grid_override_matches_per_bin_calls() {
        let model = GeneratorModel::reference();
        let theta = [0.25, 1.0, 1.0, 0.01];
        let omegas: Vec<f64> = (1..40).map(|k| k as f64 * 0.157).collect();
        let grid = model.admittance_grid(&theta, &omegas).unwrap();
        for (k, &w) in omegas.iter().enumerate() {
            let single = model.admittance(&theta, w).unwrap();
            assert_eq!(grid[k], single);
        }
    }

    proptest! {
        #[test]
        fn admittance_is_conjugate_symmetric(
            d in 0.0f64..2.0,
            e in 0.5f64..2.0,
            m in 0.2f64..3.0,
            xd in 0.005f64..0.1,
            omega in 0.01f64..200.0,
        ) {
            let p = GenParams::new(d, e, m, xd).unwrap();
            let op = gen_steady_state(&p, 1.0, 0.0, 0.5).unwrap();
            let plus = gen_admittance(&p, &op, omega).unwrap();
            let minus = gen_admittance(&p, &op, -omega).unwrap();
            for (zp, zm) in [
                (plus.y11, minus.y11),
                (plus.y12, minus.y12),
                (plus.y21, minus.y21),
                (plus.y22, minus.y22),
            ] {
                prop_assert!((zp - zm.conj()).norm() <= 1e-12 * (1.0 + zp.norm()));
            }
        }
    }
}
