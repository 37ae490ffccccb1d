//! Data generation: ambient inputs, linear output synthesis, measurement
//! noise, and nonlinear time-domain reference simulators.
//!
//! Identification data is produced through the linear frequency-domain path
//! ([`ambient_input`] then [`synthesize_output`]), which matches the
//! small-fluctuation regime the admittance models describe. The nonlinear
//! simulators exist to certify the linearizations: driven with a small
//! sinusoid they must reproduce the admittance entries, and they share no
//! code with the frequency-domain path.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{
    gen_steady_state, motor_steady_state, AdmittanceModel, GenParams, ModelError, MotorParams,
};
use crate::rng::{child_rng, Stream};
use crate::series::{ChannelSeries, SeriesError};
use crate::spectral::{dft, idft};

/// Relative-to-signal noise request. `snr` is the amplitude ratio
/// RMS(signal) / RMS(noise), applied per channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub snr: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimulateError {
    Series(SeriesError),
    Model(ModelError),
    /// A channel has (numerically) zero RMS, so an SNR is meaningless.
    ZeroSignal { channel: usize },
    /// Invalid request (non-positive SNR, zero record length, bad tau...).
    BadInput { reason: &'static str },
    /// The nonlinear integration left the model's validity region.
    StateBlowup { t: f64 },
}

impl fmt::Display for SimulateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulateError::Series(e) => write!(f, "{e}"),
            SimulateError::Model(e) => write!(f, "{e}"),
            SimulateError::ZeroSignal { channel } => {
                write!(f, "channel {channel} has zero RMS, cannot scale noise")
            }
            SimulateError::BadInput { reason } => write!(f, "bad input: {reason}"),
            SimulateError::StateBlowup { t } => {
                write!(f, "state left the validity region at t = {t} s")
            }
        }
    }
}

impl core::error::Error for SimulateError {}

impl From<SeriesError> for SimulateError {
    fn from(e: SeriesError) -> Self {
        SimulateError::Series(e)
    }
}

impl From<ModelError> for SimulateError {
    fn from(e: ModelError) -> Self {
        SimulateError::Model(e)
    }
}

/// White Gaussian ambient input: `2k + 1` samples per channel, std
/// `sigma_u`, channel 1 drawn completely before channel 2.
pub fn ambient_input(
    k: usize,
    dt: f64,
    sigma_u: f64,
    seed: u64,
) -> Result<ChannelSeries, SimulateError> {
    if k == 0 {
        return Err(SimulateError::BadInput { reason: "need k >= 1" });
    }
    if !(sigma_u.is_finite() && sigma_u >= 0.0) {
        return Err(SimulateError::BadInput { reason: "sigma_u must be finite and >= 0" });
    }
    let n = 2 * k + 1;
    let mut rng = child_rng(seed, Stream::Input, 0);
    let mut draw = |count: usize| -> Vec<f64> {
        (0..count).map(|_| sigma_u * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let ch1 = draw(n);
    let ch2 = draw(n);
    Ok(ChannelSeries::new(dt, ch1, ch2, ["u1", "u2"])?)
}

/// Linear response of `model` at `theta` to the input record: transform,
/// multiply by the admittance bin by bin, transform back. The DC bin is
/// zeroed; operating-point offsets are not part of the fluctuation model.
pub fn synthesize_output(
    model: &dyn AdmittanceModel,
    theta: &[f64],
    u: &ChannelSeries,
) -> Result<ChannelSeries, SimulateError> {
    let spec_u = dft(u);
    let omegas = spec_u.grid.omegas();
    let evals = model.admittance_grid(theta, &omegas[1..])?;
    let bins = spec_u.grid.len();
    let mut y1 = vec![Complex64::new(0.0, 0.0); bins];
    let mut y2 = vec![Complex64::new(0.0, 0.0); bins];
    for (i, y) in evals.iter().enumerate() {
        let k = i + 1;
        let uk = [spec_u.channel(0)[k], spec_u.channel(1)[k]];
        let out = y.mul(uk);
        y1[k] = out[0];
        y2[k] = out[1];
    }
    let spec_y = crate::spectral::Spectrum::new(spec_u.grid.clone(), y1, y2)
        .expect("bin count matches the grid by construction");
    let series = idft(&spec_y);
    let labels = model.output_labels();
    Ok(ChannelSeries::new(
        series.dt(),
        series.channel(0).to_vec(),
        series.channel(1).to_vec(),
        labels,
    )?)
}

/// Adds white Gaussian measurement noise per channel at the requested SNR.
/// Returns the noisy record and the injected noise stds, which the inference
/// stage treats as known.
pub fn add_noise(
    ts: &ChannelSeries,
    spec: &NoiseSpec,
) -> Result<(ChannelSeries, [f64; 2]), SimulateError> {
    if !(spec.snr.is_finite() && spec.snr > 0.0) {
        return Err(SimulateError::BadInput { reason: "snr must be finite and > 0" });
    }
    let mut stds = [0.0_f64; 2];
    for c in 0..2 {
        let rms = ts.rms(c);
        if rms <= 1e-300 {
            return Err(SimulateError::ZeroSignal { channel: c + 1 });
        }
        stds[c] = rms / spec.snr;
    }
    let mut rng = child_rng(spec.seed, Stream::NoiseU, 0);
    let mut noisy = [Vec::new(), Vec::new()];
    for c in 0..2 {
        noisy[c] = ts
            .channel(c)
            .iter()
            .map(|&v| v + stds[c] * rng.sample::<f64, _>(StandardNormal))
            .collect();
    }
    let [n1, n2] = noisy;
    let labels = ts.labels();
    Ok((ChannelSeries::new(ts.dt(), n1, n2, labels)?, stds))
}

/// Rotor state of the nonlinear motor simulation at one sample instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorState {
    pub t: f64,
    /// Mechanical speed in electrical rad/s.
    pub omega_m: f64,
    /// Filter state of the bus-frequency estimator.
    pub z: f64,
    /// Instantaneous slip.
    pub sigma: f64,
}

/// Swing state of the nonlinear generator simulation at one sample instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenState {
    pub t: f64,
    pub delta: f64,
    pub omega: f64,
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

/// Nonlinear induction-motor simulation.
///
/// `inputs` carries the full bus signals: channel 1 is the voltage magnitude
/// `U(t)` (p.u.), channel 2 the bus angle `theta(t)` (rad). The local
/// electrical frequency is estimated with a first-order filtered derivative
/// of time constant `tau`:
///
/// ```text
/// we = we0 + (z + theta) / tau,   dz/dt = -(z + theta) / tau
/// ```
///
/// Slip follows `sigma = 1 - wm / we` and the rotor integrates
/// `(2H / we0) d(wm)/dt = (we0 / we) p_e(sigma, U) - p_m` with classic RK4 at
/// the input sample step, interpolating inputs linearly at half steps.
///
/// Returns synchronous-frame current deviations `(di_d, di_q)` from the
/// initial steady state, plus the state trajectory. Starts at the
/// equilibrium for `(U(0), theta(0))`; fails with [`SimulateError::StateBlowup`]
/// if slip leaves `[-1, 1]`, the estimated frequency collapses, or a state
/// goes non-finite (a too-coarse step against a fast `tau` does exactly
/// that).
pub fn simulate_motor_nonlinear(
    p: &MotorParams,
    inputs: &ChannelSeries,
    tau: f64,
) -> Result<(ChannelSeries, Vec<MotorState>), SimulateError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(SimulateError::BadInput { reason: "tau must be finite and > 0" });
    }
    let dt = inputs.dt();
    let n = inputs.len();
    let u = inputs.channel(0);
    let th = inputs.channel(1);

    let p_start = MotorParams { v0: u[0], ..*p };
    let sigma0 = motor_steady_state(&p_start)?;
    let i_ss = current_phasor(p, u[0], th[0], sigma0);

    // State: (omega_m, z).
    let deriv = |wm: f64, z: f64, ut: f64, tht: f64| -> (f64, f64) {
        let we = p.we0 + (z + tht) / tau;
        let dz = -(z + tht) / tau;
        let sigma = 1.0 - wm / we;
        let pe = sigma * p.r * ut * ut / (p.r * p.r + sigma * sigma * p.x * p.x);
        let dwm = p.we0 / (2.0 * p.h) * ((p.we0 / we) * pe - p.pm);
        (dwm, dz)
    };

    let mut wm = (1.0 - sigma0) * p.we0;
    let mut z = -th[0];
    let mut states = Vec::with_capacity(n);
    let mut i_d = Vec::with_capacity(n);
    let mut i_q = Vec::with_capacity(n);

    for step in 0..n {
        let t = step as f64 * dt;
        let we = p.we0 + (z + th[step]) / tau;
        let sigma = 1.0 - wm / we;
        if !(wm.is_finite() && z.is_finite()) || sigma.abs() > 1.0 || we <= 0.0 {
            return Err(SimulateError::StateBlowup { t });
        }
        states.push(MotorState { t, omega_m: wm, z, sigma });
        let i = current_phasor(p, u[step], th[step], sigma);
        i_d.push(i.re - i_ss.re);
        i_q.push(i.im - i_ss.im);

        if step + 1 == n {
            break;
        }
        let (u0, u1) = (u[step], u[step + 1]);
        let (t0, t1) = (th[step], th[step + 1]);
        let (uh, thh) = (lerp(u0, u1, 0.5), lerp(t0, t1, 0.5));
        let (k1w, k1z) = deriv(wm, z, u0, t0);
        let (k2w, k2z) = deriv(wm + 0.5 * dt * k1w, z + 0.5 * dt * k1z, uh, thh);
        let (k3w, k3z) = deriv(wm + 0.5 * dt * k2w, z + 0.5 * dt * k2z, uh, thh);
        let (k4w, k4z) = deriv(wm + dt * k3w, z + dt * k3z, u1, t1);
        wm += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }

    let out = ChannelSeries::new(dt, i_d, i_q, ["i_d", "i_q"])?;
    Ok((out, states))
}

/// Steady-frame motor current phasor at slip `sigma`:
/// `I = U e^{j theta} sigma / (R + j sigma X)`.
fn current_phasor(p: &MotorParams, u: f64, theta: f64, sigma: f64) -> Complex64 {
    Complex64::from_polar(u, theta) * sigma / Complex64::new(p.r, sigma * p.x)
}

/// Nonlinear classical-generator simulation.
///
/// `inputs` carries the full bus signals: channel 1 is voltage magnitude
/// `V(t)` (p.u.), channel 2 the bus angle `theta(t)` (rad). Integrates the
/// swing equation with RK4 at the input sample step and returns polar current
/// deviations `(dI, dphi)` from the initial steady state, plus the state
/// trajectory. Starts at the equilibrium for `(V(0), theta(0), pm)`.
pub fn simulate_generator_nonlinear(
    p: &GenParams,
    pm: f64,
    inputs: &ChannelSeries,
) -> Result<(ChannelSeries, Vec<GenState>), SimulateError> {
    let dt = inputs.dt();
    let n = inputs.len();
    let v = inputs.channel(0);
    let th = inputs.channel(1);

    let op = gen_steady_state(p, v[0], th[0], pm)?;
    let i0_abs = op.i0.norm();
    if i0_abs < 1e-12 {
        return Err(SimulateError::Model(ModelError::Infeasible {
            reason: "zero steady current: polar current channels undefined",
        }));
    }
    let phi0 = op.i0.arg();

    let deriv = |delta: f64, omega: f64, vt: f64, tht: f64| -> (f64, f64) {
        let pe = p.e_prime * vt * (delta - tht).sin() / p.xd_prime;
        (omega, (pm - p.d * omega - pe) / p.m)
    };

    let mut delta = op.delta0;
    let mut omega = 0.0_f64;
    let mut states = Vec::with_capacity(n);
    let mut d_i = Vec::with_capacity(n);
    let mut d_phi = Vec::with_capacity(n);

    for step in 0..n {
        let t = step as f64 * dt;
        if !(delta.is_finite() && omega.is_finite()) {
            return Err(SimulateError::StateBlowup { t });
        }
        states.push(GenState { t, delta, omega });
        let i = (Complex64::from_polar(p.e_prime, delta)
            - Complex64::from_polar(v[step], th[step]))
            / Complex64::new(0.0, p.xd_prime);
        d_i.push(i.norm() - i0_abs);
        d_phi.push(i.arg() - phi0);

        if step + 1 == n {
            break;
        }
        let (v0s, v1s) = (v[step], v[step + 1]);
        let (t0s, t1s) = (th[step], th[step + 1]);
        let (vh, thh) = (lerp(v0s, v1s, 0.5), lerp(t0s, t1s, 0.5));
        let (k1d, k1w) = deriv(delta, omega, v0s, t0s);
        let (k2d, k2w) = deriv(delta + 0.5 * dt * k1d, omega + 0.5 * dt * k1w, vh, thh);
        let (k3d, k3w) = deriv(delta + 0.5 * dt * k2d, omega + 0.5 * dt * k2w, vh, thh);
        let (k4d, k4w) = deriv(delta + dt * k3d, omega + dt * k3w, v1s, t1s);
        delta += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        omega += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }

    let out = ChannelSeries::new(dt, d_i, d_phi, ["I", "phi"])?;
    Ok((out, states))
}
