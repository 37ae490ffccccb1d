//! Half-spectrum DFT, inverse, and one-sided PSD.
//!
//! Conventions, fixed for the whole workspace:
//!
//! * Records have an odd sample count `N = 2K + 1`, so bins `k = 0..=K`
//!   carry the full signal and there is no Nyquist bin.
//! * Forward transform is unnormalized:
//!   `X_k = sum_n x_n exp(-j 2 pi k n / N)`.
//! * The grid is `Omega_k = 2 pi k / (N dt)` in rad/s.
//! * A real cosine `cos(Omega_k0 t)` lands on bin `k0` with coefficient
//!   `N / 2`, i.e. `X_k0` equals `N/2` times the analytic phasor of the
//!   signal in the `exp(+j Omega t)` convention. Multiplying `X_k` by a
//!   transfer function `Y(j Omega_k)` therefore synthesizes the filtered
//!   signal directly.
//! * Parseval: `sum_n x_n^2 = (|X_0|^2 + 2 sum_{k>=1} |X_k|^2) / N`.
//! * One-sided PSD: `S_k = |X_k|^2 dt / N`, doubled for `k >= 1`. White
//!   noise of variance `sigma^2` then shows a flat level `2 sigma^2 dt`.
//!
//! Transforms are plain `O(N^2)` with a precomputed twiddle table; records
//! stay at desk scale (`N <= 1e4`) where this costs milliseconds.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;


use crate::series::ChannelSeries;

/// Uniform angular-frequency grid `Omega_k = 2 pi k / (N dt)`, `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqGrid {
    dt: f64,
    n: usize,
    omegas: Vec<f64>,
    /// Whether bin 0 is excluded from inference. DC carries operating-point
    /// information, not fluctuation dynamics, so it defaults to excluded.
    pub dc_excluded: bool,
}

impl FreqGrid {
    /// Grid for a record of `n = 2K + 1` samples at step `dt`.
    pub fn for_record(n: usize, dt: f64) -> Self {
        debug_assert!(n >= 3 && n % 2 == 1 && dt > 0.0);
        let k = n / 2;
        let step = 2.0 * PI / (n as f64 * dt);
        let omegas = (0..=k).map(|i| i as f64 * step).collect();
        FreqGrid { dt, n, omegas, dc_excluded: true }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Record length `N = 2K + 1`.
    pub fn record_len(&self) -> usize {
        self.n
    }

    /// Number of bins, `K + 1`.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Bin indices that participate in inference.
    pub fn active_bins(&self) -> core::ops::Range<usize> {
        if self.dc_excluded {
            1..self.omegas.len()
        } else {
            0..self.omegas.len()
        }
    }
}

/// Half-spectrum of a two-channel record.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: FreqGrid,
    coeffs: [Vec<Complex64>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralError {
    /// Coefficient arrays do not match the grid length.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} spectral bins, got {got}")
            }
        }
    }
}

impl core::error::Error for SpectralError {}

impl Spectrum {
    pub fn new(
        grid: FreqGrid,
        ch1: Vec<Complex64>,
        ch2: Vec<Complex64>,
    ) -> Result<Self, SpectralError> {
        for ch in [&ch1, &ch2] {
            if ch.len() != grid.len() {
                return Err(SpectralError::DimensionMismatch {
                    expected: grid.len(),
                    got: ch.len(),
                });
            }
        }
        Ok(Spectrum { grid, coeffs: [ch1, ch2] })
    }

    pub fn channel(&self, channel: usize) -> &[Complex64] {
        &self.coeffs[channel]
    }

    pub fn channel_mut(&mut self, channel: usize) -> &mut [Complex64] {
        &mut self.coeffs[channel]
    }
}

/// Twiddle table `W[m] = exp(-j 2 pi m / N)`; `W[(k n) % N]` is the forward
/// kernel and its conjugate the inverse one.
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let phi = -2.0 * PI * m as f64 / n as f64;
            Complex64::new(phi.cos(), phi.sin())
        })
        .collect()
}

/// Forward DFT of both channels onto the half-spectrum grid.
pub fn dft(ts: &ChannelSeries) -> Spectrum {
    let n = ts.len();
    let grid = FreqGrid::for_record(n, ts.dt());
    let w = twiddles(n);
    let mut coeffs = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
    for c in 0..2 {
        let x = ts.channel(c);
        for k in 0..grid.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &xn in x {
                acc += xn * w[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            coeffs[c].push(acc);
        }
    }
    let [c1, c2] = coeffs;
    Spectrum { grid, coeffs: [c1, c2] }
}

/// Inverse of [`dft`]: real synthesis from the half spectrum,
/// `x_n = (X_0.re + 2 sum_{k>=1} Re(X_k exp(+j 2 pi k n / N))) / N`.
pub fn idft(sp: &Spectrum) -> ChannelSeries {
    let n = sp.grid.record_len();
    let w = twiddles(n);
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for c in 0..2 {
        let xk = sp.channel(c);
        for sample in 0..n {
            let mut acc = xk[0].re;
            let mut idx = 0usize;
            for coeff in xk.iter().skip(1) {
                idx += sample;
                if idx >= n {
                    idx -= n;
                }
                // conj(W[idx]) = exp(+j 2 pi k n / N)
                acc += 2.0 * (coeff.re * w[idx].re + coeff.im * w[idx].im);
            }
            out[c].push(acc / n as f64);
        }
    }
    let [c1, c2] = out;
    ChannelSeries::new(sp.grid.dt(), c1, c2, ["ch1", "ch2"])
        .expect("spectrum grid guarantees a valid record shape")
}

/// One-sided PSD of one channel on the spectrum's own grid.
pub fn psd(sp: &Spectrum, channel: usize) -> Vec<f64> {
    let n = sp.grid.record_len() as f64;
    let dt = sp.grid.dt();
    sp.channel(channel)
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let one_sided = if k == 0 { 1.0 } else { 2.0 };
            one_sided * x.norm_sqr() * dt / n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{child_rng, Stream};
    use alloc::vec;
    use rand::Rng;

    fn record(dt: f64, ch1: Vec<f64>, ch2: Vec<f64>) -> ChannelSeries {
        ChannelSeries::new(dt, ch1, ch2, ["a", "b"]).unwrap()
    }

    fn white(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = child_rng(seed, Stream::Input, 0);
        (0..n).map(|_| sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
    }

    #[test]
    fn grid_spacing_is_exact() {
        let g = FreqGrid::for_record(2001, 0.02);
        assert_eq!(g.len(), 1001);
        assert_eq!(g.omegas()[0], 0.0);
        let step = 2.0 * PI / (2001.0 * 0.02);
        for (k, &w) in g.omegas().iter().enumerate() {
            assert!((w - k as f64 * step).abs() <= 1e-12 * step.max(w));
            if k > 0 {
                assert!(w > g.omegas()[k - 1]);
            }
        }
        assert_eq!(g.active_bins(), 1..1001);
    }

    #[test]
    fn constant_record_hits_dc_only() {
        let ts = record(0.5, vec![3.0; 7], vec![0.0; 7]);
        let sp = dft(&ts);
        assert!((sp.channel(0)[0].re - 21.0).abs() < 1e-12);
        assert!(sp.channel(0)[0].im.abs() < 1e-12);
        for k in 1..sp.grid.len() {
            assert!(sp.channel(0)[k].norm() < 1e-12);
        }
    }

    #[test]
    fn single_tone_lands_on_its_bin() {
        // cos on bin k0 must give X_k0 = N/2 exactly (up to roundoff) and
        // nothing anywhere else; sin gives -j N/2.
        let n = 101;
        let k0 = 7;
        let dt = 0.1;
        let w0 = 2.0 * PI * k0 as f64 / (n as f64 * dt);
        let ch1: Vec<f64> = (0..n).map(|i| (w0 * i as f64 * dt).cos()).collect();
        let ch2: Vec<f64> = (0..n).map(|i| (w0 * i as f64 * dt).sin()).collect();
        let sp = dft(&record(dt, ch1, ch2));
        let half_n = n as f64 / 2.0;
        for k in 0..sp.grid.len() {
            let c = sp.channel(0)[k];
            let s = sp.channel(1)[k];
            if k == k0 {
                assert!((c - Complex64::new(half_n, 0.0)).norm() < 1e-9);
                assert!((s - Complex64::new(0.0, -half_n)).norm() < 1e-9);
            } else {
                assert!(c.norm() < 1e-9, "cos leakage at bin {k}");
                assert!(s.norm() < 1e-9, "sin leakage at bin {k}");
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 401;
        let ts = record(0.02, white(n, 1.0, 11), white(n, 0.3, 12));
        let back = idft(&dft(&ts));
        for c in 0..2 {
            for (a, b) in ts.channel(c).iter().zip(back.channel(c)) {
                assert!((a - b).abs() <= 1e-10, "round trip drift: {a} vs {b}");
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let n = 501;
        let ts = record(0.02, white(n, 0.7, 21), white(n, 2.0, 22));
        let sp = dft(&ts);
        for c in 0..2 {
            let time: f64 = ts.channel(c).iter().map(|x| x * x).sum();
            let mut freq = sp.channel(c)[0].norm_sqr();
            for k in 1..sp.grid.len() {
                freq += 2.0 * sp.channel(c)[k].norm_sqr();
            }
            freq /= n as f64;
            assert!(
                (time - freq).abs() <= 1e-10 * time.max(1.0),
                "parseval mismatch: {time} vs {freq}"
            );
        }
    }

    #[test]
    fn psd_white_noise_level() {
        // Flat level 2 sigma^2 dt when averaged across bins.
        let n = 4001;
        let sigma = 0.5;
        let dt = 0.02;
        let ts = record(dt, white(n, sigma, 31), white(n, sigma, 32));
        let sp = dft(&ts);
        let s = psd(&sp, 0);
        let mean: f64 = s[1..].iter().sum::<f64>() / (s.len() - 1) as f64;
        let expect = 2.0 * sigma * sigma * dt;
        assert!(
            (mean - expect).abs() < 0.1 * expect,
            "white PSD level {mean} vs {expect}"
        );
        // PSD integral over the one-sided grid recovers the variance:
        // sum_k S_k * dOmega/(2 pi) = mean square.
        let dom = sp.grid.omegas()[1] - sp.grid.omegas()[0];
        let integral: f64 = s.iter().sum::<f64>() * dom / (2.0 * PI);
        let msq: f64 = ts.channel(0).iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((integral - msq).abs() < 1e-10 * msq);
    }

    #[test]
    fn psd_of_zero_is_zero() {
        let ts = record(0.02, vec![0.0; 9], vec![0.0; 9]);
        let s = psd(&dft(&ts), 0);
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dft_is_linear() {
        let n = 201;
        let a = white(n, 1.0, 41);
        let b = white(n, 1.0, 42);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + 3.0 * y).collect();
        let sa = dft(&record(0.02, a.clone(), vec![0.0; n]));
        let sb = dft(&record(0.02, b.clone(), vec![0.0; n]));
        let ss = dft(&record(0.02, sum, vec![0.0; n]));
        for k in 0..sa.grid.len() {
            let lhs = ss.channel(0)[k];
            let rhs = 2.0 * sa.channel(0)[k] + 3.0 * sb.channel(0)[k];
            assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
