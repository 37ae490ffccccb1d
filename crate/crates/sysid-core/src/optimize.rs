//! Derivative-free cross-entropy search and a projected quasi-Newton
//! baseline.
//!
//! Both optimizers minimize a black-box `f: R^n -> R` over a box. Objective
//! values that come back NaN or infinite are treated as "worse than
//! everything": the cross-entropy ranking pushes them to the back, the line
//! search rejects them. That lets callers map hard evaluation errors
//! (infeasible trial parameters, singular frequencies) to `f64::INFINITY`
//! instead of threading a `Result` through the hot loop.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::{child_rng, Stream};

/// Cross-entropy settings. The defaults are the workhorse values used by the
/// identification harness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CEConfig {
    /// Population size per iteration.
    pub n_samples: usize,
    /// Elite count; must satisfy `0 < n_elite <= n_samples`.
    pub n_elite: usize,
    /// Smoothing weight on the new elite statistics, in `(0, 1]`.
    pub alpha: f64,
    /// Stop when every component std falls below this.
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for CEConfig {
    fn default() -> Self {
        CEConfig { n_samples: 200, n_elite: 20, alpha: 0.7, eps: 1e-4, max_iter: 200, seed: 0 }
    }
}

/// Quasi-Newton (BFGS with finite-difference gradients and box projection)
/// settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QNConfig {
    /// Terminate when the gradient max-norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step.
    pub h_rel: f64,
}

impl Default for QNConfig {
    fn default() -> Self {
        QNConfig { tol: 1e-8, max_iter: 200, h_rel: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Spread (CE) or gradient (QN) dropped below the threshold.
    Converged,
    MaxIter,
    /// The run could not proceed: repeated all-non-finite populations, a
    /// failed line search, or a non-finite start.
    Degenerate,
}

/// One optimizer iteration as recorded in the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    /// 1-based iteration index.
    pub iter: usize,
    pub mean: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Best objective seen so far (non-increasing along the trace).
    pub best_f: f64,
    pub mean_f_elite: f64,
    pub sigma_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    /// Best point ever evaluated, always inside the box.
    pub theta_post: Vec<f64>,
    /// Objective at `theta_post`.
    pub objective_final: f64,
    pub iterations: usize,
    pub sigma_final: Vec<f64>,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptimizeError {
    InvalidConfig { reason: &'static str },
    /// A finite-difference probe hit a non-finite objective.
    NonFinite,
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::InvalidConfig { reason } => write!(f, "invalid config: {reason}"),
            OptimizeError::NonFinite => write!(f, "objective not finite at probe point"),
        }
    }
}

impl core::error::Error for OptimizeError {}

fn clip(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        if *v < lo {
            *v = lo;
        } else if *v > hi {
            *v = hi;
        }
    }
}

fn check_box(theta0: &[f64], bounds: &[(f64, f64)]) -> Result<(), OptimizeError> {
    if theta0.len() != bounds.len() {
        return Err(OptimizeError::InvalidConfig { reason: "theta0/bounds dimension mismatch" });
    }
    if bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(OptimizeError::InvalidConfig { reason: "bounds must be finite with lo < hi" });
    }
    Ok(())
}

/// Cross-entropy minimization.
///
/// Each iteration draws `n_samples` points componentwise from
/// `N(mean_j, sigma_j^2)` (sample-major order, all draws made serially up
/// front), clips them to the box, evaluates, and refits `(mean, sigma)` to
/// the `n_elite` lowest objective values, ties broken by lowest sample
/// index. Elite statistics use the biased variance and are blended with the
/// previous iteration by `alpha` (with `alpha = 1` one iteration's mean is
/// exactly the raw elite mean). The loop always runs at least one iteration
/// and stops once `max_j sigma_j < eps`, at `max_iter`, or after three
/// consecutive populations with no finite objective value.
///
/// Returns the best point ever evaluated, not the final mean: with few
/// remaining iterations the mean can still sit a smoothing step away from
/// the best sample.
pub fn cross_entropy<F>(
    mut f: F,
    theta0: &[f64],
    sigma0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &CEConfig,
) -> Result<OptResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    check_box(theta0, bounds)?;
    if sigma0.len() != theta0.len() {
        return Err(OptimizeError::InvalidConfig { reason: "sigma0 dimension mismatch" });
    }
    if sigma0.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(OptimizeError::InvalidConfig { reason: "sigma0 must be >= 0" });
    }
    if cfg.n_elite == 0 || cfg.n_elite > cfg.n_samples {
        return Err(OptimizeError::InvalidConfig { reason: "need 0 < n_elite <= n_samples" });
    }
    if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0) {
        return Err(OptimizeError::InvalidConfig { reason: "need 0 < alpha <= 1" });
    }
    if !(cfg.eps > 0.0) || cfg.max_iter == 0 {
        return Err(OptimizeError::InvalidConfig { reason: "need eps > 0 and max_iter >= 1" });
    }

    let dim = theta0.len();
    let mut rng = child_rng(cfg.seed, Stream::Opt, 0);
    let mut mean = theta0.to_vec();
    clip(&mut mean, bounds);
    let mut sigma = sigma0.to_vec();

    let mut best_x = mean.clone();
    let mut best_f = f64::INFINITY;
    let mut trace = Vec::new();
    let mut strikes = 0u32;
    let mut termination = Termination::MaxIter;
    let mut iterations = 0usize;

    let mut samples = vec![0.0_f64; cfg.n_samples * dim];
    let mut values = vec![0.0_f64; cfg.n_samples];
    let mut order: Vec<usize> = (0..cfg.n_samples).collect();

    for t in 1..=cfg.max_iter {
        iterations = t;
        for i in 0..cfg.n_samples {
            let row = &mut samples[i * dim..(i + 1) * dim];
            for (j, v) in row.iter_mut().enumerate() {
                let n: f64 = rng.sample(StandardNormal);
                *v = mean[j] + sigma[j] * n;
            }
            clip(row, bounds);
        }
        let mut any_finite = false;
        for i in 0..cfg.n_samples {
            let fi = f(&samples[i * dim..(i + 1) * dim]);
            let fi = if fi.is_nan() { f64::INFINITY } else { fi };
            values[i] = fi;
            if fi.is_finite() {
                any_finite = true;
                if fi < best_f {
                    best_f = fi;
                    best_x.copy_from_slice(&samples[i * dim..(i + 1) * dim]);
                }
            }
        }

        if !any_finite {
            strikes += 1;
            trace.push(TraceRow {
                iter: t,
                mean: mean.clone(),
                sigma: sigma.clone(),
                best_f,
                mean_f_elite: f64::INFINITY,
                sigma_max: sigma.iter().cloned().fold(0.0, f64::max),
            });
            if strikes >= 3 {
                termination = Termination::Degenerate;
                break;
            }
            continue;
        }
        strikes = 0;

        // Lowest objective first, ties broken by lowest sample index (the
        // sort key is the pair, and indices are unique).
        order.sort_unstable_by(|&a, &b| {
            values[a].partial_cmp(&values[b]).expect("NaN mapped to inf").then(a.cmp(&b))
        });
        let elite = &order[..cfg.n_elite];

        let mut mu_e = vec![0.0_f64; dim];
        for &i in elite {
            for (j, m) in mu_e.iter_mut().enumerate() {
                *m += samples[i * dim + j];
            }
        }
        for m in mu_e.iter_mut() {
            *m /= cfg.n_elite as f64;
        }
        let mut var_e = vec![0.0_f64; dim];
        for &i in elite {
            for (j, v) in var_e.iter_mut().enumerate() {
                let d = samples[i * dim + j] - mu_e[j];
                *v += d * d;
            }
        }
        let mean_f_elite = elite.iter().map(|&i| values[i]).sum::<f64>() / cfg.n_elite as f64;

        for j in 0..dim {
            let sig_e = (var_e[j] / cfg.n_elite as f64).sqrt();
            mean[j] = cfg.alpha * mu_e[j] + (1.0 - cfg.alpha) * mean[j];
            sigma[j] = cfg.alpha * sig_e + (1.0 - cfg.alpha) * sigma[j];
        }
        // Order must stay stable for the next iteration's sort.
        order.sort_unstable();

        let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
        trace.push(TraceRow {
            iter: t,
            mean: mean.clone(),
            sigma: sigma.clone(),
            best_f,
            mean_f_elite,
            sigma_max,
        });
        if sigma_max < cfg.eps {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(OptResult {
        theta_post: best_x,
        objective_final: best_f,
        iterations,
        sigma_final: sigma,
        termination,
        trace,
    })
}

/// Central-difference gradient with per-component step
/// `h_rel * max(|x_j|, 1e-8)`. Errors if any probe comes back non-finite.
pub fn fd_gradient<F>(mut f: F, x: &[f64], h_rel: f64) -> Result<Vec<f64>, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h_rel > 0.0 && h_rel.is_finite()) {
        return Err(OptimizeError::InvalidConfig { reason: "h_rel must be > 0" });
    }
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = h_rel * x[j].abs().max(1e-8);
        probe[j] = x[j] + h;
        let fp = f(&probe);
        probe[j] = x[j] - h;
        let fm = f(&probe);
        probe[j] = x[j];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(OptimizeError::NonFinite);
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// BFGS with finite-difference gradients, Armijo backtracking, and projection
/// onto the box. The standard local baseline: fast in a convex basin, stuck
/// wherever the landscape is not.
pub fn quasi_newton<F>(
    mut f: F,
    theta0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &QNConfig,
) -> Result<OptResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    check_box(theta0, bounds)?;
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(OptimizeError::InvalidConfig { reason: "need tol > 0 and max_iter >= 1" });
    }
    const C1: f64 = 1e-4;
    const MAX_BACKTRACK: u32 = 40;

    let dim = theta0.len();
    let mut x = theta0.to_vec();
    clip(&mut x, bounds);
    let mut fx = f(&x);
    let zeros = vec![0.0_f64; dim];
    let mut trace = Vec::new();
    let mut iterations = 0usize;

    if !fx.is_finite() {
        return Ok(OptResult {
            theta_post: x,
            objective_final: fx,
            iterations: 0,
            sigma_final: zeros,
            termination: Termination::Degenerate,
            trace,
        });
    }

    // Inverse Hessian approximation.
    let mut h = identity(dim);
    let mut g = match fd_gradient(&mut f, &x, cfg.h_rel) {
        Ok(g) => g,
        Err(_) => {
            return Ok(degenerate(x, fx, 0, zeros, trace));
        }
    };
    let mut termination = Termination::MaxIter;

    for t in 1..=cfg.max_iter {
        iterations = t;
        let gnorm = g.iter().cloned().fold(0.0_f64, |a, v| a.max(v.abs()));
        if gnorm < cfg.tol {
            iterations = t - 1;
            termination = Termination::Converged;
            break;
        }

        let mut d = matvec_neg(&h, &g);
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // The approximation lost descent; restart from steepest descent.
            h = identity(dim);
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }

        let mut step = 1.0_f64;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            clip(&mut xn, bounds);
            let fn_ = f(&xn);
            if fn_.is_finite() && fn_ <= fx + C1 * step * slope {
                accepted = Some((xn, fn_));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            // No acceptable step: return the best point so far.
            iterations = t - 1;
            termination = Termination::Degenerate;
            break;
        };

        let gn = match fd_gradient(&mut f, &xn, cfg.h_rel) {
            Ok(g) => g,
            Err(_) => {
                // Keep the accepted step, flag the failed gradient.
                termination = Termination::Degenerate;
                x = xn;
                fx = fn_;
                trace.push(TraceRow {
                    iter: t,
                    mean: x.clone(),
                    sigma: zeros.clone(),
                    best_f: fx,
                    mean_f_elite: fx,
                    sigma_max: 0.0,
                });
                break;
            }
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let s_norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm: f64 = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-12 * s_norm * y_norm {
            bfgs_update(&mut h, &s, &yv, sy);
        }

        x = xn;
        fx = fn_;
        g = gn;
        trace.push(TraceRow {
            iter: t,
            mean: x.clone(),
            sigma: zeros.clone(),
            best_f: fx,
            mean_f_elite: fx,
            sigma_max: 0.0,
        });
    }

    Ok(OptResult {
        theta_post: x,
        objective_final: fx,
        iterations,
        sigma_final: zeros,
        termination,
        trace,
    })
}

fn degenerate(
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    zeros: Vec<f64>,
    trace: Vec<TraceRow>,
) -> OptResult {
    OptResult {
        theta_post: x,
        objective_final: fx,
        iterations,
        sigma_final: zeros,
        termination: Termination::Degenerate,
        trace,
    }
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matvec_neg(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| -row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T` with `rho = 1/sy`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let dim = s.len();
    let rho = 1.0 / sy;
    // hy = H y, yhy = y^T H y
    let hy: Vec<f64> = h.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..dim {
        for j in 0..dim {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                + rho * rho * yhy * s[i] * s[j]
                + rho * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng64;
    use rand_chacha::rand_core::SeedableRng;

    fn quad(c: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x: &[f64]| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn wide_bounds(dim: usize) -> Vec<(f64, f64)> {
        vec![(-10.0, 10.0); dim]
    }

    #[test]
    fn ce_solves_a_convex_quadratic() {
        // sigma0 covers the minimizer; starting several sigma away instead
        // is the known premature-collapse regime for smoothed CE.
        let c = [1.0, 2.0, 3.0];
        let cfg = CEConfig {
            n_samples: 100,
            n_elite: 10,
            alpha: 0.8,
            eps: 1e-6,
            max_iter: 200,
            seed: 1,
        };
        let r = cross_entropy(quad(&c), &[0.0; 3], &[2.5; 3], &wide_bounds(3), &cfg).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        for (got, want) in r.theta_post.iter().zip(&c) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
        assert!(r.objective_final < 1e-5);
        assert_eq!(r.iterations, r.trace.len());
    }

    #[test]
    fn ce_stops_immediately_when_eps_exceeds_sigma() {
        let cfg = CEConfig { eps: 10.0, seed: 3, ..CEConfig::default() };
        let r = cross_entropy(quad(&[0.0; 2]), &[1.0; 2], &[1.0; 2], &wide_bounds(2), &cfg)
            .unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.termination, Termination::Converged);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn ce_is_deterministic() {
        let cfg = CEConfig { seed: 42, max_iter: 30, ..CEConfig::default() };
        let run = || {
            cross_entropy(quad(&[0.5, -0.5]), &[0.0; 2], &[1.0; 2], &wide_bounds(2), &cfg)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn ce_respects_bounds() {
        let bounds = vec![(0.0, 0.5); 3];
        let cfg = CEConfig { seed: 5, ..CEConfig::default() };
        let r = cross_entropy(quad(&[1.0, 2.0, 3.0]), &[0.2; 3], &[0.3; 3], &bounds, &cfg)
            .unwrap();
        for v in &r.theta_post {
            assert!((0.0..=0.5).contains(v));
        }
        // The constrained optimum is the upper corner.
        for v in &r.theta_post {
            assert!((v - 0.5).abs() < 1e-3);
        }
        for row in &r.trace {
            assert!(row.iter >= 1);
        }
    }

    #[test]
    fn ce_best_trace_is_monotone() {
        let cfg = CEConfig { seed: 9, max_iter: 40, ..CEConfig::default() };
        let r = cross_entropy(
            |x: &[f64]| (x[0].sin() * 3.0) + x[0] * x[0] * 0.1,
            &[4.0],
            &[2.0],
            &[(-8.0, 8.0)],
            &cfg,
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for row in &r.trace {
            assert!(row.best_f <= prev + 1e-15);
            prev = row.best_f;
        }
        assert_eq!(r.objective_final, r.trace.last().unwrap().best_f);
    }

    /// Replays the documented sampling order: sample-major standard normals
    /// from the `Opt` stream of the config seed, scaled and clipped.
    fn replay_samples(
        cfg: &CEConfig,
        mean: &[f64],
        sigma: &[f64],
        bounds: &[(f64, f64)],
    ) -> Vec<Vec<f64>> {
        use rand::Rng;
        let mut rng = crate::rng::child_rng(cfg.seed, Stream::Opt, 0);
        (0..cfg.n_samples)
            .map(|_| {
                let mut row: Vec<f64> = mean
                    .iter()
                    .zip(sigma)
                    .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                clip(&mut row, bounds);
                row
            })
            .collect()
    }

    #[test]
    fn ce_alpha_one_mean_is_the_raw_elite_mean() {
        let c = [0.3, -0.7];
        let cfg = CEConfig {
            n_samples: 50,
            n_elite: 7,
            alpha: 1.0,
            eps: 1e-12,
            max_iter: 1,
            seed: 11,
            ..CEConfig::default()
        };
        let bounds = wide_bounds(2);
        let theta0 = [0.0, 0.0];
        let sigma0 = [1.0, 1.0];
        let r = cross_entropy(quad(&c), &theta0, &sigma0, &bounds, &cfg).unwrap();

        let samples = replay_samples(&cfg, &theta0, &sigma0, &bounds);
        let mut idx: Vec<usize> = (0..samples.len()).collect();
        let f = quad(&c);
        idx.sort_by(|&a, &b| {
            f(&samples[a]).partial_cmp(&f(&samples[b])).unwrap().then(a.cmp(&b))
        });
        for j in 0..2 {
            let want: f64 =
                idx[..7].iter().map(|&i| samples[i][j]).sum::<f64>() / 7.0;
            assert_eq!(r.trace[0].mean[j], want);
        }
    }

    #[test]
    fn ce_ties_break_by_sample_index() {
        // Constant objective: the elite set is the first n_elite samples.
        let cfg = CEConfig {
            n_samples: 30,
            n_elite: 5,
            alpha: 1.0,
            eps: 1e-12,
            max_iter: 1,
            seed: 13,
            ..CEConfig::default()
        };
        let bounds = wide_bounds(2);
        let r = cross_entropy(|_: &[f64]| 0.0, &[0.0; 2], &[1.0; 2], &bounds, &cfg).unwrap();
        let samples = replay_samples(&cfg, &[0.0; 2], &[1.0; 2], &bounds);
        for j in 0..2 {
            let want: f64 = samples[..5].iter().map(|s| s[j]).sum::<f64>() / 5.0;
            assert_eq!(r.trace[0].mean[j], want);
        }
    }

    #[test]
    fn ce_finds_the_global_basin() {
        // min(x^2, 1 + (x-5)^2): global at 0, decoy at 5. Start in the decoy.
        let f = |x: &[f64]| (x[0] * x[0]).min(1.0 + (x[0] - 5.0) * (x[0] - 5.0));
        let cfg = CEConfig { n_samples: 500, n_elite: 50, seed: 0, ..CEConfig::default() };
        let r = cross_entropy(f, &[5.0], &[4.0], &[(-20.0, 20.0)], &cfg).unwrap();
        assert!(r.theta_post[0].abs() < 0.05, "landed at {}", r.theta_post[0]);
    }

    #[test]
    fn ce_reports_degenerate_on_hopeless_objectives() {
        let cfg = CEConfig { seed: 1, ..CEConfig::default() };
        let r = cross_entropy(|_: &[f64]| f64::NAN, &[0.0], &[1.0], &[(-1.0, 1.0)], &cfg)
            .unwrap();
        assert_eq!(r.termination, Termination::Degenerate);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.objective_final, f64::INFINITY);
    }

    #[test]
    fn ce_rejects_bad_configs() {
        let bad = CEConfig { n_elite: 0, ..CEConfig::default() };
        assert!(cross_entropy(|_: &[f64]| 0.0, &[0.0], &[1.0], &[(-1.0, 1.0)], &bad).is_err());
        let bad = CEConfig { alpha: 0.0, ..CEConfig::default() };
        assert!(cross_entropy(|_: &[f64]| 0.0, &[0.0], &[1.0], &[(-1.0, 1.0)], &bad).is_err());
        let ok = CEConfig::default();
        assert!(cross_entropy(|_: &[f64]| 0.0, &[0.0], &[1.0], &[(1.0, -1.0)], &ok).is_err());
    }

    #[test]
    fn fd_gradient_on_polynomials() {
        // Central differences are exact for quadratics up to roundoff.
        let g = fd_gradient(quad(&[1.0, -2.0]), &[2.0, 0.5], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8);
        assert!((g[1] - 5.0).abs() < 1e-8);
        let lin = |x: &[f64]| 3.0 * x[0] + 2.0 * x[1];
        let g = fd_gradient(lin, &[7.0, -4.0], 1e-6).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9);
        assert!((g[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fd_gradient_propagates_non_finite() {
        let f = |x: &[f64]| if x[0] > 1.0 { f64::NAN } else { x[0] };
        assert_eq!(fd_gradient(f, &[1.0], 1e-6), Err(OptimizeError::NonFinite));
    }

    #[test]
    fn qn_solves_a_convex_quadratic_fast() {
        let c = [1.0, 2.0, 3.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&c)
                .enumerate()
                .map(|(i, (a, b))| (i + 1) as f64 * (a - b) * (a - b))
                .sum::<f64>()
        };
        let r = quasi_newton(f, &[0.0; 3], &wide_bounds(3), &QNConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        assert_eq!(r.trace.len(), r.iterations);
        assert!(r.iterations <= 50, "took {} iterations", r.iterations);
        for (got, want) in r.theta_post.iter().zip(&c) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn qn_descends_rosenbrock() {
        let f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let cfg = QNConfig { max_iter: 500, ..QNConfig::default() };
        let r = quasi_newton(f, &[-1.2, 1.0], &wide_bounds(2), &cfg).unwrap();
        assert!(
            r.objective_final < 1e-6,
            "rosenbrock stalled at f = {}",
            r.objective_final
        );
    }

    #[test]
    fn qn_respects_bounds() {
        let bounds = vec![(-1.0, 0.5); 2];
        let r = quasi_newton(quad(&[2.0, 2.0]), &[0.0; 2], &bounds, &QNConfig::default())
            .unwrap();
        for v in &r.theta_post {
            assert!((-1.0..=0.5).contains(v));
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn qn_degenerate_on_non_finite_start() {
        let r = quasi_newton(
            |_: &[f64]| f64::INFINITY,
            &[0.0],
            &[(-1.0, 1.0)],
            &QNConfig::default(),
        )
        .unwrap();
        assert_eq!(r.termination, Termination::Degenerate);
    }

    #[test]
    fn seeded_rng_is_the_documented_stream() {
        // The replay helper in these tests assumes cross_entropy draws from
        // child_rng(seed, Opt, 0); pin that here so a silent change breaks.
        let mut a = crate::rng::child_rng(77, Stream::Opt, 0);
        let mut b = Rng64::seed_from_u64(crate::rng::child_seed(77, Stream::Opt, 0));
        use rand::RngCore;
        assert_eq!(a.next_u64(), b.next_u64());
    }
}
