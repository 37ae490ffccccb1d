//! Scenario orchestration: deterministic seed plumbing, prior draws,
//! normalized MAP optimization, Monte Carlo SNR sweeps, and PSD tables
//! for reporting.
//!
//! The normalization convention lives here, not in the core crate: the
//! optimizer always works in units of the prior mean, so `theta0 = 1`,
//! `sigma0 = 0.5` and the box `[1e-6, 4]` mean the same thing for every
//! model and operating point.

use rand::Rng as _;
use rayon::prelude::*;
use sysid_core::inference::{PosteriorProblem, Prior};
use sysid_core::optimize::{cross_entropy, quasi_newton, OptResult, Termination, TraceRow};
use sysid_core::params::ParamVec;
use sysid_core::rng::{child_rng, child_seed, Stream};
use sysid_core::series::ChannelSeries;
use sysid_core::simulate::{add_noise, ambient_input, synthesize_output, NoiseSpec};
use sysid_core::spectral::{dft, psd};

use crate::config::{CeSettings, Method, ModelKind, QnSettings, RunConfig};
use crate::csvio::{AggregateRow, ScenarioRow};
use crate::CliError;

/// Optimizer box in prior-mean units. Wide enough that the box never binds
/// on a plausible estimate, tight enough to keep samples in the model's
/// validity region.
pub const NORM_LO: f64 = 1e-6;
pub const NORM_HI: f64 = 4.0;
/// Initial CE spread in prior-mean units, matching the prior's own
/// relative width.
pub const NORM_SIGMA0: f64 = 0.5;

/// Relative prior std: sigma_j = 0.5 |theta_true_j|.
pub const PRIOR_REL_STD: f64 = 0.5;

pub fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIter => "max_iter",
        Termination::Degenerate => "degenerate",
    }
}

/// Everything a single scenario's randomness hangs off. Derivation rules:
/// the input record and the prior draw depend only on (root, scenario), so
/// every SNR point of a sweep reuses the same underlying truth; noise and
/// optimizer seeds additionally fold in the SNR so no two cells share a
/// noise realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seeds {
    pub data: u64,
    pub noise_u: u64,
    pub noise_y: u64,
    pub prior: u64,
    pub opt: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub scenario_id: u64,
    pub snr: f64,
    pub root_seed: u64,
}

impl ScenarioSpec {
    pub fn seeds(&self) -> Seeds {
        let root = self.root_seed;
        let snr_root = root ^ self.snr.to_bits();
        Seeds {
            data: child_seed(root, Stream::Input, self.scenario_id),
            noise_u: child_seed(snr_root, Stream::NoiseU, self.scenario_id),
            noise_y: child_seed(snr_root, Stream::NoiseY, self.scenario_id),
            prior: child_seed(root, Stream::Prior, self.scenario_id),
            opt: child_seed(snr_root, Stream::Opt, self.scenario_id),
        }
    }
}

/// Prior mean for a scenario: componentwise uniform in
/// `[0.5, 1.5) x theta_true`. Depends on (root, scenario) only.
pub fn draw_prior_mean(root_seed: u64, scenario_id: u64, theta_true: &[f64]) -> Vec<f64> {
    let mut rng = child_rng(root_seed, Stream::Prior, scenario_id);
    theta_true.iter().map(|&t| t * (0.5 + rng.random::<f64>())).collect()
}

/// Prior with the workspace's std rule and wide feasibility bounds. `std`
/// entries must be positive; pass `0.5 |theta_true|` unless a config says
/// otherwise.
pub fn make_prior(model: ModelKind, mean: &[f64], std: &[f64]) -> Result<Prior, CliError> {
    let names = model.param_names();
    if mean.len() != names.len() || std.len() != names.len() {
        return Err(CliError::Config(format!(
            "prior_mean needs {} entries for model {}",
            names.len(),
            model.as_str()
        )));
    }
    for (name, &m) in names.iter().zip(mean) {
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::Config(format!("prior_mean: {name} must be finite and > 0")));
        }
    }
    let entries: Vec<(&str, f64, f64, f64)> =
        names.iter().zip(mean).map(|(n, &m)| (n.as_str(), m, 1e-12, 1e12)).collect();
    let pv = ParamVec::new(&entries)
        .map_err(|e| CliError::Config(format!("prior_mean: {e}")))?;
    let variances: Vec<f64> = std.iter().map(|s| s * s).collect();
    Prior::new(pv, variances).map_err(|e| CliError::Config(format!("prior: {e}")))
}

/// Assembles the posterior problem from measured records and known noise
/// levels. This is the only place the CLI crosses from time series into the
/// frequency domain.
pub fn assemble(
    model: ModelKind,
    u_meas: &ChannelSeries,
    y_meas: &ChannelSeries,
    noise_std_u: [f64; 2],
    noise_std_y: [f64; 2],
    prior: Prior,
) -> Result<PosteriorProblem, CliError> {
    let su = dft(u_meas);
    let sy = dft(y_meas);
    PosteriorProblem::new(model.build(), &su, &sy, noise_std_u, noise_std_y, prior)
        .map_err(|e| CliError::Data(format!("cannot assemble posterior: {e}")))
}

/// Whitened misfit per residual degree of freedom; ~1 at the true
/// parameters when the noise model is honest.
pub fn chi_square_ratio(pp: &PosteriorProblem, theta: &[f64]) -> Result<f64, CliError> {
    let obj = pp
        .objective(theta)
        .map_err(|e| CliError::Data(format!("objective failed: {e}")))?;
    Ok(obj.misfit / (4.0 * pp.active_bins().len() as f64))
}

/// One MAP optimization in physical units. The trace stays in normalized
/// units (objective values are normalization-invariant).
#[derive(Clone, Debug, PartialEq)]
pub struct MapRun {
    pub estimate: Vec<f64>,
    pub objective_final: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

/// Runs `method` on the posterior from the prior mean. Optimizer-reported
/// failures degrade to a `Degenerate` run at the prior mean rather than an
/// error: in a sweep every cell must produce a row.
pub fn optimize_map(
    pp: &PosteriorProblem,
    theta_prior: &[f64],
    method: Method,
    ce: &CeSettings,
    qn: &QnSettings,
    opt_seed: u64,
) -> MapRun {
    let scale: Vec<f64> = theta_prior.iter().map(|p| p.abs()).collect();
    let dim = scale.len();
    let f = |z: &[f64]| -> f64 {
        let theta: Vec<f64> = z.iter().zip(&scale).map(|(zi, s)| zi * s).collect();
        match pp.objective(&theta) {
            Ok(v) => v.total,
            Err(_) => f64::INFINITY,
        }
    };
    let theta0 = vec![1.0_f64; dim];
    let bounds = vec![(NORM_LO, NORM_HI); dim];
    let res: Result<OptResult, _> = match method {
        Method::Ce => {
            let sigma0 = vec![NORM_SIGMA0; dim];
            cross_entropy(f, &theta0, &sigma0, &bounds, &ce.to_config(opt_seed))
        }
        Method::Qn => quasi_newton(f, &theta0, &bounds, &qn.to_config()),
    };
    match res {
        Ok(r) => MapRun {
            estimate: r.theta_post.iter().zip(&scale).map(|(z, s)| z * s).collect(),
            objective_final: r.objective_final,
            iterations: r.iterations,
            termination: r.termination,
            trace: r.trace,
        },
        Err(_) => MapRun {
            estimate: theta_prior.to_vec(),
            objective_final: pp.objective(theta_prior).map(|v| v.total).unwrap_or(f64::INFINITY),
            iterations: 0,
            termination: Termination::Degenerate,
            trace: Vec::new(),
        },
    }
}

/// Static inputs of a sweep; per-scenario randomness comes from
/// [`ScenarioSpec`].
#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub model: ModelKind,
    pub theta_true: Vec<f64>,
    pub k: usize,
    pub dt: f64,
    pub sigma_u: f64,
    pub ce: CeSettings,
    pub qn: QnSettings,
}

impl HarnessConfig {
    pub fn from_run(cfg: &RunConfig) -> Self {
        HarnessConfig {
            model: cfg.model,
            theta_true: cfg.resolved_theta_true(),
            k: cfg.k,
            dt: cfg.dt,
            sigma_u: cfg.sigma_u,
            ce: cfg.ce,
            qn: cfg.qn,
        }
    }
}

/// Synthetic measurement set for one scenario: the clean records and their
/// noisy counterparts.
pub struct ScenarioData {
    pub u: ChannelSeries,
    pub y: ChannelSeries,
    pub u_meas: ChannelSeries,
    pub y_meas: ChannelSeries,
    pub noise_std_u: [f64; 2],
    pub noise_std_y: [f64; 2],
}

/// Truth -> records -> noise, all from the scenario's named seeds.
pub fn synthesize_scenario(hc: &HarnessConfig, spec: &ScenarioSpec) -> Result<ScenarioData, CliError> {
    let seeds = spec.seeds();
    let model = hc.model.build();
    let u = ambient_input(hc.k, hc.dt, hc.sigma_u, seeds.data)
        .map_err(|e| CliError::Config(format!("input synthesis failed: {e}")))?;
    let y = synthesize_output(model.as_ref(), &hc.theta_true, &u)
        .map_err(|e| CliError::Config(format!("output synthesis failed: {e}")))?;
    let (u_meas, noise_std_u) = add_noise(&u, &NoiseSpec { snr: spec.snr, seed: seeds.noise_u })
        .map_err(|e| CliError::Config(format!("input noise failed: {e}")))?;
    let (y_meas, noise_std_y) = add_noise(&y, &NoiseSpec { snr: spec.snr, seed: seeds.noise_y })
        .map_err(|e| CliError::Config(format!("output noise failed: {e}")))?;
    Ok(ScenarioData { u, y, u_meas, y_meas, noise_std_u, noise_std_y })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioResult {
    pub scenario_id: u64,
    pub snr: f64,
    pub method: Method,
    pub theta_prior: Vec<f64>,
    pub estimate: Vec<f64>,
    pub objective_final: f64,
    pub termination: Termination,
}

/// One sweep cell end to end. Synthesis errors are hard errors (they mean
/// the configuration is unusable); optimizer failures come back as
/// degenerate rows via [`optimize_map`].
pub fn run_scenario(
    hc: &HarnessConfig,
    spec: &ScenarioSpec,
    method: Method,
) -> Result<ScenarioResult, CliError> {
    let seeds = spec.seeds();
    let data = synthesize_scenario(hc, spec)?;
    let theta_prior = draw_prior_mean(spec.root_seed, spec.scenario_id, &hc.theta_true);
    let std: Vec<f64> = hc.theta_true.iter().map(|t| PRIOR_REL_STD * t.abs()).collect();
    let prior = make_prior(hc.model, &theta_prior, &std)?;
    let pp = assemble(hc.model, &data.u_meas, &data.y_meas, data.noise_std_u, data.noise_std_y, prior)?;
    let run = optimize_map(&pp, &theta_prior, method, &hc.ce, &hc.qn, seeds.opt);
    Ok(ScenarioResult {
        scenario_id: spec.scenario_id,
        snr: spec.snr,
        method,
        theta_prior,
        estimate: run.estimate,
        objective_final: run.objective_final,
        termination: run.termination,
    })
}

pub struct SweepReport {
    pub param_names: Vec<String>,
    pub theta_true: Vec<f64>,
    pub results: Vec<ScenarioResult>,
}

/// Full Monte Carlo sweep over `snrs x scenarios x methods`, parallel over
/// cells, deterministic in content and order regardless of thread count.
pub fn snr_sweep(
    hc: &HarnessConfig,
    root_seed: u64,
    snrs: &[f64],
    n_scenarios: usize,
    methods: &[Method],
) -> Result<SweepReport, CliError> {
    let mut cells: Vec<(ScenarioSpec, Method)> = Vec::new();
    for &snr in snrs {
        for id in 0..n_scenarios as u64 {
            for &method in methods {
                cells.push((ScenarioSpec { scenario_id: id, snr, root_seed }, method));
            }
        }
    }
    let results: Result<Vec<ScenarioResult>, CliError> = cells
        .par_iter()
        .map(|(spec, method)| run_scenario(hc, spec, *method))
        .collect();
    Ok(SweepReport {
        param_names: hc.model.param_names(),
        theta_true: hc.theta_true.clone(),
        results: results?,
    })
}

impl SweepReport {
    /// One CSV row per (cell, parameter), in cell order.
    pub fn to_rows(&self) -> Vec<ScenarioRow> {
        let mut rows = Vec::with_capacity(self.results.len() * self.param_names.len());
        for r in &self.results {
            for (j, name) in self.param_names.iter().enumerate() {
                rows.push(ScenarioRow {
                    snr: r.snr,
                    method: r.method.as_str().to_string(),
                    scenario: r.scenario_id,
                    param: name.clone(),
                    true_value: self.theta_true[j],
                    prior_mean: r.theta_prior[j],
                    estimate: r.estimate[j],
                    termination: termination_str(r.termination).to_string(),
                });
            }
        }
        rows
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        aggregate_rows(&self.to_rows())
    }
}

/// Mean and unbiased std of the estimates per (snr, method, param), in
/// first-appearance order. Works off the row table itself so an aggregate
/// recomputed from the CSV on disk matches this one exactly.
pub fn aggregate_rows(rows: &[ScenarioRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(f64, String, String)> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let key = (r.snr, r.method.clone(), r.param.clone());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r.estimate),
            None => {
                keys.push(key);
                groups.push(vec![r.estimate]);
            }
        }
    }
    keys.into_iter()
        .zip(groups)
        .map(|((snr, method, param), vals)| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            AggregateRow { snr, method, param, mean, std }
        })
        .collect()
}

/// Per-channel one-sided PSDs of the measured output and of the model
/// prediction at two parameter points, on the active grid (DC dropped).
pub struct PsdTables {
    pub omegas: Vec<f64>,
    pub labels: [String; 2],
    pub measured: [Vec<f64>; 2],
    pub pred_prior: [Vec<f64>; 2],
    pub pred_post: [Vec<f64>; 2],
}

pub fn psd_report(
    pp: &PosteriorProblem,
    theta_prior: &[f64],
    theta_post: &[f64],
) -> Result<PsdTables, CliError> {
    let meas = pp.measured_output();
    let prior = pp
        .predicted_output(theta_prior)
        .map_err(|e| CliError::Data(format!("prediction at the prior failed: {e}")))?;
    let post = pp
        .predicted_output(theta_post)
        .map_err(|e| CliError::Data(format!("prediction at the estimate failed: {e}")))?;
    let active: Vec<usize> = pp.active_bins().to_vec();
    let take = |spec: &sysid_core::spectral::Spectrum, c: usize| -> Vec<f64> {
        let full = psd(spec, c);
        active.iter().map(|&k| full[k]).collect()
    };
    let omegas: Vec<f64> = active.iter().map(|&k| pp.grid().omegas()[k]).collect();
    let labels = pp.model().output_labels();
    Ok(PsdTables {
        omegas,
        labels: [labels[0].to_string(), labels[1].to_string()],
        measured: [take(&meas, 0), take(&meas, 1)],
        pred_prior: [take(&prior, 0), take(&prior, 1)],
        pred_post: [take(&post, 0), take(&post, 1)],
    })
}

impl PsdTables {
    /// `sum |pred - measured| d_omega` over both channels: the scalar used
    /// to compare fit quality before and after inference.
    pub fn misfit_integral(&self, pred: &[Vec<f64>; 2]) -> f64 {
        let domega = self.omegas.first().copied().unwrap_or(1.0);
        let mut total = 0.0;
        for c in 0..2 {
            for (p, m) in pred[c].iter().zip(&self.measured[c]) {
                total += (p - m).abs();
            }
        }
        total * domega
    }

    pub fn misfit_prior(&self) -> f64 {
        self.misfit_integral(&self.pred_prior)
    }

    pub fn misfit_post(&self) -> f64 {
        self.misfit_integral(&self.pred_post)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_harness() -> HarnessConfig {
        HarnessConfig {
            model: ModelKind::Generator,
            theta_true: ModelKind::Generator.reference_theta(),
            k: 48,
            dt: 0.02,
            sigma_u: 0.01,
            ce: CeSettings { n_samples: 40, n_elite: 8, alpha: 0.7, eps: 1e-3, max_iter: 25 },
            qn: QnSettings { tol: 1e-6, max_iter: 60, h_rel: 1e-6 },
        }
    }

    #[test]
    fn seeds_reuse_truth_across_snr_but_not_noise() {
        let a = ScenarioSpec { scenario_id: 3, snr: 5.0, root_seed: 7 }.seeds();
        let b = ScenarioSpec { scenario_id: 3, snr: 20.0, root_seed: 7 }.seeds();
        assert_eq!(a.data, b.data);
        assert_eq!(a.prior, b.prior);
        assert_ne!(a.noise_u, b.noise_u);
        assert_ne!(a.noise_y, b.noise_y);
        assert_ne!(a.opt, b.opt);
        let c = ScenarioSpec { scenario_id: 4, snr: 5.0, root_seed: 7 }.seeds();
        assert_ne!(a.data, c.data);
        assert_ne!(a.prior, c.prior);
    }

    #[test]
    fn prior_draw_is_within_half_to_three_halves_of_truth() {
        let truth = [0.25, 1.0, 1.0, 0.01];
        for id in 0..50 {
            let m = draw_prior_mean(11, id, &truth);
            for (mj, tj) in m.iter().zip(&truth) {
                let f = mj / tj;
                assert!((0.5..1.5).contains(&f), "factor {f} out of range");
            }
        }
        assert_eq!(draw_prior_mean(11, 5, &truth), draw_prior_mean(11, 5, &truth));
        assert_ne!(draw_prior_mean(11, 5, &truth), draw_prior_mean(11, 6, &truth));
    }

    #[test]
    fn run_scenario_is_deterministic() {
        let hc = tiny_harness();
        let spec = ScenarioSpec { scenario_id: 0, snr: 10.0, root_seed: 42 };
        let a = run_scenario(&hc, &spec, Method::Ce).unwrap();
        let b = run_scenario(&hc, &spec, Method::Ce).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimate.len(), 4);
        assert!(a.objective_final.is_finite());
    }

    #[test]
    fn sweep_has_a_row_per_cell_and_aggregate_matches_a_recompute() {
        let hc = tiny_harness();
        let snrs = [5.0, 20.0];
        let methods = [Method::Ce, Method::Qn];
        let report = snr_sweep(&hc, 1, &snrs, 3, &methods).unwrap();
        assert_eq!(report.results.len(), 2 * 3 * 2);
        let rows = report.to_rows();
        assert_eq!(rows.len(), report.results.len() * 4);
        // Cell order: snr-major, then scenario, then method.
        assert_eq!(rows[0].snr, 5.0);
        assert_eq!(rows[0].method, "ce");
        assert_eq!(rows[4].method, "qn");
        let agg = report.aggregate();
        assert_eq!(agg.len(), 2 * 2 * 4);
        assert_eq!(agg, aggregate_rows(&rows));
        // Spot-check one group against a direct computation.
        let g = &agg[0];
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.snr == g.snr && r.method == g.method && r.param == g.param)
            .map(|r| r.estimate)
            .collect();
        assert_eq!(vals.len(), 3);
        let mean = vals.iter().sum::<f64>() / 3.0;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 2.0;
        assert_eq!(g.mean, mean);
        assert_eq!(g.std, var.sqrt());
    }

    #[test]
    fn psd_tables_shrink_the_misfit_at_the_truth() {
        let hc = tiny_harness();
        let spec = ScenarioSpec { scenario_id: 0, snr: 1e9, root_seed: 3 };
        let data = synthesize_scenario(&hc, &spec).unwrap();
        let prior_mean: Vec<f64> = hc.theta_true.iter().map(|t| 1.3 * t).collect();
        let std: Vec<f64> = hc.theta_true.iter().map(|t| PRIOR_REL_STD * t).collect();
        let prior = make_prior(hc.model, &prior_mean, &std).unwrap();
        let pp = assemble(hc.model, &data.u_meas, &data.y_meas, data.noise_std_u, data.noise_std_y, prior)
            .unwrap();
        let t = psd_report(&pp, &prior_mean, &hc.theta_true).unwrap();
        assert_eq!(t.omegas.len(), hc.k);
        assert_eq!(t.measured[0].len(), hc.k);
        // At SNR 1e9 the prediction at the truth is the measurement up to
        // noise of relative size ~1e-9.
        assert!(t.misfit_post() < 1e-6 * t.misfit_prior(), "post {} prior {}", t.misfit_post(), t.misfit_prior());
    }

    #[test]
    fn degenerate_cells_fall_back_to_the_prior() {
        let hc = tiny_harness();
        let spec = ScenarioSpec { scenario_id: 1, snr: 10.0, root_seed: 9 };
        let data = synthesize_scenario(&hc, &spec).unwrap();
        let prior_mean = draw_prior_mean(9, 1, &hc.theta_true);
        let std: Vec<f64> = hc.theta_true.iter().map(|t| PRIOR_REL_STD * t).collect();
        let prior = make_prior(hc.model, &prior_mean, &std).unwrap();
        let pp = assemble(hc.model, &data.u_meas, &data.y_meas, data.noise_std_u, data.noise_std_y, prior)
            .unwrap();
        // An unusable optimizer config cannot start; the cell still reports.
        let bad = CeSettings { n_elite: 0, ..hc.ce };
        let run = optimize_map(&pp, &prior_mean, Method::Ce, &bad, &hc.qn, 0);
        assert_eq!(run.termination, Termination::Degenerate);
        assert_eq!(run.estimate, prior_mean);
        assert!(run.objective_final.is_finite());
    }
}
