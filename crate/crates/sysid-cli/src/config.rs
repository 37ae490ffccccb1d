//! Run configuration: one JSON file drives every subcommand. Unknown keys
//! are rejected, every default is echoed back into output metadata, and all
//! module preconditions are checked at load time so failures are immediate
//! and name the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sysid_core::model::{AdmittanceModel, GenParams, GeneratorModel, MotorModel, MotorParams};
use sysid_core::optimize::{CEConfig, QNConfig};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Generator,
    Motor,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Generator => "generator",
            ModelKind::Motor => "motor",
        }
    }

    /// Model at the reference operating point / boundary data.
    pub fn build(&self) -> Box<dyn AdmittanceModel> {
        match self {
            ModelKind::Generator => Box::new(GeneratorModel::reference()),
            ModelKind::Motor => Box::new(MotorModel::reference()),
        }
    }

    /// Reference true parameters, in the model's canonical order.
    pub fn reference_theta(&self) -> Vec<f64> {
        match self {
            ModelKind::Generator => {
                let p = GenParams::reference();
                vec![p.d, p.e_prime, p.m, p.xd_prime]
            }
            ModelKind::Motor => {
                let p = MotorParams::reference();
                vec![p.h, p.r, p.x, p.pm]
            }
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        self.build().param_names().iter().map(|s| s.to_string()).collect()
    }

    /// Cheap feasibility check of a candidate parameter vector, used to
    /// reject bad configs before any simulation starts.
    pub fn check_theta(&self, theta: &[f64]) -> Result<(), String> {
        match self {
            ModelKind::Generator => {
                GenParams::from_slice(theta).map(|_| ()).map_err(|e| e.to_string())
            }
            ModelKind::Motor => {
                if theta.len() != 4 {
                    return Err(format!("expected 4 parameters, got {}", theta.len()));
                }
                let mp = MotorModel::reference();
                mp.params(theta).map(|_| ()).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ce,
    Qn,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ce => "ce",
            Method::Qn => "qn",
        }
    }
}

/// Cross-entropy settings as they appear in config files; `seed` comes from
/// the run, bounds from the prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CeSettings {
    pub n_samples: usize,
    pub n_elite: usize,
    pub alpha: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for CeSettings {
    fn default() -> Self {
        let c = CEConfig::default();
        CeSettings {
            n_samples: c.n_samples,
            n_elite: c.n_elite,
            alpha: c.alpha,
            eps: c.eps,
            max_iter: c.max_iter,
        }
    }
}

impl CeSettings {
    pub fn to_config(self, seed: u64) -> CEConfig {
        CEConfig {
            n_samples: self.n_samples,
            n_elite: self.n_elite,
            alpha: self.alpha,
            eps: self.eps,
            max_iter: self.max_iter,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QnSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub h_rel: f64,
}

impl Default for QnSettings {
    fn default() -> Self {
        let c = QNConfig::default();
        QnSettings { tol: c.tol, max_iter: c.max_iter, h_rel: c.h_rel }
    }
}

impl QnSettings {
    pub fn to_config(self) -> QNConfig {
        QNConfig { tol: self.tol, max_iter: self.max_iter, h_rel: self.h_rel }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    pub snrs: Vec<f64>,
    pub n_scenarios: usize,
    pub methods: Vec<Method>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            snrs: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            n_scenarios: 50,
            methods: vec![Method::Ce, Method::Qn],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub seed: u64,
    /// Half-spectrum size; records have 2k+1 samples.
    #[serde(default = "defaults::k")]
    pub k: usize,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Std of the ambient input fluctuations.
    #[serde(default = "defaults::sigma_u")]
    pub sigma_u: f64,
    #[serde(default = "defaults::snr")]
    pub snr: f64,
    /// Defaults to the model's reference parameters.
    #[serde(default)]
    pub theta_true: Option<Vec<f64>>,
    /// Defaults to a seeded draw uniform in [0.5, 1.5] x theta_true.
    #[serde(default)]
    pub prior_mean: Option<Vec<f64>>,
    #[serde(default = "defaults::method")]
    pub method: Method,
    #[serde(default)]
    pub ce: CeSettings,
    #[serde(default)]
    pub qn: QnSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub out_dir: Option<String>,
}

mod defaults {
    use super::Method;

    pub fn k() -> usize {
        1000
    }
    pub fn dt() -> f64 {
        0.02
    }
    pub fn sigma_u() -> f64 {
        0.01
    }
    pub fn snr() -> f64 {
        10.0
    }
    pub fn method() -> Method {
        Method::Ce
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every module precondition up front; the message names the
    /// offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.k < 1 {
            return bad(format!("k must be >= 1, got {}", self.k));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be finite and > 0, got {}", self.dt));
        }
        if !(self.sigma_u.is_finite() && self.sigma_u > 0.0) {
            return bad(format!("sigma_u must be finite and > 0, got {}", self.sigma_u));
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return bad(format!("snr must be finite and > 0, got {}", self.snr));
        }
        if let Some(t) = &self.theta_true {
            self.model.check_theta(t).map_err(|e| CliError::Config(format!("theta_true: {e}")))?;
        }
        if let Some(p) = &self.prior_mean {
            self.model.check_theta(p).map_err(|e| CliError::Config(format!("prior_mean: {e}")))?;
        }
        if self.ce.n_elite == 0 || self.ce.n_elite > self.ce.n_samples {
            return bad(format!(
                "ce.n_elite must satisfy 1 <= n_elite <= n_samples, got {} of {}",
                self.ce.n_elite, self.ce.n_samples
            ));
        }
        if !(self.ce.alpha > 0.0 && self.ce.alpha <= 1.0) {
            return bad(format!("ce.alpha must be in (0, 1], got {}", self.ce.alpha));
        }
        if !(self.ce.eps > 0.0) {
            return bad(format!("ce.eps must be > 0, got {}", self.ce.eps));
        }
        if self.ce.max_iter == 0 {
            return bad("ce.max_iter must be >= 1, got 0".to_string());
        }
        if !(self.qn.tol > 0.0) {
            return bad(format!("qn.tol must be > 0, got {}", self.qn.tol));
        }
        if self.qn.max_iter == 0 {
            return bad("qn.max_iter must be >= 1, got 0".to_string());
        }
        if !(self.qn.h_rel > 0.0 && self.qn.h_rel.is_finite()) {
            return bad(format!("qn.h_rel must be finite and > 0, got {}", self.qn.h_rel));
        }
        if self.sweep.snrs.is_empty() {
            return bad("sweep.snrs must not be empty".to_string());
        }
        if let Some(s) = self.sweep.snrs.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return bad(format!("sweep.snrs entries must be finite and > 0, got {s}"));
        }
        if self.sweep.n_scenarios < 2 {
            return bad(format!("sweep.n_scenarios must be >= 2, got {}", self.sweep.n_scenarios));
        }
        if self.sweep.methods.is_empty() {
            return bad("sweep.methods must not be empty".to_string());
        }
        Ok(())
    }

    pub fn resolved_theta_true(&self) -> Vec<f64> {
        self.theta_true.clone().unwrap_or_else(|| self.model.reference_theta())
    }
}
