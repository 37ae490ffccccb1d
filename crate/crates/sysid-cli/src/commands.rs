//! Subcommand implementations. Each one reads a validated [`RunConfig`],
//! produces its artifacts inside one output directory, and validates every
//! JSON document against the shipped schema before writing it.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::csvio;
use crate::harness::{self, HarnessConfig, ScenarioSpec};
use crate::schema;
use crate::svg::{Chart, Series};
use crate::CliError;

const META_SCHEMA: &str = include_str!("../schemas/meta.schema.json");
const POSTERIOR_SCHEMA: &str = include_str!("../schemas/posterior.schema.json");

fn parse_schema(text: &str) -> Value {
    serde_json::from_str(text).expect("shipped schema is valid JSON")
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn write_json(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: invalid JSON: {e}", path.display())))
}

/// Synthesizes one measurement set and writes `u.csv`, `y.csv`,
/// `u_meas.csv`, `y_meas.csv`, and `meta.json`.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let hc = HarnessConfig::from_run(cfg);
    let spec = ScenarioSpec { scenario_id: 0, snr: cfg.snr, root_seed: cfg.seed };
    let data = harness::synthesize_scenario(&hc, &spec)?;

    csvio::write_series(&out_dir.join("u.csv"), &data.u)?;
    csvio::write_series(&out_dir.join("y.csv"), &data.y)?;
    csvio::write_series(&out_dir.join("u_meas.csv"), &data.u_meas)?;
    csvio::write_series(&out_dir.join("y_meas.csv"), &data.y_meas)?;

    let meta = json!({
        "model": cfg.model.as_str(),
        "seed": cfg.seed,
        "k": cfg.k,
        "dt": cfg.dt,
        "sigma_u": cfg.sigma_u,
        "snr": cfg.snr,
        "param_names": cfg.model.param_names(),
        "theta_true": hc.theta_true,
        "noise_std_u": data.noise_std_u,
        "noise_std_y": data.noise_std_y,
        "method": cfg.method.as_str(),
        "ce": serde_json::to_value(cfg.ce).expect("plain struct"),
        "qn": serde_json::to_value(cfg.qn).expect("plain struct"),
    });
    schema::require_valid(&parse_schema(META_SCHEMA), &meta, "meta.json")?;
    write_json(&out_dir.join("meta.json"), &meta)
}

fn meta_f64(meta: &Value, key: &str) -> f64 {
    meta[key].as_f64().expect("schema guarantees a number")
}

fn meta_vec(meta: &Value, key: &str) -> Vec<f64> {
    meta[key]
        .as_array()
        .expect("schema guarantees an array")
        .iter()
        .map(|v| v.as_f64().expect("schema guarantees numbers"))
        .collect()
}

fn meta_pair(meta: &Value, key: &str) -> Result<[f64; 2], CliError> {
    let v = meta_vec(meta, key);
    v.try_into().map_err(|_| CliError::Data(format!("meta.json: {key} must have 2 entries")))
}

/// Runs MAP inference against the measurement set in `dir` and writes
/// `posterior.json`, `trace.csv`, and `psd.csv` next to it.
pub fn cmd_infer(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let meta = read_json(&dir.join("meta.json"))?;
    schema::require_valid(&parse_schema(META_SCHEMA), &meta, "meta.json")?;

    let model_name = meta["model"].as_str().expect("schema guarantees a string");
    if model_name != cfg.model.as_str() {
        return Err(CliError::Data(format!(
            "meta.json was produced for model {model_name}, config says {}",
            cfg.model.as_str()
        )));
    }
    let seed = meta["seed"].as_u64().expect("schema guarantees an integer");
    let snr = meta_f64(&meta, "snr");
    let theta_true = meta_vec(&meta, "theta_true");
    let noise_std_u = meta_pair(&meta, "noise_std_u")?;
    let noise_std_y = meta_pair(&meta, "noise_std_y")?;

    let u_meas = csvio::read_series(&dir.join("u_meas.csv"))?;
    let y_meas = csvio::read_series(&dir.join("y_meas.csv"))?;
    if u_meas.len() != y_meas.len() || (u_meas.dt() - y_meas.dt()).abs() > 1e-12 * u_meas.dt() {
        return Err(CliError::Data(format!(
            "u_meas.csv ({} rows, dt {}) and y_meas.csv ({} rows, dt {}) do not describe one record",
            u_meas.len(),
            u_meas.dt(),
            y_meas.len(),
            y_meas.dt()
        )));
    }

    let theta_prior = match &cfg.prior_mean {
        Some(m) => m.clone(),
        None => harness::draw_prior_mean(seed, 0, &theta_true),
    };
    let prior_std: Vec<f64> =
        theta_true.iter().map(|t| harness::PRIOR_REL_STD * t.abs()).collect();
    let prior = harness::make_prior(cfg.model, &theta_prior, &prior_std)?;
    let pp = harness::assemble(cfg.model, &u_meas, &y_meas, noise_std_u, noise_std_y, prior)?;

    let seeds = ScenarioSpec { scenario_id: 0, snr, root_seed: seed }.seeds();
    let run = harness::optimize_map(&pp, &theta_prior, cfg.method, &cfg.ce, &cfg.qn, seeds.opt);

    let obj = pp
        .objective(&run.estimate)
        .map_err(|e| CliError::Data(format!("objective at the estimate failed: {e}")))?;
    let obj_prior = pp
        .objective(&theta_prior)
        .map_err(|e| CliError::Data(format!("objective at the prior failed: {e}")))?;
    let chi = harness::chi_square_ratio(&pp, &run.estimate)?;

    let posterior = json!({
        "model": cfg.model.as_str(),
        "seed": seed,
        "method": cfg.method.as_str(),
        "param_names": cfg.model.param_names(),
        "theta_true": theta_true,
        "theta_prior": theta_prior,
        "prior_std": prior_std,
        "theta_post": run.estimate,
        "objective": {
            "total": obj.total,
            "misfit": obj.misfit,
            "prior_penalty": obj.prior_penalty,
        },
        "objective_prior": obj_prior.total,
        "termination": harness::termination_str(run.termination),
        "iterations": run.iterations,
        "chi_square_ratio": chi,
    });
    schema::require_valid(&parse_schema(POSTERIOR_SCHEMA), &posterior, "posterior.json")?;
    write_json(&dir.join("posterior.json"), &posterior)?;

    csvio::write_trace(&dir.join("trace.csv"), &run.trace)?;

    let tables = harness::psd_report(&pp, &theta_prior, &run.estimate)?;
    let headers: Vec<String> = std::iter::once("omega_rad_s".to_string())
        .chain(tables.labels.iter().flat_map(|l| {
            [format!("meas_{l}"), format!("pred_prior_{l}"), format!("pred_post_{l}")]
        }))
        .collect();
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..tables.omegas.len())
        .map(|i| {
            vec![
                tables.omegas[i],
                tables.measured[0][i],
                tables.pred_prior[0][i],
                tables.pred_post[0][i],
                tables.measured[1][i],
                tables.pred_prior[1][i],
                tables.pred_post[1][i],
            ]
        })
        .collect();
    csvio::write_table(&dir.join("psd.csv"), &header_refs, &rows)
}

/// Monte Carlo SNR sweep: `sweep_scenarios.csv`, `sweep_aggregate.csv`, and
/// one `sweep_<param>.svg` per parameter.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let hc = HarnessConfig::from_run(cfg);
    let report = harness::snr_sweep(
        &hc,
        cfg.seed,
        &cfg.sweep.snrs,
        cfg.sweep.n_scenarios,
        &cfg.sweep.methods,
    )?;
    let rows = report.to_rows();
    csvio::write_scenario_rows(&out_dir.join("sweep_scenarios.csv"), &rows)?;
    let agg = report.aggregate();
    csvio::write_aggregate_rows(&out_dir.join("sweep_aggregate.csv"), &agg)?;

    for (j, param) in report.param_names.iter().enumerate() {
        let mut chart = Chart::new(
            &format!("{} estimates vs SNR ({})", param, cfg.model.as_str()),
            "SNR",
            param,
        );
        for method in &cfg.sweep.methods {
            let mut pts = Vec::new();
            let mut band = Vec::new();
            for &snr in &cfg.sweep.snrs {
                let a = agg
                    .iter()
                    .find(|a| a.snr == snr && a.method == method.as_str() && a.param == *param)
                    .expect("aggregate covers every cell");
                pts.push((snr, a.mean));
                band.push((snr, a.mean - a.std, a.mean + a.std));
            }
            let mut s = Series::line(method.as_str(), pts);
            s.band = Some(band);
            chart.series.push(s);
        }
        chart.hlines.push((report.theta_true[j], "true".to_string()));
        chart.write(&out_dir.join(format!("sweep_{param}.svg")))?;
    }
    Ok(())
}

/// Renders `psd_before.svg` and `psd_after.svg` from an existing `psd.csv`.
pub fn cmd_report(dir: &Path) -> Result<(), CliError> {
    let path = dir.join("psd.csv");
    let (headers, rows) = csvio::read_table(&path)?;
    if headers.len() != 7 {
        return Err(CliError::Data(format!(
            "{}: expected 7 columns, found {}",
            path.display(),
            headers.len()
        )));
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }

    let col = |i: usize| -> Vec<(f64, f64)> { rows.iter().map(|r| (r[0], r[i])).collect() };
    let chart = |title: &str, pred_offset: usize| -> Chart {
        let mut c = Chart::new(title, "omega (rad/s)", "one-sided PSD");
        c.log_y = true;
        // Column layout per channel: measured, pred_prior, pred_post.
        for base in [1, 4] {
            c.series.push(Series::line(&headers[base], col(base)));
            c.series
                .push(Series::line(&headers[base + pred_offset], col(base + pred_offset)));
        }
        c
    };
    chart("output PSD, model at the prior mean", 1).write(&dir.join("psd_before.svg"))?;
    chart("output PSD, model at the MAP estimate", 2).write(&dir.join("psd_after.svg"))
}

/// Resolution order for the output directory: explicit flag, then the
/// config's `out_dir`, then `sysid_out`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: Option<&RunConfig>) -> std::path::PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(c) = cfg {
        if let Some(d) = &c.out_dir {
            return std::path::PathBuf::from(d);
        }
    }
    std::path::PathBuf::from("sysid_out")
}
