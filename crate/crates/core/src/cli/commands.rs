use std::io::Write;

use serde::Serialize;
use serde_json::json;

use super::config::{Format, RunConfig};
use super::CliError;
use crate::bogoliubov::{self, BogoliubovParams};
use crate::dispersion::{
    default_hump_bracket, find_hump, find_k_h, DispersionError, DispersionModel, FrequencyLaw,
    Hump,
};
use crate::numeric::{fmt17, linspace, logspace};
use crate::quadrature::Interpretation;
use crate::reconstruct::{self, Normalization, SignMode};
use crate::spectra::{self, BetaMode, BetaWeighting, PhysicalScales, ScanRow};

const LOG_START: f64 = 1e-6;
const LOG_END: f64 = 1e-2;
const UNBOUNDED_CURVE_END: f64 = 10.0;

#[derive(Debug, Serialize)]
struct Flags {
    interpretation: Interpretation,
    beta_mode: BetaMode,
    sign: SignMode,
    normalization: Normalization,
}

fn flags(cfg: &RunConfig) -> Flags {
    let spectra = cfg.spectra.unwrap_or_default();
    let (sign, normalization) = match &cfg.reconstruction {
        Some(r) => (r.sign_mode, r.normalization),
        None => (SignMode::Growing, Normalization::SecondDerivative),
    };
    Flags {
        interpretation: cfg.quadrature.interpretation,
        beta_mode: spectra.beta_mode,
        sign,
        normalization,
    }
}

fn model(cfg: &RunConfig) -> Result<&DispersionModel, CliError> {
    let m = cfg
        .model
        .as_ref()
        .ok_or_else(|| CliError::Config("a `model` block is required".into()))?;
    m.validate()?;
    Ok(m)
}

fn scales(cfg: &RunConfig) -> Result<Option<&PhysicalScales>, CliError> {
    if let Some(s) = &cfg.scales {
        s.validate()?;
    }
    Ok(cfg.scales.as_ref())
}

/// JSON report: the payload plus the resolved config and flags in effect.
fn report<T: Serialize>(cfg: &RunConfig, key: &str, payload: T) -> Result<Vec<u8>, CliError> {
    let doc = json!({
        "config": cfg,
        "flags": flags(cfg),
        key: payload,
    });
    let mut buf = serde_json::to_vec_pretty(&doc).map_err(std::io::Error::from)?;
    buf.push(b'\n');
    Ok(buf)
}

fn format(cfg: &RunConfig, default: Format) -> Format {
    cfg.output.format.unwrap_or(default)
}

/// Composite sampling grid: k = 0, log-spaced momenta on
/// [1e-6·k_p, 1e-2·k_p], then linear spacing up to `end`. Two samples give
/// the endpoints only.
pub fn curve_grid(k_p: f64, end: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => return Vec::new(),
        1 => return vec![0.0],
        2 => return vec![0.0, end],
        _ => {}
    }
    let (lo, mid) = (LOG_START * k_p, LOG_END * k_p);
    if mid >= end {
        return linspace(0.0, end, samples);
    }
    let rest = samples - 1;
    let n_log = (rest / 2).max(1);
    let n_lin = rest - n_log;
    let mut grid = Vec::with_capacity(samples);
    grid.push(0.0);
    if n_lin == 0 {
        grid.push(end);
        return grid;
    }
    grid.extend(logspace(lo, mid, n_log));
    // the linear part starts one step above the log part's last point
    let step = (end - mid) / n_lin as f64;
    grid.extend((1..=n_lin).map(|i| if i == n_lin { end } else { mid + step * i as f64 }));
    grid
}

#[derive(Debug, Serialize)]
struct CurveRow {
    k: f64,
    omega: f64,
    omega_squared: f64,
    is_hump: bool,
}

pub(super) fn dispersion_curve(cfg: &RunConfig, samples: Option<usize>) -> Result<Vec<u8>, CliError> {
    let law = model(cfg)?;
    let curve = cfg.curve.unwrap_or_default();
    let samples = samples.unwrap_or(curve.samples);
    if samples < 2 {
        return Err(CliError::Config(format!("samples = {samples}; need at least 2")));
    }
    let k_p = law.k_p();
    let end = match curve.k_hi {
        Some(k) => k,
        None => law.spectral_end().unwrap_or(UNBOUNDED_CURVE_END * k_p),
    };
    let mut grid = curve_grid(k_p, end, samples);

    let hump = if samples >= 3 {
        let bracket = cfg.hump.and_then(|h| h.bracket).map(|[a, b]| (a, b));
        match find_hump(law, bracket.or_else(|| Some(clip(default_hump_bracket(law), end)))) {
            Ok(h) => Some(h),
            Err(DispersionError::NoInteriorMaximum { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    if let Some(h) = hump {
        if !grid.contains(&h.k_star) {
            let pos = grid.partition_point(|&k| k < h.k_star);
            grid.insert(pos, h.k_star);
        }
        log::info!("hump at k = {}", h.k_star);
    }

    let rows = grid
        .iter()
        .map(|&k| {
            let w2 = law.omega_squared(k)?;
            Ok(CurveRow {
                k,
                omega: w2.max(0.0).sqrt(),
                omega_squared: w2,
                is_hump: hump.is_some_and(|h: Hump| h.k_star == k),
            })
        })
        .collect::<Result<Vec<_>, DispersionError>>()?;

    match format(cfg, Format::Csv) {
        Format::Json => report(cfg, "curve", rows),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "k,omega,omega_squared,is_hump")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt17(r.k),
                    fmt17(r.omega),
                    fmt17(r.omega_squared),
                    u8::from(r.is_hump)
                )?;
            }
            Ok(out)
        }
    }
}

fn clip((lo, hi): (f64, f64), end: f64) -> (f64, f64) {
    (lo, hi.min(end))
}

fn beta_weighting(cfg: &RunConfig) -> BetaWeighting {
    cfg.spectra.unwrap_or_default().weighting(cfg.bogoliubov)
}

pub(super) fn ratio(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let law = model(cfg)?;
    let spectra = cfg.spectra.unwrap_or_default();
    let rep = spectra::tail_total_ratio(
        law,
        scales(cfg)?,
        spectra.k_h,
        &beta_weighting(cfg),
        &cfg.quadrature,
        spectra.k_max,
    )?;
    log::info!("ratio = {} (k_H = {}, k_end = {})", rep.ratio, rep.k_h, rep.k_end);
    match format(cfg, Format::Json) {
        Format::Json => report(cfg, "ratio", rep),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "rho_tail,rho_total,ratio,k_h,k_end,interpretation,beta_mode,est_error")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt17(rep.rho_tail),
                fmt17(rep.rho_total),
                fmt17(rep.ratio),
                fmt17(rep.k_h),
                fmt17(rep.k_end),
                rep.interpretation.as_str(),
                rep.beta_mode.as_str(),
                fmt17(rep.est_error)
            )?;
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
struct ScanJsonRow<'a> {
    beta: f64,
    #[serde(rename = "L")]
    exponent: f64,
    k_h_over_kp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a spectra::RatioReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

pub(super) fn scan(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let spec = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("a `scan` block is required".into()))?;
    let rows: Vec<ScanRow> = spectra::ratio_scan(spec, &beta_weighting(cfg), &cfg.quadrature);
    for r in &rows {
        if let Err(e) = &r.outcome {
            log::warn!("scan cell beta={} L={} failed: {e}", r.beta, r.exponent);
        }
    }
    match format(cfg, Format::Csv) {
        Format::Csv => {
            let mut out = Vec::new();
            spectra::write_scan_csv(&rows, &mut out)?;
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<ScanJsonRow> = rows
                .iter()
                .map(|r| ScanJsonRow {
                    beta: r.beta,
                    exponent: r.exponent,
                    k_h_over_kp: r.kh_over_kp,
                    report: r.outcome.as_ref().ok(),
                    error: r.outcome.as_ref().err().map(String::as_str),
                })
                .collect();
            report(cfg, "scan", rows)
        }
    }
}

#[derive(Debug, Serialize)]
struct BogoliubovRow {
    k: f64,
    omega_hat_plus: f64,
    omega_hat_minus: f64,
    gamma: f64,
    beta_k_squared: f64,
}

pub(super) fn bogoliubov(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let p: BogoliubovParams = cfg.bogoliubov.unwrap_or_default();
    p.validate()?;
    let k_p = cfg
        .scales
        .map(|s| s.k_p)
        .or_else(|| cfg.model.as_ref().map(|m| m.k_p()))
        .unwrap_or(1.0);
    let curve = cfg.curve.unwrap_or_default();
    let (lo, hi) = (curve.k_lo.unwrap_or(1e-3 * k_p), curve.k_hi.unwrap_or(k_p));
    if !(lo > 0.0 && lo < hi && hi.is_finite()) || curve.samples < 2 {
        return Err(CliError::Config(format!(
            "need 0 < k_lo < k_hi and samples >= 2, got [{lo}, {hi}], {}",
            curve.samples
        )));
    }
    let gamma = bogoliubov::gamma(p.b, p.x0);
    let rows = logspace(lo, hi, curve.samples)
        .into_iter()
        .map(|k| {
            Ok(BogoliubovRow {
                k,
                omega_hat_plus: bogoliubov::omega_hat_plus(&p, k)?,
                omega_hat_minus: bogoliubov::omega_hat_minus(&p, k)?,
                gamma,
                beta_k_squared: bogoliubov::beta_k_squared(&p, k)?,
            })
        })
        .collect::<Result<Vec<_>, bogoliubov::BogoliubovError>>()?;
    match format(cfg, Format::Csv) {
        Format::Json => report(cfg, "bogoliubov", rows),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "k,omega_hat_plus,omega_hat_minus,gamma,beta_k_squared")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt17(r.k),
                    fmt17(r.omega_hat_plus),
                    fmt17(r.omega_hat_minus),
                    fmt17(r.gamma),
                    fmt17(r.beta_k_squared)
                )?;
            }
            Ok(out)
        }
    }
}

pub(super) fn reconstruct(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let law = model(cfg)?;
    let rc = cfg
        .reconstruction
        .as_ref()
        .ok_or_else(|| CliError::Config("a `reconstruction` block is required".into()))?;
    let traj = reconstruct::march(rc, law)?;
    log::info!("{} nodes, {} zero crossings", traj.len(), traj.zero_crossings.len());
    match format(cfg, Format::Csv) {
        Format::Json => report(cfg, "trajectory", &traj),
        Format::Csv => {
            let mut out = Vec::new();
            traj.write_csv(&mut out)?;
            Ok(out)
        }
    }
}

pub(super) fn find_kh(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let law = model(cfg)?;
    let s = scales(cfg)?.ok_or_else(|| CliError::Config("a `scales` block with H0 is required".into()))?;
    let branch = cfg.find_kh.unwrap_or_default().branch;
    let k_h = find_k_h(law, s.h0, branch)?;
    let payload = json!({ "k_h": k_h, "H0": s.h0, "branch": branch });
    match format(cfg, Format::Json) {
        Format::Json => report(cfg, "find_kh", payload),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "k_h,H0,branch")?;
            writeln!(out, "{},{},{}", fmt17(k_h), fmt17(s.h0), branch)?;
            Ok(out)
        }
    }
}

pub(super) fn find_hump_cmd(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let law = model(cfg)?;
    let bracket = cfg.hump.and_then(|h| h.bracket).map(|[a, b]| (a, b));
    let h = find_hump(law, bracket)?;
    match format(cfg, Format::Json) {
        Format::Json => report(cfg, "hump", h),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "k_star,omega_star")?;
            writeln!(out, "{},{}", fmt17(h.k_star), fmt17(h.omega_star))?;
            Ok(out)
        }
    }
}
