//! Tail-mode and total energy densities
//!
//! ```text
//! ⟨ρ⟩ = 1/(2π²) ∫ k dk ∫ ω dω |β_k|²
//! ```
//!
//! and their ratio. The nested measure is read according to
//! [`Interpretation`]; the Bogoliubov factor is either a constant (which
//! cancels from the ratio) or the full [`beta_k_squared`].

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{beta_k_squared, BogoliubovError, BogoliubovParams};
use crate::dispersion::{find_k_h, Branch, DispersionError, DispersionModel, FrequencyLaw};
use crate::numeric::{fmt17, linspace, logspace};
use crate::quadrature::{integrate, Estimate, Interpretation, QuadratureConfig, QuadratureError};

/// ω² below this is treated as the end of the spectrum for laws without a
/// hard cutoff.
pub const TRUNCATION_OMEGA_SQUARED: f64 = 1e-300;
/// Relative step of the central difference for dω/dk.
pub const DERIVATIVE_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Bogoliubov(#[from] BogoliubovError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid momentum range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("total energy integral is zero; ratio undefined")]
    UndefinedRatio,
    #[error("omega^2 never drops below {TRUNCATION_OMEGA_SQUARED:e} up to k = {k}; give k_max explicitly")]
    NoTruncation { k: f64 },
    #[error("invalid physical scales: {0}")]
    InvalidScales(String),
    #[error("Bogoliubov weight constant must be finite and positive, got {0}")]
    InvalidConstant(f64),
    #[error("k_H must be resolved from H0 but no physical scales were given")]
    MissingScales,
}

/// The |β_k|² factor of the integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaWeighting {
    Constant(f64),
    Full(BogoliubovParams),
}

impl Default for BetaWeighting {
    fn default() -> Self {
        BetaWeighting::Constant(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    Constant,
    Full,
}

impl BetaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BetaMode::Constant => "constant",
            BetaMode::Full => "full",
        }
    }
}

impl BetaWeighting {
    pub fn mode(&self) -> BetaMode {
        match self {
            BetaWeighting::Constant(_) => BetaMode::Constant,
            BetaWeighting::Full(_) => BetaMode::Full,
        }
    }

    fn validate(&self) -> Result<(), SpectraError> {
        match self {
            BetaWeighting::Constant(c) if !(c.is_finite() && *c > 0.0) => {
                Err(SpectraError::InvalidConstant(*c))
            }
            BetaWeighting::Constant(_) => Ok(()),
            BetaWeighting::Full(p) => Ok(p.validate()?),
        }
    }
}

/// Present Hubble rate, Planck mass and Planck momentum, in Planck units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScales {
    #[serde(rename = "H0")]
    pub h0: f64,
    #[serde(rename = "M_p", default = "one")]
    pub m_p: f64,
    pub k_p: f64,
}

fn one() -> f64 {
    1.0
}

impl PhysicalScales {
    pub fn validate(&self) -> Result<(), SpectraError> {
        for (name, v) in [("H0", self.h0), ("M_p", self.m_p), ("k_p", self.k_p)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SpectraError::InvalidScales(format!("{name} = {v} must be positive")));
            }
        }
        if self.h0 >= self.k_p {
            return Err(SpectraError::InvalidScales(format!(
                "H0 = {} must be below k_p = {}",
                self.h0, self.k_p
            )));
        }
        Ok(())
    }
}

/// Where the tail integral starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum KhSpec {
    Explicit(f64),
    /// Decaying-branch root of ω(k) = H₀.
    FromHubble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RatioReport {
    pub rho_tail: f64,
    pub rho_total: f64,
    pub ratio: f64,
    pub k_h: f64,
    /// Upper limit actually used for both integrals.
    pub k_end: f64,
    pub interpretation: Interpretation,
    pub beta_mode: BetaMode,
    /// Combined quadrature (and truncation) error bound on `ratio`.
    pub est_error: f64,
}

/// Integration end for `law`: an explicit `k_max`, the law's own spectral
/// end, or the first doubling of k_p where ω² < 1e-300. Returns the end and
/// a crude truncation bound for the discarded tail.
pub fn spectral_limit<L: FrequencyLaw + ?Sized>(
    law: &L,
    k_max: Option<f64>,
) -> Result<(f64, f64), SpectraError> {
    if let Some(k) = k_max {
        if !(k.is_finite() && k > 0.0) {
            return Err(SpectraError::InvalidRange { lo: 0.0, hi: k });
        }
        if let Some(end) = law.domain_end() {
            if k > end {
                return Err(DispersionError::OutOfDomain { k, k_p: end }.into());
            }
        }
        return Ok((k, 0.0));
    }
    if let Some(end) = law.spectral_end() {
        return Ok((end, 0.0));
    }
    let mut k = law.k_p();
    for _ in 0..64 {
        let w2 = law.omega_squared(k)?.max(0.0);
        if w2 < TRUNCATION_OMEGA_SQUARED {
            // assumes the integrand has decayed within one further k
            return Ok((k, 0.5 * k * k * w2));
        }
        k *= 2.0;
    }
    Err(SpectraError::NoTruncation { k })
}

fn clamped_omega<L: FrequencyLaw + ?Sized>(law: &L, k: f64) -> Result<f64, SpectraError> {
    // spectra only see the region where the frequency is real
    Ok(law.omega_squared(k)?.max(0.0).sqrt())
}

fn omega_derivative<L: FrequencyLaw + ?Sized>(
    law: &L,
    k: f64,
    end: f64,
) -> Result<f64, SpectraError> {
    let h = DERIVATIVE_STEP * law.k_p();
    let w = |k| clamped_omega(law, k);
    if k - h < 0.0 {
        Ok((w(k + h)? - w(k)?) / h)
    } else if k + h > end {
        Ok((w(k)? - w(k - h)?) / h)
    } else {
        Ok((w(k + h)? - w(k - h)?) / (2.0 * h))
    }
}

/// ∫ k·[inner measure]·|β_k|² dk without the 1/(2π²) prefactor and with a
/// unit constant weight.
fn raw_integral<L: FrequencyLaw + ?Sized>(
    law: &L,
    k_lo: f64,
    k_hi: f64,
    end: f64,
    bog: Option<&BogoliubovParams>,
    qcfg: &QuadratureConfig,
) -> Result<Estimate, SpectraError> {
    if !(k_lo >= 0.0 && k_lo <= k_hi && k_hi.is_finite()) {
        return Err(SpectraError::InvalidRange { lo: k_lo, hi: k_hi });
    }
    let integrand = |k: f64| -> Result<f64, SpectraError> {
        if k == 0.0 {
            return Ok(0.0);
        }
        let measure = match qcfg.interpretation {
            Interpretation::IteratedInner => 0.5 * k * law.omega_squared(k)?.max(0.0),
            Interpretation::ChainRule => {
                k * clamped_omega(law, k)? * omega_derivative(law, k, end)?
            }
        };
        let weight = match bog {
            Some(p) => beta_k_squared(p, k)?,
            None => 1.0,
        };
        Ok(measure * weight)
    };
    integrate(integrand, k_lo, k_hi, &breakpoints(k_lo, k_hi), qcfg)
}

/// Initial partition: uniform panels plus a logarithmic ladder towards the
/// lower end, where the suppressed laws put their hump.
fn breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = linspace(lo, hi, 17);
    let floor = if lo > 0.0 { lo } else { hi * 1e-9 };
    if hi / floor > 10.0 {
        pts.extend(logspace(floor, hi, 41));
    }
    pts
}

/// ⟨ρ⟩ over `[k_lo, k_hi]`, including 1/(2π²) and the Bogoliubov weight.
pub fn rho_integral<L: FrequencyLaw + ?Sized>(
    law: &L,
    k_lo: f64,
    k_hi: f64,
    beta: &BetaWeighting,
    qcfg: &QuadratureConfig,
) -> Result<Estimate, SpectraError> {
    beta.validate()?;
    let end = law.domain_end().unwrap_or(f64::INFINITY);
    if k_hi > end {
        return Err(DispersionError::OutOfDomain { k: k_hi, k_p: end }.into());
    }
    let (bog, scale) = match beta {
        BetaWeighting::Constant(c) => (None, c / (2.0 * PI * PI)),
        BetaWeighting::Full(p) => (Some(p), 1.0 / (2.0 * PI * PI)),
    };
    let raw = raw_integral(law, k_lo, k_hi, k_hi.min(end), bog, qcfg)?;
    Ok(Estimate { value: raw.value * scale, error: raw.error * scale })
}

/// ⟨ρ_tail⟩/⟨ρ_total⟩ with the tail starting at k_H and both integrals ending
/// at the law's spectral limit (or `k_max`).
///
/// In constant mode the ratio is formed from the unweighted integrals, so it
/// does not depend on the constant at all.
pub fn tail_total_ratio<L: FrequencyLaw + ?Sized>(
    law: &L,
    scales: Option<&PhysicalScales>,
    k_h: KhSpec,
    beta: &BetaWeighting,
    qcfg: &QuadratureConfig,
    k_max: Option<f64>,
) -> Result<RatioReport, SpectraError> {
    beta.validate()?;
    qcfg.validate()?;
    let (k_end, truncation) = spectral_limit(law, k_max)?;
    let k_h = match k_h {
        KhSpec::Explicit(k) => k,
        KhSpec::FromHubble => {
            let s = scales.ok_or(SpectraError::MissingScales)?;
            s.validate()?;
            find_k_h(law, s.h0, Branch::Decaying)?
        }
    };
    if !(k_h >= 0.0 && k_h <= k_end) {
        return Err(SpectraError::InvalidRange { lo: k_h, hi: k_end });
    }

    let (bog, scale) = match beta {
        BetaWeighting::Constant(c) => (None, c / (2.0 * PI * PI)),
        BetaWeighting::Full(p) => (Some(p), 1.0 / (2.0 * PI * PI)),
    };
    let total = raw_integral(law, 0.0, k_end, k_end, bog, qcfg)?;
    let tail = if k_h == 0.0 {
        total
    } else {
        raw_integral(law, k_h, k_end, k_end, bog, qcfg)?
    };
    if total.value == 0.0 {
        return Err(SpectraError::UndefinedRatio);
    }
    let ratio = tail.value / total.value;
    let total_err = total.error + truncation;
    let tail_err = tail.error + truncation;
    let est_error = if tail.value == 0.0 {
        tail_err / total.value.abs()
    } else {
        ratio.abs() * (tail_err / tail.value.abs() + total_err / total.value.abs())
    };
    Ok(RatioReport {
        rho_tail: tail.value * scale,
        rho_total: total.value * scale,
        ratio,
        k_h,
        k_end,
        interpretation: qcfg.interpretation,
        beta_mode: beta.mode(),
        est_error,
    })
}

/// k_H²·ω²(k_H)/M_p⁴ under ω(k_H) ≈ H₀, which reduces to (H₀/M_p)².
pub fn closed_form_estimate(scales: &PhysicalScales) -> f64 {
    let r = scales.h0 / scales.m_p;
    r * r
}

/// Grid of a (β, L, k_H/k_p) scan over [`DispersionModel::GeneralizedL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub betas: Vec<f64>,
    #[serde(rename = "Ls")]
    pub exponents: Vec<f64>,
    #[serde(default = "default_kh_fractions")]
    pub kh_over_kp: Vec<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub k_p: f64,
}

fn default_kh_fractions() -> Vec<f64> {
    vec![0.5]
}

impl ScanSpec {
    /// β ∈ {1.05, 10.5} × L ∈ {1/2, 1, 2} at k_H = k_p/2.
    pub fn reference_grid() -> Self {
        Self {
            betas: vec![1.05, 10.5],
            exponents: vec![0.5, 1.0, 2.0],
            kh_over_kp: default_kh_fractions(),
            alpha: 1.0,
            k_p: 1.0,
        }
    }

    /// k_H = M·k_p for M ∈ {0.1, …, 0.9} at fixed (β, L).
    pub fn detuning(beta: f64, exponent: f64) -> Self {
        Self {
            betas: vec![beta],
            exponents: vec![exponent],
            kh_over_kp: (1..=9).map(|m| m as f64 / 10.0).collect(),
            alpha: 1.0,
            k_p: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub beta: f64,
    pub exponent: f64,
    pub kh_over_kp: f64,
    pub interpretation: Interpretation,
    /// Per-cell failures are recorded, not propagated.
    pub outcome: Result<RatioReport, String>,
}

/// Evaluates every cell of `spec` in parallel; rows come back sorted by
/// (β, L, k_H/k_p).
pub fn ratio_scan(
    spec: &ScanSpec,
    beta: &BetaWeighting,
    qcfg: &QuadratureConfig,
) -> Vec<ScanRow> {
    let mut cells = Vec::new();
    for &b in &spec.betas {
        for &l in &spec.exponents {
            for &m in &spec.kh_over_kp {
                cells.push((b, l, m));
            }
        }
    }
    let mut rows: Vec<ScanRow> = cells
        .par_iter()
        .map(|&(b, l, m)| {
            let model = DispersionModel::GeneralizedL {
                alpha: spec.alpha,
                beta: b,
                exponent: l,
                k_p: spec.k_p,
            };
            let outcome = model
                .validate()
                .map_err(SpectraError::from)
                .and_then(|_| {
                    tail_total_ratio(
                        &model,
                        None,
                        KhSpec::Explicit(m * spec.k_p),
                        beta,
                        qcfg,
                        None,
                    )
                })
                .map_err(|e| e.to_string());
            ScanRow { beta: b, exponent: l, kh_over_kp: m, interpretation: qcfg.interpretation, outcome }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(a.exponent.total_cmp(&b.exponent))
            .then(a.kh_over_kp.total_cmp(&b.kh_over_kp))
    });
    rows
}

pub const SCAN_CSV_HEADER: &str = "beta,L,k_H_over_kp,interpretation,ratio,est_error";

/// Writes scan rows as CSV; failed cells carry NaN in the numeric columns.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SCAN_CSV_HEADER}")?;
    for r in rows {
        let (ratio, err) = match &r.outcome {
            Ok(rep) => (rep.ratio, rep.est_error),
            Err(_) => (f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt17(r.beta),
            fmt17(r.exponent),
            fmt17(r.kh_over_kp),
            r.interpretation.as_str(),
            fmt17(ratio),
            fmt17(err)
        )?;
    }
    Ok(())
}
