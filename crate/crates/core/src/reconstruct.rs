//! Finite-difference reconstruction of the scale factor a(τ) from a frequency
//! law and a prescribed momentum history k(τ) = k_init + c₁·k_evol·τ^A.
//!
//! The marched relation is
//!
//! ```text
//! growing     (eq27c):  Δ²a_i + (ω²(k_i) − k_i²)·a_i = 0
//! oscillating (eq27d):  Δ²a_i − (ω²(k_i) − k_i²)·a_i = 0
//! ```
//!
//! where Δ² is the difference of one-sided slopes, optionally rescaled by
//! 2/(τ_{i+1} − τ_{i−1}) into a non-uniform second derivative. With the
//! identification ω² = k² − a″/a, the growing form in second-derivative
//! normalisation is the continuum equation a″ = (k² − ω²)·a.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionError, FrequencyLaw};
use crate::numeric::{fmt17, linspace};

/// |a| above this aborts the march.
pub const BLOW_UP_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("invalid reconstruction config: {0}")]
    InvalidConfig(String),
    #[error("tau^A is singular at tau = {tau} for A = {exponent}")]
    Singularity { tau: f64, exponent: f64 },
    #[error("momentum ansatz gives k({tau}) = {k} < 0")]
    NegativeMomentum { tau: f64, k: f64 },
    #[error("coincident or unordered times {0} and {1}")]
    ZeroStep(f64, f64),
    #[error("scale factor blew up (|a| = {value:e}) at tau = {tau}")]
    BlowUp { tau: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum SignMode {
    /// Δ²a = (k² − ω²)·a.
    #[serde(rename = "eq27c")]
    Growing,
    /// Δ²a = (ω² − k²)·a.
    #[serde(rename = "eq27d")]
    Oscillating,
}

impl SignMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignMode::Growing => "eq27c",
            SignMode::Oscillating => "eq27d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Difference of one-sided slopes, unscaled.
    #[serde(rename = "paper-literal")]
    Literal,
    /// Same, times 2/(τ_{i+1} − τ_{i−1}).
    SecondDerivative,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::Literal => "paper-literal",
            Normalization::SecondDerivative => "second-derivative",
        }
    }
}

/// Time grid of the march.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum TauGrid {
    Explicit(Vec<f64>),
    Uniform { start: f64, end: f64, steps: usize },
}

impl TauGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            TauGrid::Explicit(v) => v.clone(),
            TauGrid::Uniform { start, end, steps } => linspace(*start, *end, steps + 1),
        }
    }
}

fn default_sign() -> SignMode {
    SignMode::Growing
}

fn default_norm() -> Normalization {
    Normalization::SecondDerivative
}

fn default_regime_eps() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub k_init: f64,
    pub c1: f64,
    pub k_evol: f64,
    /// Exponent A of the momentum ansatz; may be negative.
    #[serde(rename = "A")]
    pub exponent: f64,
    pub tau: TauGrid,
    /// a at the first grid point.
    pub a1: f64,
    /// a at the phantom point τ₁ − τ*. `None` selects a start with zero
    /// initial slope.
    #[serde(default)]
    pub a_initial: Option<f64>,
    /// Offset τ* of the phantom point; defaults to the first grid step.
    #[serde(default)]
    pub tau_star: Option<f64>,
    #[serde(default = "default_sign")]
    pub sign_mode: SignMode,
    #[serde(default = "default_norm")]
    pub normalization: Normalization,
    /// Threshold of [`classify_regimes`].
    #[serde(default = "default_regime_eps")]
    pub regime_eps: f64,
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<Vec<f64>, ReconstructError> {
        let bad = |m: String| Err(ReconstructError::InvalidConfig(m));
        let tau = self.tau.points();
        if tau.len() < 3 {
            return bad(format!("need at least 3 grid points, got {}", tau.len()));
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return bad("tau grid must be finite".into());
        }
        for w in tau.windows(2) {
            if w[1] <= w[0] {
                return Err(ReconstructError::ZeroStep(w[0], w[1]));
            }
        }
        for (name, v) in [
            ("k_init", self.k_init),
            ("c1", self.c1),
            ("k_evol", self.k_evol),
            ("A", self.exponent),
            ("a1", self.a1),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.k_init < 0.0 {
            return bad("k_init must be nonnegative".into());
        }
        if self.k_evol <= 0.0 {
            return bad("k_evol must be positive".into());
        }
        if self.a1 <= 0.0 {
            return bad("a1 must be positive".into());
        }
        if let Some(a) = self.a_initial {
            if !(a.is_finite() && a > 0.0) {
                return bad("a_initial must be positive".into());
            }
        }
        if let Some(t) = self.tau_star {
            if !(t.is_finite() && t > 0.0) {
                return bad("tau_star must be positive".into());
            }
        }
        if !(self.regime_eps > 0.0 && self.regime_eps < 1.0) {
            return bad("regime_eps must lie in (0, 1)".into());
        }
        Ok(tau)
    }
}

/// k(τ) = k_init + c₁·k_evol·τ^A.
pub fn momentum_ansatz(cfg: &ReconstructionConfig, tau: f64) -> Result<f64, ReconstructError> {
    if tau < 0.0 || tau.is_nan() {
        return Err(ReconstructError::InvalidConfig(format!("tau = {tau} must be nonnegative")));
    }
    let power = if cfg.c1 == 0.0 {
        0.0
    } else if tau == 0.0 && cfg.exponent < 0.0 {
        return Err(ReconstructError::Singularity { tau, exponent: cfg.exponent });
    } else {
        tau.powf(cfg.exponent)
    };
    let k = cfg.k_init + cfg.c1 * cfg.k_evol * power;
    if k < 0.0 {
        return Err(ReconstructError::NegativeMomentum { tau, k });
    }
    Ok(k)
}

/// Δ²a_i on a possibly non-uniform stencil.
pub fn second_difference(
    a_prev: f64,
    a_i: f64,
    a_next: f64,
    tau_prev: f64,
    tau_i: f64,
    tau_next: f64,
    normalization: Normalization,
) -> Result<f64, ReconstructError> {
    let (h_minus, h_plus) = (tau_i - tau_prev, tau_next - tau_i);
    if h_minus.is_nan() || h_minus <= 0.0 {
        return Err(ReconstructError::ZeroStep(tau_prev, tau_i));
    }
    if h_plus.is_nan() || h_plus <= 0.0 {
        return Err(ReconstructError::ZeroStep(tau_i, tau_next));
    }
    let d = (a_next - a_i) / h_plus - (a_i - a_prev) / h_minus;
    Ok(match normalization {
        Normalization::Literal => d,
        Normalization::SecondDerivative => d * 2.0 / (h_plus + h_minus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LinearGrowth,
    Intermediate,
    ExponentialGrowth,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::LinearGrowth => "linear-growth",
            Regime::Intermediate => "intermediate",
            Regime::ExponentialGrowth => "exponential-growth",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub k: Vec<f64>,
    pub a: Vec<f64>,
    /// Effective potential a″/a = k² − ω² at each node.
    pub u_t: Vec<f64>,
    pub regime: Vec<Regime>,
    /// Indices i where a changes sign between i − 1 and i.
    pub zero_crossings: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub const CSV_HEADER: &'static str = "tau,k,a,u_t,regime";

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(self.tau[i]),
                fmt17(self.k[i]),
                fmt17(self.a[i]),
                fmt17(self.u_t[i]),
                self.regime[i]
            )?;
        }
        Ok(())
    }
}

/// Marches a(τ) across the grid.
///
/// The first step uses a phantom point at τ₁ − τ* holding `a_initial`. When
/// `a_initial` is not given, the phantom value is chosen so that the central
/// slope through the first node vanishes, which keeps the start second-order
/// accurate.
pub fn march<L: FrequencyLaw + ?Sized>(
    cfg: &ReconstructionConfig,
    law: &L,
) -> Result<Trajectory, ReconstructError> {
    let tau = cfg.validate()?;
    let n = tau.len();
    let k = tau
        .iter()
        .map(|&t| momentum_ansatz(cfg, t))
        .collect::<Result<Vec<_>, _>>()?;
    let omega_sq = k
        .iter()
        .map(|&k| law.omega_squared(k))
        .collect::<Result<Vec<_>, _>>()?;
    let u_t: Vec<f64> = k.iter().zip(&omega_sq).map(|(k, w2)| k * k - w2).collect();
    // Δ²a_i = coef_i · a_i
    let coef: Vec<f64> = u_t
        .iter()
        .map(|u| match cfg.sign_mode {
            SignMode::Growing => *u,
            SignMode::Oscillating => -*u,
        })
        .collect();
    let norm = |h_minus: f64, h_plus: f64| match cfg.normalization {
        Normalization::Literal => 1.0,
        Normalization::SecondDerivative => 2.0 / (h_minus + h_plus),
    };

    let tau_star = cfg.tau_star.unwrap_or(tau[1] - tau[0]);
    let a_phantom = match cfg.a_initial {
        Some(a) => a,
        None => {
            // choose a_phantom = a_2 so the slope across the first node is zero
            let (hm, hp) = (tau_star, tau[1] - tau[0]);
            cfg.a1 + hp * hm * coef[0] * cfg.a1 / (norm(hm, hp) * (hm + hp))
        }
    };

    let mut a = Vec::with_capacity(n);
    a.push(cfg.a1);
    let (mut prev_a, mut prev_tau) = (a_phantom, tau[0] - tau_star);
    for i in 0..n - 1 {
        let (hm, hp) = (tau[i] - prev_tau, tau[i + 1] - tau[i]);
        let slope = (a[i] - prev_a) / hm + coef[i] * a[i] / norm(hm, hp);
        let next = a[i] + hp * slope;
        if !next.is_finite() || next.abs() > BLOW_UP_LIMIT {
            return Err(ReconstructError::BlowUp { tau: tau[i + 1], value: next.abs() });
        }
        prev_a = a[i];
        prev_tau = tau[i];
        a.push(next);
    }

    let zero_crossings = (1..n)
        .filter(|&i| a[i] == 0.0 || a[i].signum() != a[i - 1].signum())
        .collect();
    let mut traj = Trajectory {
        tau,
        k,
        a,
        u_t,
        regime: Vec::new(),
        zero_crossings,
    };
    classify_regimes(&mut traj, cfg.regime_eps);
    Ok(traj)
}

/// Labels each node by u_t/k²: near 0 is linear growth, near 1 exponential.
pub fn classify_regimes(traj: &mut Trajectory, eps: f64) {
    traj.regime = traj
        .k
        .iter()
        .zip(&traj.u_t)
        .map(|(&k, &u)| {
            let ksq = k * k;
            let r = if ksq > 0.0 {
                u / ksq
            } else if u == 0.0 {
                0.0
            } else {
                u.signum() * f64::INFINITY
            };
            if r.abs() < eps {
                Regime::LinearGrowth
            } else if r > 1.0 - eps {
                Regime::ExponentialGrowth
            } else {
                Regime::Intermediate
            }
        })
        .collect();
}

/// Richardson-style truncation estimate for the final a: |a_G − a_2G|/3,
/// where 2G keeps every other node of the grid (odd point count required).
pub fn estimate_truncation_error<L: FrequencyLaw + ?Sized>(
    cfg: &ReconstructionConfig,
    law: &L,
) -> Result<f64, ReconstructError> {
    let tau = cfg.validate()?;
    if tau.len() % 2 == 0 || tau.len() < 5 {
        return Err(ReconstructError::InvalidConfig(
            "truncation estimate needs an odd number (>= 5) of grid points".into(),
        ));
    }
    let fine = march(cfg, law)?;
    let coarse_grid: Vec<f64> = tau.iter().step_by(2).copied().collect();
    let coarse_cfg = ReconstructionConfig {
        tau: TauGrid::Explicit(coarse_grid),
        tau_star: cfg.tau_star.map(|t| 2.0 * t),
        ..cfg.clone()
    };
    let coarse = march(&coarse_cfg, law)?;
    Ok((fine.a[fine.len() - 1] - coarse.a[coarse.len() - 1]).abs() / 3.0)
}
