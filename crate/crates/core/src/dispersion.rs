//! Frequency laws ω(k): the Magueijo–Smolin energy relation, its suppressed
//! and cut-off generalisations, and the Epstein-type nonlinear form, together
//! with the characteristic points of each curve (hump maximum, k_H roots,
//! low-momentum coefficient).
//!
//! Units are ħ = c = 1. Every law is parameterised by a Planck momentum `k_p`
//! and evaluated internally in the dimensionless variable `x = k / k_p`.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::numeric::{bisect, golden_section_max, linspace, logspace, softplus};

/// Exponent of the denominator shared by the suppressed laws.
pub const SUPPRESSION_POWER: f64 = 11.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("invalid dispersion parameter: {0}")]
    InvalidParameter(String),
    #[error("momentum {k} is negative or not finite")]
    InvalidMomentum { k: f64 },
    #[error("momentum {k} lies beyond the cutoff k_p = {k_p}")]
    OutOfDomain { k: f64, k_p: f64 },
    #[error("F^2({k}) = {value} is negative: the frequency is imaginary there")]
    NegativeSquare { k: f64, value: f64 },
    #[error("omega(k) is monotone over [{lo}, {hi}]: no interior maximum")]
    NoInteriorMaximum { lo: f64, hi: f64 },
    #[error("omega(k) has {count} local maxima over [{lo}, {hi}]; expected one")]
    MultipleMaxima { count: usize, lo: f64, hi: f64 },
    #[error("omega(k) = {h0} has no root on the {branch} branch")]
    NoRoot { h0: f64, branch: Branch },
    #[error("fitted low-momentum coefficient {fitted} disagrees with analytic 11*beta + 1 = {analytic}")]
    FitMismatch { analytic: f64, fitted: f64 },
    #[error("{0} has no (1 + beta k/k_p)^11 (1 - k/k_p) structure")]
    UnsupportedVariant(&'static str),
}

/// Which side of the hump a root of `ω(k) = H₀` is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Rising,
    Decaying,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Rising => "rising",
            Branch::Decaying => "decaying",
        })
    }
}

/// Anything that can report ω²(k). Spectral integrals and the scale-factor
/// marcher are generic over this.
pub trait FrequencyLaw {
    /// ω²(k). May be negative for laws defined through a squared form.
    fn omega_squared(&self, k: f64) -> Result<f64, DispersionError>;

    /// ω(k); errors when ω² < 0.
    fn omega(&self, k: f64) -> Result<f64, DispersionError> {
        let w2 = self.omega_squared(k)?;
        if w2 < 0.0 {
            return Err(DispersionError::NegativeSquare { k, value: w2 });
        }
        Ok(w2.sqrt())
    }

    /// Planck momentum; the scale used for relative tolerances and steps.
    fn k_p(&self) -> f64;

    /// Hard upper end of the momentum domain, if the law has a cutoff.
    fn domain_end(&self) -> Option<f64> {
        None
    }

    /// Upper limit of spectral integrals when not given explicitly. `None`
    /// means the law must be truncated where ω² becomes negligible.
    fn spectral_end(&self) -> Option<f64> {
        self.domain_end()
    }
}

/// ω(k) = α·k, the unmodified dispersion. Used as a reference law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub alpha: f64,
    pub k_p: f64,
}

impl FrequencyLaw for Linear {
    fn omega_squared(&self, k: f64) -> Result<f64, DispersionError> {
        check_momentum(k)?;
        let w = self.alpha * k;
        Ok(w * w)
    }

    fn omega(&self, k: f64) -> Result<f64, DispersionError> {
        check_momentum(k)?;
        Ok(self.alpha * k)
    }

    fn k_p(&self) -> f64 {
        self.k_p
    }

    fn spectral_end(&self) -> Option<f64> {
        Some(self.k_p)
    }
}

fn unit() -> f64 {
    1.0
}

/// Parameters of the Epstein-type squared frequency
/// `F²(k) = (k² − k̃₁²)·V₀(x, x₀) + k²·V₁(x − x₀) + k̃₁²`, `x = k/k_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EpsteinParams {
    /// Thermality coefficient; small and nonnegative.
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Dimensionless offset k̃₀ / k_p.
    pub x0: f64,
    /// Transition momentum k̃₁ < k_p.
    pub k1_tilde: f64,
    pub k_p: f64,
}

/// Result of [`check_epstein_constraints`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// |C/2 + E/4 − 1|: the k̃₁² term of F²(k₀) must cancel.
    pub cancellation_residual: f64,
    /// B itself, which must be ≈ 0 for near-thermal spectra.
    pub thermality_residual: f64,
    pub passed: bool,
}

impl EpsteinParams {
    pub fn validate(&self) -> Result<(), DispersionError> {
        let all = [self.b, self.c, self.e, self.x0, self.k1_tilde, self.k_p];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DispersionError::InvalidParameter(
                "Epstein parameters must be finite".into(),
            ));
        }
        if self.k_p <= 0.0 {
            return Err(DispersionError::InvalidParameter("k_p must be positive".into()));
        }
        if self.k1_tilde <= 0.0 || self.k1_tilde >= self.k_p {
            return Err(DispersionError::InvalidParameter(format!(
                "k1_tilde = {} must lie in (0, k_p = {})",
                self.k1_tilde, self.k_p
            )));
        }
        if self.b < 0.0 || self.x0 < 0.0 {
            return Err(DispersionError::InvalidParameter(
                "B and x0 must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// F²(k); negative values are returned as-is.
    pub fn f_squared(&self, k: f64) -> f64 {
        let x = k / self.k_p;
        let k1sq = self.k1_tilde * self.k1_tilde;
        let ksq = k * k;
        (ksq - k1sq) * epstein_v0(self, x) + ksq * epstein_v1(self, x) + k1sq
    }
}

/// Logistic `1 / (1 + e^{-y})`, overflow-safe.
fn logistic(y: f64) -> f64 {
    (-softplus(-y)).exp()
}

/// V₀(x, x₀) = C/(1+eˣ) + E·eˣ/((1+eˣ)(1+e^{x−x₀})).
pub fn epstein_v0(p: &EpsteinParams, x: f64) -> f64 {
    p.c * logistic(-x) + p.e * logistic(x) * logistic(p.x0 - x)
}

/// V₁(x − x₀) = −B·eˣ/(1+e^{x−x₀})², as printed. Takes `x`; the offset
/// comes from `p.x0`.
pub fn epstein_v1(p: &EpsteinParams, x: f64) -> f64 {
    if p.b == 0.0 {
        return 0.0;
    }
    -p.b * (x - 2.0 * softplus(x - p.x0)).exp()
}

/// Checks the near-thermal constraints `|C/2 + E/4 − 1| ≤ tol` and `B ≤ tol`.
pub fn check_epstein_constraints(p: &EpsteinParams, tol: f64) -> ConstraintReport {
    let cancellation_residual = (p.c / 2.0 + p.e / 4.0 - 1.0).abs();
    let thermality_residual = p.b.abs();
    ConstraintReport {
        cancellation_residual,
        thermality_residual,
        passed: cancellation_residual <= tol && thermality_residual <= tol,
    }
}

/// The five frequency laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DispersionModel {
    /// ω = α·k / (1 + k/k_p).
    MagueijoSmolin {
        #[serde(default = "unit")]
        alpha: f64,
        k_p: f64,
    },
    /// ω = α·k·(1 − k/k_p) / (1 + β·k/k_p)^11.
    #[serde(rename = "modified-ms")]
    ModifiedMs {
        #[serde(default = "unit")]
        alpha: f64,
        beta: f64,
        k_p: f64,
    },
    /// ω = α·k·exp(−β₂·k/k_p) / (1 + β₁·k/k_p)^11.
    ExpSuppressed {
        #[serde(default = "unit")]
        alpha: f64,
        beta1: f64,
        beta2: f64,
        k_p: f64,
    },
    /// ω = α·k·(1 − (k/k_p)^L) / (1 + β·(k/k_p)^L)^11.
    GeneralizedL {
        #[serde(default = "unit")]
        alpha: f64,
        beta: f64,
        #[serde(rename = "L")]
        exponent: f64,
        k_p: f64,
    },
    /// ω² = F²(k).
    EpsteinNonlinear { params: EpsteinParams },
}

fn check_momentum(k: f64) -> Result<(), DispersionError> {
    if k.is_nan() || k < 0.0 {
        Err(DispersionError::InvalidMomentum { k })
    } else {
        Ok(())
    }
}

/// (1 + y)^-11 via exp/log1p so that large β·x does not overflow.
fn suppression(y: f64) -> f64 {
    (-SUPPRESSION_POWER * y.ln_1p()).exp()
}

impl DispersionModel {
    pub fn name(&self) -> &'static str {
        match self {
            DispersionModel::MagueijoSmolin { .. } => "magueijo-smolin",
            DispersionModel::ModifiedMs { .. } => "modified-ms",
            DispersionModel::ExpSuppressed { .. } => "exp-suppressed",
            DispersionModel::GeneralizedL { .. } => "generalized-l",
            DispersionModel::EpsteinNonlinear { .. } => "epstein-nonlinear",
        }
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        let bad = |what: &str| Err(DispersionError::InvalidParameter(what.to_string()));
        let (alpha, k_p) = match *self {
            DispersionModel::EpsteinNonlinear { params } => return params.validate(),
            DispersionModel::MagueijoSmolin { alpha, k_p } => (alpha, k_p),
            DispersionModel::ModifiedMs { alpha, beta, k_p } => {
                if !(beta.is_finite() && beta >= 0.0) {
                    return bad("beta must be finite and nonnegative");
                }
                (alpha, k_p)
            }
            DispersionModel::ExpSuppressed { alpha, beta1, beta2, k_p } => {
                if !(beta1.is_finite() && beta1 >= 0.0 && beta2.is_finite() && beta2 >= 0.0) {
                    return bad("beta1 and beta2 must be finite and nonnegative");
                }
                (alpha, k_p)
            }
            DispersionModel::GeneralizedL { alpha, beta, exponent, k_p } => {
                if !(beta.is_finite() && beta >= 0.0) {
                    return bad("beta must be finite and nonnegative");
                }
                if !(exponent.is_finite() && exponent > 0.0) {
                    return bad("L must be finite and positive");
                }
                (alpha, k_p)
            }
        };
        if !(alpha.is_finite() && alpha > 0.0) {
            return bad("alpha must be finite and positive");
        }
        if !(k_p.is_finite() && k_p > 0.0) {
            return bad("k_p must be finite and positive");
        }
        Ok(())
    }

    /// True for the laws carrying a `(1 − (k/k_p)^L)` factor, which are only
    /// defined on `[0, k_p]`.
    pub fn has_cutoff(&self) -> bool {
        matches!(
            self,
            DispersionModel::ModifiedMs { .. } | DispersionModel::GeneralizedL { .. }
        )
    }

    fn check_domain(&self, k: f64) -> Result<(), DispersionError> {
        check_momentum(k)?;
        if self.has_cutoff() && k > self.k_p() {
            return Err(DispersionError::OutOfDomain { k, k_p: self.k_p() });
        }
        Ok(())
    }

    /// ω(k). Exact formula evaluation; errors outside the domain and where
    /// the Epstein F² is negative.
    pub fn eval_omega(&self, k: f64) -> Result<f64, DispersionError> {
        self.check_domain(k)?;
        Ok(match *self {
            DispersionModel::MagueijoSmolin { alpha, k_p } => {
                if k.is_infinite() {
                    alpha * k_p
                } else {
                    alpha * k / (1.0 + k / k_p)
                }
            }
            DispersionModel::ModifiedMs { alpha, beta, k_p } => {
                let x = k / k_p;
                alpha * k * (1.0 - x) * suppression(beta * x)
            }
            DispersionModel::ExpSuppressed { alpha, beta1, beta2, k_p } => {
                let x = k / k_p;
                alpha * k * (-beta2 * x - SUPPRESSION_POWER * (beta1 * x).ln_1p()).exp()
            }
            DispersionModel::GeneralizedL { alpha, beta, exponent, k_p } => {
                let xl = (k / k_p).powf(exponent);
                alpha * k * (1.0 - xl) * suppression(beta * xl)
            }
            DispersionModel::EpsteinNonlinear { params } => {
                let f2 = params.f_squared(k);
                if f2 < 0.0 {
                    return Err(DispersionError::NegativeSquare { k, value: f2 });
                }
                f2.sqrt()
            }
        })
    }

    /// ω²(k). For the Epstein law this is F²(k) and may be negative.
    pub fn eval_omega_squared(&self, k: f64) -> Result<f64, DispersionError> {
        match self {
            DispersionModel::EpsteinNonlinear { params } => {
                self.check_domain(k)?;
                Ok(params.f_squared(k))
            }
            _ => {
                let w = self.eval_omega(k)?;
                Ok(w * w)
            }
        }
    }
}

impl FrequencyLaw for DispersionModel {
    fn omega_squared(&self, k: f64) -> Result<f64, DispersionError> {
        self.eval_omega_squared(k)
    }

    fn omega(&self, k: f64) -> Result<f64, DispersionError> {
        self.eval_omega(k)
    }

    fn k_p(&self) -> f64 {
        match *self {
            DispersionModel::MagueijoSmolin { k_p, .. }
            | DispersionModel::ModifiedMs { k_p, .. }
            | DispersionModel::ExpSuppressed { k_p, .. }
            | DispersionModel::GeneralizedL { k_p, .. } => k_p,
            DispersionModel::EpsteinNonlinear { params } => params.k_p,
        }
    }

    fn domain_end(&self) -> Option<f64> {
        self.has_cutoff().then(|| self.k_p())
    }

    fn spectral_end(&self) -> Option<f64> {
        match self {
            // particle energies are bounded by E_p, so momenta stop at k_p
            DispersionModel::MagueijoSmolin { k_p, .. } => Some(*k_p),
            _ => self.domain_end(),
        }
    }
}

/// Modified Magueijo–Smolin energy E = m / (1 + m/E_p).
pub fn ms_energy(m: f64, e_p: f64) -> f64 {
    if m.is_infinite() {
        e_p
    } else {
        m / (1.0 + m / e_p)
    }
}

/// Location and height of the single interior maximum of ω(k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hump {
    pub k_star: f64,
    pub omega_star: f64,
}

const HUMP_SAMPLES: usize = 4001;
const HUMP_REL_TOL: f64 = 1e-10;
const ROOT_REL_TOL: f64 = 1e-12;

/// Default search bracket for [`find_hump`].
pub fn default_hump_bracket<L: FrequencyLaw + ?Sized>(law: &L) -> (f64, f64) {
    let k_p = law.k_p();
    match law.domain_end() {
        Some(end) => (1e-8 * k_p, end * (1.0 - 1e-8)),
        None => (1e-8 * k_p, 10.0 * k_p),
    }
}

/// ω with imaginary frequencies mapped to zero; used for profile sampling.
fn sampled_omega<L: FrequencyLaw + ?Sized>(law: &L, k: f64) -> Result<f64, DispersionError> {
    Ok(law.omega_squared(k)?.max(0.0).sqrt())
}

/// Locates the hump of ω over `bracket`.
///
/// The profile is sampled (logarithmically when the bracket spans more than
/// two decades) to check there is exactly one interior maximum, which is
/// then refined by golden-section search.
pub fn find_hump<L: FrequencyLaw + ?Sized>(
    law: &L,
    bracket: Option<(f64, f64)>,
) -> Result<Hump, DispersionError> {
    let (lo, hi) = bracket.unwrap_or_else(|| default_hump_bracket(law));
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(DispersionError::InvalidParameter(format!(
            "bad hump bracket [{lo}, {hi}]"
        )));
    }
    let grid = if lo > 0.0 && hi / lo > 100.0 {
        logspace(lo, hi, HUMP_SAMPLES)
    } else {
        linspace(lo, hi, HUMP_SAMPLES)
    };
    let values = grid
        .iter()
        .map(|&k| sampled_omega(law, k))
        .collect::<Result<Vec<_>, _>>()?;

    let peaks: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    let i = match peaks.as_slice() {
        [] => return Err(DispersionError::NoInteriorMaximum { lo, hi }),
        [i] => *i,
        many => {
            return Err(DispersionError::MultipleMaxima { count: many.len(), lo, hi });
        }
    };

    let k_star = golden_section_max(
        |k| sampled_omega(law, k).unwrap_or(f64::NEG_INFINITY),
        grid[i - 1],
        grid[i + 1],
        HUMP_REL_TOL,
    );
    let omega_star = sampled_omega(law, k_star)?;
    Ok(Hump { k_star, omega_star })
}

/// Solves ω(k) = H₀ on the requested side of the hump.
pub fn find_k_h<L: FrequencyLaw + ?Sized>(
    law: &L,
    h0: f64,
    branch: Branch,
) -> Result<f64, DispersionError> {
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(DispersionError::InvalidParameter(format!("H0 = {h0} must be positive")));
    }
    let hump = find_hump(law, None)?;
    if h0 >= hump.omega_star {
        return Err(DispersionError::NoRoot { h0, branch });
    }
    let no_root = DispersionError::NoRoot { h0, branch };
    let (lo, hi) = match branch {
        Branch::Rising => (0.0, hump.k_star),
        Branch::Decaying => {
            let hi = match law.domain_end() {
                Some(end) => end,
                None => {
                    let mut k = hump.k_star.max(law.k_p());
                    let mut found = None;
                    for _ in 0..64 {
                        if sampled_omega(law, k)? < h0 {
                            found = Some(k);
                            break;
                        }
                        k *= 2.0;
                    }
                    found.ok_or(no_root.clone())?
                }
            };
            (hump.k_star, hi)
        }
    };
    let mut failure = None;
    let root = bisect(
        |k| match sampled_omega(law, k) {
            Ok(w) => w - h0,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        ROOT_REL_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root.ok_or(no_root)
}

/// Analytic and fitted first-order coefficient β₃ in ω ≈ k/(1 + β₃·k/k_p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta3 {
    pub analytic: f64,
    pub fitted: f64,
    pub relative_difference: f64,
}

const BETA3_FIT_POINTS: usize = 41;
const BETA3_FIT_TOL: f64 = 1e-3;

/// β₃ = 11β + 1 for the (1 + βx)^11·(1 − x) laws, confirmed by a least-squares
/// fit of (αk/ω − 1)/x against x over x ∈ [1e-8, 1e-6].
pub fn effective_beta3(model: &DispersionModel) -> Result<Beta3, DispersionError> {
    let (alpha, beta, k_p) = match *model {
        DispersionModel::ModifiedMs { alpha, beta, k_p } => (alpha, beta, k_p),
        DispersionModel::GeneralizedL { alpha, beta, exponent: 1.0, k_p } => {
            (alpha, beta, k_p)
        }
        _ => return Err(DispersionError::UnsupportedVariant(model.name())),
    };
    model.validate()?;
    let analytic = SUPPRESSION_POWER * beta + 1.0;

    let xs = logspace(1e-8, 1e-6, BETA3_FIT_POINTS);
    let mut ys = Vec::with_capacity(xs.len());
    for &x in &xs {
        let k = x * k_p;
        let w = model.eval_omega(k)?;
        ys.push((alpha * k / w - 1.0) / x);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let fitted = my - slope * mx;
    let relative_difference = ((fitted - analytic) / analytic).abs();
    if relative_difference > BETA3_FIT_TOL {
        return Err(DispersionError::FitMismatch { analytic, fitted });
    }
    Ok(Beta3 { analytic, fitted, relative_difference })
}
