//! Bogoliubov coefficient |β_k|² between in and out vacua for a nearly
//! thermal spectrum, with the deviation-from-thermality function Γ(k₀, B).

use std::f64::consts::{FRAC_PI_2, PI};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::numeric::{ln_sinh, logspace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BogoliubovError {
    #[error("invalid Bogoliubov parameter: {0}")]
    InvalidParameter(String),
    #[error("momentum must be positive, got {k}")]
    NonPositiveMomentum { k: f64 },
    #[error("B = {b} >= 1 makes sinh^2(2 pi Omega+) <= sinh^2(2 pi Omega-)")]
    DegenerateDenominator { b: f64 },
}

/// Thermality coefficient `B`, conformal-time ratio `|η/η_c|` and `x₀ = k̃₀/k_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BogoliubovParams {
    #[serde(rename = "B")]
    pub b: f64,
    pub eta_ratio: f64,
    pub x0: f64,
}

impl Default for BogoliubovParams {
    fn default() -> Self {
        Self { b: 1e-3, eta_ratio: 1.0, x0: 1e-2 }
    }
}

impl BogoliubovParams {
    pub fn validate(&self) -> Result<(), BogoliubovError> {
        if !(self.b.is_finite() && (0.0..2.0).contains(&self.b)) {
            return Err(BogoliubovError::InvalidParameter(format!(
                "B = {} must lie in [0, 2)",
                self.b
            )));
        }
        if !(self.eta_ratio.is_finite() && self.eta_ratio > 0.0) {
            return Err(BogoliubovError::InvalidParameter(format!(
                "eta_ratio = {} must be positive",
                self.eta_ratio
            )));
        }
        if !(self.x0.is_finite() && (0.0..=1.0).contains(&self.x0)) {
            return Err(BogoliubovError::InvalidParameter(format!(
                "x0 = {} must lie in [0, 1]",
                self.x0
            )));
        }
        Ok(())
    }

    /// 1/n = |η/η_c| / k.
    fn inverse_mode(&self, k: f64) -> Result<f64, BogoliubovError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(BogoliubovError::NonPositiveMomentum { k });
        }
        Ok(self.eta_ratio / k)
    }
}

/// Γ(k₀, B) as a single analytic function of `q = 4·B·e^{−x₀}`:
/// cosh²((π/2)√(q − 1)) for q ≥ 1 and cos²((π/2)√(1 − q)) below.
pub fn gamma(b: f64, x0: f64) -> f64 {
    let q = 4.0 * (b * (-x0).exp());
    if q >= 1.0 {
        let c = (FRAC_PI_2 * (q - 1.0).sqrt()).cosh();
        c * c
    } else {
        // cos((π/2)s) = sin((π/2)(1 − s)), and 1 − √(1 − q) = q / (1 + √(1 − q))
        // keeps full relative precision as q -> 0
        let s = (1.0 - q).sqrt();
        let v = (FRAC_PI_2 * (q / (1.0 + s))).sin();
        v * v
    }
}

/// Ω̂₊ = (1 − B/2)·|η/η_c|/k.
pub fn omega_hat_plus(p: &BogoliubovParams, k: f64) -> Result<f64, BogoliubovError> {
    Ok((1.0 - p.b / 2.0) * p.inverse_mode(k)?)
}

/// Ω̂₋ = (B/2)·|η/η_c|/k.
pub fn omega_hat_minus(p: &BogoliubovParams, k: f64) -> Result<f64, BogoliubovError> {
    Ok(p.b / 2.0 * p.inverse_mode(k)?)
}

// above this the sinh factors are handled in log space
const LOG_DOMAIN_ARG: f64 = 300.0;

/// |β_k|² = [sinh²(2πΩ̂₋) + Γ] / [sinh²(2πΩ̂₊) − sinh²(2πΩ̂₋)].
///
/// The denominator is evaluated as sinh(u₊ + u₋)·sinh(u₊ − u₋), which removes
/// the subtraction entirely.
pub fn beta_k_squared(p: &BogoliubovParams, k: f64) -> Result<f64, BogoliubovError> {
    if p.b >= 1.0 {
        return Err(BogoliubovError::DegenerateDenominator { b: p.b });
    }
    let u_minus = 2.0 * PI * omega_hat_minus(p, k)?;
    let u_plus = 2.0 * PI * omega_hat_plus(p, k)?;
    let g = gamma(p.b, p.x0);
    let (sum, diff) = (u_plus + u_minus, u_plus - u_minus);

    if sum < LOG_DOMAIN_ARG {
        let sm = u_minus.sinh();
        return Ok((sm * sm + g) / (sum.sinh() * diff.sinh()));
    }
    let ln_num = if u_minus == 0.0 {
        g.ln()
    } else if u_minus < LOG_DOMAIN_ARG {
        let sm = u_minus.sinh();
        (sm * sm + g).ln()
    } else {
        2.0 * ln_sinh(u_minus)
    };
    let ln_den = ln_sinh(sum) + ln_sinh(diff);
    Ok((ln_num - ln_den).exp())
}

/// Summary of how well |β_k|² is approximated by a constant on a range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantApprox {
    pub mean: f64,
    pub max_relative_deviation: f64,
}

/// Samples |β_k|² on `n_samples` log-spaced momenta in `[k_lo, k_hi]` and
/// reports the mean and the largest relative deviation from it.
pub fn thermal_constant_approx(
    p: &BogoliubovParams,
    k_lo: f64,
    k_hi: f64,
    n_samples: usize,
) -> Result<ConstantApprox, BogoliubovError> {
    if !(k_lo > 0.0 && k_lo < k_hi && k_hi.is_finite()) || n_samples == 0 {
        return Err(BogoliubovError::InvalidParameter(format!(
            "need 0 < k_lo < k_hi and n_samples > 0, got [{k_lo}, {k_hi}], n = {n_samples}"
        )));
    }
    let values = logspace(k_lo, k_hi, n_samples)
        .into_iter()
        .map(|k| beta_k_squared(p, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max_relative_deviation = if mean == 0.0 {
        0.0
    } else {
        values
            .iter()
            .map(|v| ((v - mean) / mean).abs())
            .fold(0.0, f64::max)
    };
    Ok(ConstantApprox { mean, max_relative_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(b: f64) -> BogoliubovParams {
        BogoliubovParams { b, eta_ratio: 1.0, x0: 1e-2 }
    }

    #[test]
    fn gamma_reference_points() {
        assert_eq!(gamma(0.0, 0.3), 0.0);
        // 4 B e^{-x0} = 1
        let x0: f64 = 0.2;
        let b = 0.25 * x0.exp();
        assert!((gamma(b, x0) - 1.0).abs() < 1e-12);
        // 40-digit value at B = 1e-3, x0 = 1e-2
        let frozen = 9.693345191438172774e-6;
        assert!(((gamma(1e-3, 1e-2) - frozen) / frozen).abs() < 1e-13);
    }

    #[test]
    fn gamma_small_b_series() {
        // Γ = sin²((π/2)·q/(1 + √(1 − q))) ≈ (π b)² (1 + 2b + …) with b = B e^{-x0}
        for b in [1e-3, 1e-5, 1e-9] {
            let g = gamma(b, 0.0);
            assert!(g < 10.0 * (PI * b).powi(2));
            let series = (PI * b).powi(2) * (1.0 + 2.0 * b);
            assert!(((g - series) / series).abs() < 10.0 * b * b + 1e-12, "b={b}");
        }
    }

    #[test]
    fn omega_hats() {
        let p = BogoliubovParams { b: 1.0, eta_ratio: 1.0, x0: 0.0 };
        assert_eq!(omega_hat_plus(&p, 1.0).unwrap(), 0.5);
        assert_eq!(omega_hat_minus(&p, 1.0).unwrap(), 0.5);
        assert_eq!(omega_hat_minus(&params(0.0), 3.0).unwrap(), 0.0);
        assert!(omega_hat_plus(&params(0.1), 1e12).unwrap() < 1e-11);
        assert!(matches!(
            omega_hat_plus(&params(0.1), 0.0),
            Err(BogoliubovError::NonPositiveMomentum { .. })
        ));
    }

    #[test]
    fn exact_thermality_gives_zero() {
        for k in [1e-3, 0.5, 1.0, 1e4] {
            assert_eq!(beta_k_squared(&params(0.0), k).unwrap(), 0.0);
        }
    }

    #[test]
    fn frozen_reference_value() {
        // 40-digit evaluation of the closed formula at B = 1e-3, x0 = 1e-2, k = 1
        let frozen = 2.746132156221678256e-10;
        let got = beta_k_squared(&params(1e-3), 1.0).unwrap();
        assert!(((got - frozen) / frozen).abs() < 1e-12, "{got}");
    }

    #[test]
    fn large_momentum_growth_is_quadratic() {
        let p = params(1e-3);
        let a = beta_k_squared(&p, 1e4).unwrap();
        let b = beta_k_squared(&p, 2e4).unwrap();
        assert!((b / a - 4.0).abs() < 1e-3, "{}", b / a);
    }

    #[test]
    fn small_momentum_is_finite_and_tiny() {
        let p = params(1e-3);
        let v = beta_k_squared(&p, 1e-4).unwrap();
        assert!(v.is_finite() && v >= 0.0 && v < 1e-300);
        let v = beta_k_squared(&p, 0.02).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn log_domain_agrees_near_switch() {
        let p = params(1e-3);
        // the summed argument crosses the switch at k_switch; ln|β|² must
        // stay smooth across it (second difference ~ curvature only)
        let k_switch = 2.0 * PI * p.eta_ratio / LOG_DOMAIN_ARG;
        let ln = |s: f64| beta_k_squared(&p, k_switch * s).unwrap().ln();
        let (a, b, c) = (ln(0.999), ln(1.0), ln(1.001));
        let below = ln(0.997) - 2.0 * ln(0.998) + ln(0.999);
        let above = ln(1.001) - 2.0 * ln(1.002) + ln(1.003);
        let across = a - 2.0 * b + c;
        let smooth = 0.5 * (below + above);
        assert!((across - smooth).abs() < 1e-7, "{across} {smooth}");
    }

    #[test]
    fn degenerate_for_b_at_least_one() {
        assert!(matches!(
            beta_k_squared(&params(1.0), 1.0),
            Err(BogoliubovError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn constant_approx_cases() {
        let zero = thermal_constant_approx(&params(0.0), 0.3, 0.7, 16).unwrap();
        assert_eq!((zero.mean, zero.max_relative_deviation), (0.0, 0.0));
        let one = thermal_constant_approx(&params(1e-3), 0.3, 0.7, 1).unwrap();
        assert_eq!(one.max_relative_deviation, 0.0);
        // 40-digit sampling of the same 32-point log grid
        let r = thermal_constant_approx(&params(1e-3), 0.3, 0.7, 32).unwrap();
        assert!(((r.mean - 1.575518851682787294e-13) / 1.5755e-13).abs() < 1e-10);
        assert!(((r.max_relative_deviation - 11.21327320374079729) / 11.2133).abs() < 1e-10);
    }
}
