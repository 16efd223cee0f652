use transplanck::dispersion::{DispersionError, DispersionModel, FrequencyLaw, Linear};
use transplanck::reconstruct::{
    estimate_truncation_error, march, Normalization, ReconstructError, ReconstructionConfig,
    Regime, SignMode, TauGrid,
};

/// ω ≡ 0.
struct Frozen;

impl FrequencyLaw for Frozen {
    fn omega_squared(&self, _k: f64) -> Result<f64, DispersionError> {
        Ok(0.0)
    }
    fn k_p(&self) -> f64 {
        1.0
    }
}

fn constant_k(k0: f64, end: f64, steps: usize) -> ReconstructionConfig {
    ReconstructionConfig {
        k_init: k0,
        c1: 0.0,
        k_evol: 1.0,
        exponent: 1.0,
        tau: TauGrid::Uniform { start: 0.0, end, steps },
        a1: 1.0,
        a_initial: None,
        tau_star: None,
        sign_mode: SignMode::Growing,
        normalization: Normalization::SecondDerivative,
        regime_eps: 0.05,
    }
}

fn final_a<L: FrequencyLaw>(cfg: &ReconstructionConfig, law: &L) -> f64 {
    *march(cfg, law).unwrap().a.last().unwrap()
}

#[test]
fn cosh_error_halves_quarterly() {
    let exact = 2f64.cosh();
    let err = |steps| (final_a(&constant_k(1.0, 2.0, steps), &Frozen) - exact).abs();
    let (e1, e2, e3) = (err(1000), err(2000), err(4000));
    for r in [e1 / e2, e2 / e3] {
        assert!((r - 4.0).abs() < 1.0, "ratio {r}");
    }
}

/// Smooth variable-k run across the ModifiedMS hump region.
fn smooth_run(steps: usize) -> ReconstructionConfig {
    ReconstructionConfig {
        k_init: 0.1,
        c1: 1.0,
        k_evol: 0.5,
        exponent: 1.0,
        tau: TauGrid::Uniform { start: 0.0, end: 1.0, steps },
        ..constant_k(0.0, 1.0, steps)
    }
}

#[test]
fn second_order_against_richardson_reference() {
    let law = DispersionModel::ModifiedMs { alpha: 1.0, beta: 1.0, k_p: 1.0 };
    let fine = final_a(&smooth_run(200_000), &law);
    let finer = final_a(&smooth_run(400_000), &law);
    let reference = finer + (finer - fine) / 3.0;
    let scaled: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| {
            let h = 1.0 / n as f64;
            (final_a(&smooth_run(n), &law) - reference).abs() / (h * h)
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 2.0, "{scaled:?}");
}

#[test]
fn midpoint_refinement_within_truncation_estimate() {
    let law = DispersionModel::ModifiedMs { alpha: 1.0, beta: 1.0, k_p: 1.0 };
    let n = 401;
    let coarse: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64).powf(1.5)).collect();
    let mut fine = Vec::with_capacity(2 * n - 1);
    for w in coarse.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*coarse.last().unwrap());
    let cfg = |grid: Vec<f64>| ReconstructionConfig { tau: TauGrid::Explicit(grid), ..smooth_run(1) };
    let c = cfg(coarse);
    let est = estimate_truncation_error(&c, &law).unwrap();
    let a_coarse = final_a(&c, &law);
    let a_fine = final_a(&cfg(fine), &law);
    assert!((a_fine - a_coarse).abs() < 4.0 * est, "{} vs {est}", (a_fine - a_coarse).abs());
}

#[test]
fn momentum_identity_at_every_node() {
    let law = DispersionModel::ModifiedMs { alpha: 1.0, beta: 10.0, k_p: 1.0 };
    let t = march(&smooth_run(500), &law).unwrap();
    for i in 0..t.len() {
        let w2 = law.omega_squared(t.k[i]).unwrap();
        let k2 = t.k[i] * t.k[i];
        assert!(((t.u_t[i] + w2) - k2).abs() <= 1e-12 * k2);
    }
}

#[test]
fn sign_modes_coincide_when_omega_equals_k() {
    let law = Linear { alpha: 1.0, k_p: 10.0 };
    let mut c = smooth_run(300);
    c.a_initial = Some(0.99);
    let a = march(&c, &law).unwrap();
    c.sign_mode = SignMode::Oscillating;
    let b = march(&c, &law).unwrap();
    assert_eq!(a.a, b.a);
    assert!(a.regime.iter().all(|r| *r == Regime::LinearGrowth));
}

#[test]
fn frozen_law_is_exponential_everywhere() {
    let t = march(&constant_k(1.0, 1.0, 100), &Frozen).unwrap();
    assert!(t.regime.iter().all(|r| *r == Regime::ExponentialGrowth));
}

#[test]
fn regimes_appear_in_order_across_the_hump() {
    // k from 1e-7 up to ~0.99·k_p
    let law = DispersionModel::ModifiedMs { alpha: 1.0, beta: 1000.0, k_p: 1.0 };
    let c = ReconstructionConfig {
        k_init: 1e-7,
        c1: 1.0,
        k_evol: 0.99e-4,
        exponent: 4.0,
        tau: TauGrid::Uniform { start: 0.0, end: 10.0, steps: 10_000 },
        ..constant_k(0.0, 1.0, 1)
    };
    let t = march(&c, &law).unwrap();
    let rank = |r: &Regime| match r {
        Regime::LinearGrowth => 0,
        Regime::Intermediate => 1,
        Regime::ExponentialGrowth => 2,
    };
    let ranks: Vec<i32> = t.regime.iter().map(rank).collect();
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    for want in 0..3 {
        assert!(ranks.contains(&want), "missing regime {want}");
    }
    assert!(t.zero_crossings.is_empty());
    assert!(t.a.iter().all(|&a| a > 0.0));
}

#[test]
fn runaway_growth_is_reported() {
    let r = march(&constant_k(100.0, 10.0, 1000), &Frozen);
    assert!(matches!(r, Err(ReconstructError::BlowUp { .. })));
}

#[test]
fn momentum_beyond_cutoff_is_rejected() {
    let law = DispersionModel::ModifiedMs { alpha: 1.0, beta: 1.0, k_p: 1.0 };
    let r = march(&constant_k(1.5, 1.0, 10), &law);
    assert!(matches!(
        r,
        Err(ReconstructError::Dispersion(DispersionError::OutOfDomain { .. }))
    ));
}
