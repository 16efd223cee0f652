//! Globally adaptive 1-D quadrature.
//!
//! The interval is split at caller-supplied breakpoints, then the segment with
//! the largest error estimate is bisected until the summed estimate meets
//! `max(rel_tol·|I|, abs_tol)`. Two panel rules are available: Simpson with a
//! Richardson correction, and 10-point Gauss–Legendre compared against its
//! two-panel composite.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("quadrature did not converge on [{a}, {b}]: error {error:e} > target {target:e} after {segments} segments")]
    NonConvergence { a: f64, b: f64, error: f64, target: f64, segments: usize },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    AdaptiveSimpson,
    GaussLegendre,
}

/// How the nested ∫k dk ∫ω dω measure of the energy integrals is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    /// Inner variable sweeps [0, ω(k)]: weight k·ω²/2.
    IteratedInner,
    /// dω = ω′(k)·dk along the curve: weight k·ω·ω′.
    ChainRule,
}

impl Interpretation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Interpretation::IteratedInner => "iterated-inner",
            Interpretation::ChainRule => "chain-rule",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub method: QuadratureMethod,
    pub rel_tol: f64,
    /// Absolute floor; keeps the stopping rule meaningful at subnormal scales.
    pub abs_tol: f64,
    /// Maximum bisection depth of any segment.
    pub max_subdivisions: u32,
    pub interpretation: Interpretation,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::AdaptiveSimpson,
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 60,
            interpretation: Interpretation::IteratedInner,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidConfig("rel_tol must be positive".into()));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidConfig("abs_tol must be positive".into()));
        }
        if self.max_subdivisions < 10 {
            return Err(QuadratureError::InvalidConfig(
                "max_subdivisions must be at least 10".into(),
            ));
        }
        Ok(())
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// hard cap on live segments, independent of depth
const MAX_SEGMENTS: usize = 1 << 20;
const GL_ORDER: usize = 10;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    depth: u32,
    /// Coarse rule on [a, b].
    whole: f64,
    /// Fine rule on the halves.
    left: f64,
    right: f64,
    /// Simpson only: f(a), f(a + h/4), f(m), f(b − h/4), f(b).
    f: [f64; 5],
}

impl Segment {
    fn value(&self, method: QuadratureMethod) -> f64 {
        let fine = self.left + self.right;
        match method {
            QuadratureMethod::AdaptiveSimpson => fine + (fine - self.whole) / 15.0,
            QuadratureMethod::GaussLegendre => fine,
        }
    }

    fn error(&self, method: QuadratureMethod) -> f64 {
        let d = (self.left + self.right - self.whole).abs();
        match method {
            QuadratureMethod::AdaptiveSimpson => d / 15.0,
            QuadratureMethod::GaussLegendre => d,
        }
    }
}

struct Ranked {
    error: f64,
    seg: Segment,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seg.a.total_cmp(&self.seg.a))
    }
}

struct Integrator<'f, F> {
    f: &'f mut F,
    method: QuadratureMethod,
}

impl<F, E> Integrator<'_, F>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    fn eval(&mut self, x: f64) -> Result<f64, E> {
        let y = (self.f)(x)?;
        if !y.is_finite() {
            return Err(QuadratureError::NonFinite { x }.into());
        }
        Ok(y)
    }

    fn gl(&mut self, a: f64, b: f64) -> Result<f64, E> {
        let (nodes, weights) = gauss_legendre();
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut terms = [0.0; GL_ORDER];
        for i in 0..GL_ORDER {
            terms[i] = weights[i] * self.eval(c + h * nodes[i])?;
        }
        Ok(h * compensated_sum(terms))
    }

    /// Builds a segment; `whole` and the endpoint/midpoint samples are
    /// reused from the parent when available.
    fn segment(
        &mut self,
        a: f64,
        b: f64,
        depth: u32,
        whole: Option<f64>,
        known: Option<(f64, f64, f64)>,
    ) -> Result<Segment, E> {
        let m = 0.5 * (a + b);
        match self.method {
            QuadratureMethod::AdaptiveSimpson => {
                let (fa, fm, fb) = match known {
                    Some(k) => k,
                    None => (self.eval(a)?, self.eval(m)?, self.eval(b)?),
                };
                let fl = self.eval(0.5 * (a + m))?;
                let fr = self.eval(0.5 * (m + b))?;
                let h = b - a;
                let whole = whole.unwrap_or(h / 6.0 * (fa + 4.0 * fm + fb));
                Ok(Segment {
                    a,
                    b,
                    depth,
                    whole,
                    left: h / 12.0 * (fa + 4.0 * fl + fm),
                    right: h / 12.0 * (fm + 4.0 * fr + fb),
                    f: [fa, fl, fm, fr, fb],
                })
            }
            QuadratureMethod::GaussLegendre => {
                let whole = match whole {
                    Some(w) => w,
                    None => self.gl(a, b)?,
                };
                let left = self.gl(a, m)?;
                let right = self.gl(m, b)?;
                Ok(Segment { a, b, depth, whole, left, right, f: [0.0; 5] })
            }
        }
    }

    fn split(&mut self, s: &Segment) -> Result<(Segment, Segment), E> {
        let m = 0.5 * (s.a + s.b);
        let d = s.depth + 1;
        let l = self.segment(s.a, m, d, Some(s.left), Some((s.f[0], s.f[1], s.f[2])))?;
        let r = self.segment(m, s.b, d, Some(s.right), Some((s.f[2], s.f[3], s.f[4])))?;
        Ok((l, r))
    }
}

/// Integrates `f` over `[a, b]`, pre-splitting at any `breakpoints` strictly
/// inside the interval.
pub fn integrate<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadratureError::InvalidConfig(format!("bad interval [{a}, {b}]")).into());
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let method = cfg.method;
    let mut integ = Integrator { f: &mut f, method };

    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Segment> = Vec::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in edges.windows(2) {
        let s = integ.segment(w[0], w[1], 0, None, None)?;
        total += s.value(method);
        err += s.error(method);
        heap.push(Ranked { error: s.error(method), seg: s });
    }

    let target = |total: f64| (cfg.rel_tol * total.abs()).max(cfg.abs_tol);
    loop {
        if err <= target(total) {
            // recompute exactly before accepting; incremental updates drift
            let all: Vec<Segment> = done.iter().copied().chain(heap.iter().map(|r| r.seg)).collect();
            total = compensated_sum(all.iter().map(|s| s.value(method)));
            err = compensated_sum(all.iter().map(|s| s.error(method)));
            if err <= target(total) {
                return Ok(Estimate { value: total, error: err });
            }
        }
        let Some(Ranked { seg, .. }) = heap.pop() else {
            break;
        };
        let m = 0.5 * (seg.a + seg.b);
        if seg.depth >= cfg.max_subdivisions || m <= seg.a || m >= seg.b {
            // cannot refine further; keep it and try the others
            done.push(seg);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if heap.len() + done.len() >= MAX_SEGMENTS {
            heap.push(Ranked { error: seg.error(method), seg });
            break;
        }
        let (l, r) = integ.split(&seg)?;
        total += l.value(method) + r.value(method) - seg.value(method);
        err += l.error(method) + r.error(method) - seg.error(method);
        heap.push(Ranked { error: l.error(method), seg: l });
        heap.push(Ranked { error: r.error(method), seg: r });
    }

    let all: Vec<Segment> = done.iter().copied().chain(heap.iter().map(|r| r.seg)).collect();
    let total = compensated_sum(all.iter().map(|s| s.value(method)));
    let err = compensated_sum(all.iter().map(|s| s.error(method)));
    if err <= target(total) {
        return Ok(Estimate { value: total, error: err });
    }
    Err(QuadratureError::NonConvergence {
        a,
        b,
        error: err,
        target: target(total),
        segments: all.len(),
    }
    .into())
}
