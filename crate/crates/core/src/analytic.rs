//! Closed-form adoption curves and asymptotics.
//!
//! Everything here is a pure function of time and the two influence rates:
//! the S-shaped Bass curve (the tight universal upper bound), the two-node
//! curve (the tight universal lower bound), the infinite-circle curve, the
//! trivial exponential bounds, and half-life solvers on top of them.

use thiserror::Error;

/// External rate `p` and maximal internal rate `q`, both in 1/time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BassParams {
    p: f64,
    q: f64,
}

impl BassParams {
    /// # Panics
    /// If `p <= 0`, `q < 0`, or either is non-finite. `q = 0` is admitted
    /// for degenerate checks (pure external adoption).
    pub fn new(p: f64, q: f64) -> Self {
        assert!(p.is_finite() && p > 0.0, "p must be a positive finite rate, got {p}");
        assert!(q.is_finite() && q >= 0.0, "q must be a non-negative finite rate, got {q}");
        Self { p, q }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Ratio of internal to external influence rates.
    pub fn lambda(&self) -> f64 {
        self.q / self.p
    }
}

/// Result of a half-life search: the time at which a curve crosses 1/2.
#[derive(Debug, Clone, Copy)]
pub struct HalfLifeResult {
    pub t_half: f64,
    /// `f(t_half) - 1/2` at the returned point.
    pub residual: f64,
    /// Bisection iterations spent after bracketing.
    pub iterations: u32,
}

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("curve never reaches 1/2: bracket not found within {0} doublings of the hint")]
    BracketNotFound(u32),
    #[error("bisection stalled before reaching the residual tolerance (best residual {0:e})")]
    NoConvergence(f64),
}

/// Residual tolerance for half-life bisection.
pub const HALF_LIFE_TOL: f64 = 1e-10;

/// Relative switch threshold between the two branches of [`f_two_node`].
pub const TWO_NODE_BRANCH_THRESHOLD: f64 = 1e-8;

fn assert_time(t: f64) {
    assert!(t.is_finite() && t >= 0.0, "time must be non-negative and finite, got {t}");
}

/// The Bass curve `(1 - e^{-(p+q)t}) / (1 + (q/p) e^{-(p+q)t})`.
///
/// # Panics
/// On negative or non-finite `t`.
pub fn f_bass(t: f64, params: &BassParams) -> f64 {
    assert_time(t);
    let (p, q) = (params.p, params.q);
    let e = (-(p + q) * t).exp();
    let f = (-(-(p + q) * t).exp_m1()) / (1.0 + (q / p) * e);
    f.clamp(0.0, 1.0)
}

/// Expected adoption level on the homogeneous two-node network.
///
/// For `p != q` this is `1 - e^{-pt} (q e^{-pt} - p e^{-qt}) / (q - p)`;
/// within a relative distance [`TWO_NODE_BRANCH_THRESHOLD`] of `p = q` the
/// analytic limit `1 - e^{-2pt} (1 + pt)` is returned instead. The `p != q`
/// branch is evaluated through `expm1` when `|q - p| t` is small, so the
/// two branches agree across the switch.
///
/// # Panics
/// On negative or non-finite `t`.
pub fn f_two_node(t: f64, params: &BassParams) -> f64 {
    assert_time(t);
    let (p, q) = (params.p, params.q);
    let pt = p * t;
    let f = if (q - p).abs() <= TWO_NODE_BRANCH_THRESHOLD * p.max(q) {
        1.0 - (-2.0 * pt).exp() * (1.0 + pt)
    } else {
        let x = (q - p) * t;
        if x.abs() <= 1.0 {
            // 1 - e^{-2pt} (1 + pt * phi(x)), phi(x) = (1 - e^{-x}) / x;
            // cancellation-free where the direct form loses digits.
            let phi = if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x };
            1.0 - (-2.0 * pt).exp() * (1.0 + pt * phi)
        } else {
            1.0 - (-pt).exp() * (q * (-pt).exp() - p * (-q * t).exp()) / (q - p)
        }
    };
    f.clamp(0.0, 1.0)
}

/// Adoption level on the infinite circle,
/// `1 - e^{-(p+q)t + q (1 - e^{-pt}) / p}`.
///
/// # Panics
/// On negative or non-finite `t`.
pub fn f_one_d(t: f64, params: &BassParams) -> f64 {
    assert_time(t);
    let (p, q) = (params.p, params.q);
    let exponent = -(p + q) * t + q * (-(-p * t).exp_m1()) / p;
    (-exponent.exp_m1()).clamp(0.0, 1.0)
}

/// The immediate exponential bounds `(1 - e^{-pt}, 1 - e^{-(p+q)t})`.
///
/// # Panics
/// On negative or non-finite `t`.
pub fn trivial_bounds(t: f64, params: &BassParams) -> (f64, f64) {
    assert_time(t);
    let lower = (-(-params.p * t).exp_m1()).clamp(0.0, 1.0);
    let upper = (-(-(params.p + params.q) * t).exp_m1()).clamp(0.0, 1.0);
    (lower, upper)
}

/// Time at which a monotone curve reaches 1/2.
///
/// The bracket is grown from `t_hint` by doubling (at most 200 times), then
/// bisected until `|f(t) - 1/2| <= 1e-10`. The curve must be continuous and
/// non-decreasing with `curve(0) = 0`.
pub fn half_life<F: Fn(f64) -> f64>(curve: F, t_hint: f64) -> Result<HalfLifeResult, AnalyticError> {
    assert!(t_hint.is_finite() && t_hint > 0.0, "t_hint must be positive, got {t_hint}");
    const MAX_DOUBLINGS: u32 = 200;
    let mut hi = t_hint;
    let mut doublings = 0;
    while curve(hi) < 0.5 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(AnalyticError::BracketNotFound(MAX_DOUBLINGS));
        }
        hi *= 2.0;
    }
    let mut lo = 0.0_f64;
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let residual = curve(mid) - 0.5;
        if residual.abs() <= HALF_LIFE_TOL {
            return Ok(HalfLifeResult { t_half: mid, residual, iterations });
        }
        if mid <= lo || mid >= hi {
            // interval exhausted at f64 resolution
            return Err(AnalyticError::NoConvergence(residual));
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
}

/// Asymptotic half-life ratio `(2 / log 2) (1 / lambda) log lambda` of the
/// upper to the lower bound, valid for `lambda = q/p >> 1`.
///
/// # Panics
/// If `lambda <= 1`.
pub fn half_life_ratio_asymptotic(lambda: f64) -> f64 {
    assert!(lambda.is_finite() && lambda > 1.0, "asymptote requires lambda > 1, got {lambda}");
    (2.0 / std::f64::consts::LN_2) * lambda.ln() / lambda
}
