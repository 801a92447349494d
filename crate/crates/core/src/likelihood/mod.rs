//! Statistical discrepancy functions for the Bernoulli, Gaussian, and
//! Poisson measurement models.
//!
//! Each model supplies a null maximum-likelihood baseline and an alternative
//! log-likelihood over a rate pair `(p, q)`, where a point's mean rate is the
//! convex combination `g(x) = K(x) p + (1 - K(x)) q` driven by its kernel
//! weight. The discrepancy `phi` is the difference between the maximized
//! alternative and the maximized null, always normalized per point so values
//! are comparable across dataset sizes.
//!
//! Bernoulli and Poisson maximize by projected gradient ascent
//! ([`bernoulli::solve_phi`], [`poisson::solve_phi`]); the Gaussian optimum
//! has a closed form ([`gaussian::phi_closed_form`]).

pub mod bernoulli;
mod eval;
pub mod gaussian;
pub mod poisson;
mod solver;

pub(crate) use eval::{BernoulliView, ValueView, ZeroTail};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Elevated / background rate pair for the alternative hypothesis.
///
/// For Bernoulli both rates live strictly inside (0, 1); for Poisson they are
/// positive intensities. Degenerate discrepancy results (no anomaly signal)
/// may carry boundary values such as `p = q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub p: f64,
    pub q: f64,
}

impl RatePair {
    /// Validated constructor for Bernoulli-style rates in (0, 1).
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "rate {name} must lie strictly in (0, 1), got {v}"
                )));
            }
        }
        Ok(RatePair { p, q })
    }
}

/// Gradient-ascent configuration for the rate solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Gradient steps per center. A handful suffices under warm starting.
    pub max_steps: usize,
    /// Stop early once the projected gradient norm falls below this.
    pub grad_tolerance: f64,
    /// Starting rates; scans thread the previous center's solution through.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warm_start: Option<RatePair>,
    /// Report phi = 0 when the unconstrained optimum has p < q.
    pub enforce_p_ge_q: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_steps: 4,
            grad_tolerance: 1e-8,
            warm_start: None,
            enforce_p_ge_q: true,
        }
    }
}

impl SolverConfig {
    /// Iterate until the gradient tolerance is met; used by oracle tests.
    pub fn strict() -> Self {
        SolverConfig {
            max_steps: 200_000,
            ..SolverConfig::default()
        }
    }

    pub fn with_warm_start(mut self, warm: RatePair) -> Self {
        self.warm_start = Some(warm);
        self
    }
}

/// Outcome of maximizing a discrepancy at one kernel region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    /// Normalized log-likelihood-ratio value. Non-negative at an exact
    /// optimum; early stopping can leave a tiny negative residue.
    pub phi: f64,
    pub rates: RatePair,
    pub steps_used: usize,
    /// Worst deviation from the stationarity identities
    /// `sum 1/g = n` over measured and `sum 1/(1-g) = n` over unmeasured,
    /// scaled by `1/n`. Bernoulli only.
    pub conservation_residual: Option<f64>,
    /// Solver met its gradient tolerance (or the model has a closed form).
    pub converged: bool,
    /// A fallback fired: degenerate data, all-zero kernel, a singular
    /// closed-form system, or the one-sided clamp.
    pub degenerate: bool,
}

impl DiscrepancyResult {
    pub(crate) fn null_result(q0: f64) -> Self {
        DiscrepancyResult {
            phi: 0.0,
            rates: RatePair { p: q0, q: q0 },
            steps_used: 0,
            conservation_residual: None,
            converged: true,
            degenerate: true,
        }
    }
}

/// Per-point mean rate and its complement under kernel weight `k`.
///
/// Returns `(k p + (1-k) q, k (1-p) + (1-k) (1-q))`. The complement is
/// computed directly rather than as `1 - g`: it avoids cancellation as the
/// rate approaches 1, and it is the exact expression the binary-setting
/// mixture produces for an unmeasured point, so evaluating either setting
/// yields bit-identical terms.
#[inline]
pub(crate) fn rate_mix(k: f64, p: f64, q: f64) -> (f64, f64) {
    let kc = 1.0 - k;
    (p * k + q * kc, (1.0 - p) * k + (1.0 - q) * kc)
}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
#[inline]
pub(crate) fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}
