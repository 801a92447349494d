//! Bernoulli-model discrepancy: measured values in {0, 1}.

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::{Error, Result};
use crate::geom::KernelRegion;
use crate::likelihood::solver::maximize_traced;
use crate::likelihood::{rate_mix, xlogy, BernoulliView, DiscrepancyResult, RatePair, SolverConfig};

/// Null maximum likelihood: background rate `|M| / |B|` and the normalized
/// null log-likelihood at it (`0 ln 0 = 0` at the degenerate extremes).
pub fn null_mle(data: &LabeledDataset) -> Result<(f64, f64)> {
    data.require_model("null_mle_bernoulli", MeasurementModel::Bernoulli)?;
    let n = data.len() as f64;
    let m = data.measured_count() as f64;
    let q0 = m / n;
    let ell0 = (xlogy(m, q0) + xlogy(n - m, 1.0 - q0)) / n;
    Ok((q0, ell0))
}

/// Normalized alternative log-likelihood at the given rates.
///
/// Rejects rate pairs that drive any per-point rate exactly to 0 or 1.
pub fn alt_loglik(data: &LabeledDataset, region: &KernelRegion, rates: RatePair) -> Result<f64> {
    data.require_model("alt_loglik_bernoulli", MeasurementModel::Bernoulli)?;
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let (g, gc) = rate_mix(k, rates.p, rates.q);
        if g <= 0.0 || gc <= 0.0 {
            return Err(Error::RateAtBoundary(if g <= 0.0 { "0" } else { "1" }));
        }
        sum += if m > 0.5 { g.ln() } else { gc.ln() };
    }
    Ok(sum / data.len() as f64)
}

/// Binary-setting log-likelihood: each point's rate is `p` with probability
/// `K(x)` and `q` otherwise. For Bernoulli data the per-point mixture terms
/// reduce to exactly the continuous-setting expressions, so this evaluates
/// bit-identically to [`alt_loglik`].
pub fn binary_setting_loglik(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<f64> {
    data.require_model("binary_setting_loglik_bernoulli", MeasurementModel::Bernoulli)?;
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        // Mixture term p^m (1-p)^(1-m) K + q^m (1-q)^(1-m) (1-K): for m = 1
        // this is p K + q (1-K); for m = 0 it is (1-p) K + (1-q) (1-K).
        let (g, gc) = rate_mix(k, rates.p, rates.q);
        if g <= 0.0 || gc <= 0.0 {
            return Err(Error::RateAtBoundary(if g <= 0.0 { "0" } else { "1" }));
        }
        sum += if m > 0.5 { g.ln() } else { gc.ln() };
    }
    Ok(sum / data.len() as f64)
}

/// Gradient of [`alt_loglik`] with respect to `(p, q)`.
pub fn grad(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<(f64, f64)> {
    data.require_model("grad_bernoulli", MeasurementModel::Bernoulli)?;
    let mut dp = 0.0;
    let mut dq = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let (g, gc) = rate_mix(k, rates.p, rates.q);
        if g <= 0.0 || gc <= 0.0 {
            return Err(Error::RateAtBoundary(if g <= 0.0 { "0" } else { "1" }));
        }
        if m > 0.5 {
            dp += k / g;
            dq += (1.0 - k) / g;
        } else {
            dp -= k / gc;
            dq -= (1.0 - k) / gc;
        }
    }
    let n = data.len() as f64;
    Ok((dp / n, dq / n))
}

/// Deviation from the stationarity identities at `(p, q)`:
/// `|sum over measured of 1/g - n| / n` and the analogue over unmeasured
/// with `1/(1-g)`. Both vanish at an interior optimum.
pub fn conservation_residual(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<(f64, f64)> {
    data.require_model("conservation_residual", MeasurementModel::Bernoulli)?;
    let n = data.len() as f64;
    let mut inv_meas = 0.0;
    let mut inv_unmeas = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let (g, gc) = rate_mix(k, rates.p, rates.q);
        if m > 0.5 {
            inv_meas += 1.0 / g;
        } else {
            inv_unmeas += 1.0 / gc;
        }
    }
    Ok(((inv_meas - n).abs() / n, (inv_unmeas - n).abs() / n))
}

/// True iff every measured point has rate at least `1/n` and every
/// unmeasured point has rate at most `(n-1)/n`.
pub fn feasibility_bounds(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<bool> {
    data.require_model("feasibility_bounds", MeasurementModel::Bernoulli)?;
    let n = data.len() as f64;
    let lo = 1.0 / n;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let (g, gc) = rate_mix(k, rates.p, rates.q);
        if m > 0.5 {
            if g < lo {
                return Ok(false);
            }
        } else if gc < lo {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Default solver start given the null rate: background at `q0`, elevated a
/// step above it (capped inside the feasible box).
pub(crate) fn default_start(n: usize, q0: f64) -> (f64, f64) {
    let hi = 1.0 - 1.0 / n as f64;
    ((q0 + 0.1).min(hi), q0)
}

/// Maximizes the Bernoulli discrepancy over `(p, q)` at one kernel region.
pub fn solve_phi(
    data: &LabeledDataset,
    region: &KernelRegion,
    config: &SolverConfig,
) -> Result<DiscrepancyResult> {
    data.require_model("solve_phi_bernoulli", MeasurementModel::Bernoulli)?;
    let view = BernoulliView::full(data, region);
    let (q0, ell0) = null_mle(data)?;
    Ok(solve_phi_view(&view, q0, ell0, config, |_, _| {}))
}

/// [`solve_phi`] additionally reporting every solver iterate.
pub fn solve_phi_traced(
    data: &LabeledDataset,
    region: &KernelRegion,
    config: &SolverConfig,
) -> Result<(DiscrepancyResult, Vec<RatePair>)> {
    data.require_model("solve_phi_bernoulli", MeasurementModel::Bernoulli)?;
    let view = BernoulliView::full(data, region);
    let (q0, ell0) = null_mle(data)?;
    let mut trace = Vec::new();
    let result = solve_phi_view(&view, q0, ell0, config, |p, q| {
        trace.push(RatePair { p, q });
    });
    Ok((result, trace))
}

/// Solver core over a prepared evaluation view.
pub(crate) fn solve_phi_view(
    view: &BernoulliView,
    q0: f64,
    ell0: f64,
    config: &SolverConfig,
    on_iterate: impl FnMut(f64, f64),
) -> DiscrepancyResult {
    let n = view.n_total;
    let m = view.measured_total();
    if m == 0 || m == n {
        // No contrast between classes: the null maximizes the alternative.
        return DiscrepancyResult::null_result(q0);
    }
    if view.all_zero_weight() {
        // The kernel sees no point; the likelihood depends on q alone and
        // the null rate maximizes it.
        return DiscrepancyResult::null_result(q0);
    }

    let start = match config.warm_start {
        Some(w) => (w.p, w.q),
        None => default_start(n, q0),
    };
    let out = maximize_traced(view, start, config.max_steps, config.grad_tolerance, on_iterate);

    let (res_m, res_b) = view.conservation(out.p, out.q);
    let mut result = DiscrepancyResult {
        phi: out.value - ell0,
        rates: RatePair { p: out.p, q: out.q },
        steps_used: out.steps,
        conservation_residual: Some(res_m.max(res_b)),
        converged: out.converged,
        degenerate: false,
    };
    if config.enforce_p_ge_q && out.p < out.q {
        result.phi = 0.0;
        result.rates = RatePair { p: q0, q: q0 };
        result.degenerate = true;
    }
    result
}
