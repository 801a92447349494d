//! Poisson-model discrepancy: non-negative integer counts.
//!
//! Rates are positive intensities rather than probabilities; the feasible
//! box is `[floor, cap]` with the cap derived from the data. The `ln m!`
//! terms cancel between the alternative and null likelihoods and are
//! dropped throughout.

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::{Error, Result};
use crate::geom::KernelRegion;
use crate::likelihood::solver::{maximize, RateObjective};
use crate::likelihood::{rate_mix, xlogy, DiscrepancyResult, RatePair, SolverConfig, ValueView};

/// Upper bound for the intensity search: `max(1, 2 * max m)`.
pub fn rate_cap(data: &LabeledDataset) -> f64 {
    let max_m = data.measured.iter().copied().fold(0.0f64, f64::max);
    (2.0 * max_m).max(1.0)
}

fn rate_floor(cap: f64) -> f64 {
    1e-9 * cap.max(1.0)
}

/// Null maximum likelihood: mean count and the normalized null
/// log-likelihood `(1/n) sum (-mean + m ln mean)`.
pub fn null_mle(data: &LabeledDataset) -> Result<(f64, f64)> {
    data.require_model("null_mle_poisson", MeasurementModel::Poisson)?;
    let n = data.len() as f64;
    let mean = data.measured_mean();
    let ell0 = data
        .measured
        .iter()
        .map(|&m| -mean + xlogy(m, mean))
        .sum::<f64>()
        / n;
    Ok((mean, ell0))
}

/// Normalized alternative log-likelihood `(1/n) sum (-g + m ln g)`.
///
/// Rejects rates that zero the intensity at a point with a positive count.
pub fn alt_loglik(data: &LabeledDataset, region: &KernelRegion, rates: RatePair) -> Result<f64> {
    data.require_model("alt_loglik_poisson", MeasurementModel::Poisson)?;
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let g = rate_mix(k, rates.p, rates.q).0;
        if m > 0.0 && g <= 0.0 {
            return Err(Error::RateAtBoundary("0"));
        }
        sum += -g + xlogy(m, g);
    }
    Ok(sum / data.len() as f64)
}

/// Gradient of [`alt_loglik`] with respect to `(p, q)`.
pub fn grad(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<(f64, f64)> {
    data.require_model("grad_poisson", MeasurementModel::Poisson)?;
    let mut dp = 0.0;
    let mut dq = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let g = rate_mix(k, rates.p, rates.q).0;
        if m > 0.0 && g <= 0.0 {
            return Err(Error::RateAtBoundary("0"));
        }
        let factor = if m > 0.0 { m / g - 1.0 } else { -1.0 };
        dp += k * factor;
        dq += (1.0 - k) * factor;
    }
    let n = data.len() as f64;
    Ok((dp / n, dq / n))
}

/// Poisson objective over a prepared view, with box projection.
pub(crate) struct PoissonObjective<'a> {
    pub view: &'a ValueView,
    pub cap: f64,
}

impl RateObjective for PoissonObjective<'_> {
    fn value(&self, p: f64, q: f64) -> f64 {
        let mut sum = 0.0;
        for (&k, &m) in self.view.k.iter().zip(&self.view.m) {
            let g = rate_mix(k, p, q).0;
            sum += -g + xlogy(m, g);
        }
        let g0 = rate_mix(0.0, p, q).0;
        sum += -(self.view.tail.count() as f64) * g0 + xlogy(self.view.tail.sum_m, g0);
        sum / self.view.n_total as f64
    }

    fn grad(&self, p: f64, q: f64) -> (f64, f64) {
        let mut dp = 0.0;
        let mut dq = 0.0;
        for (&k, &m) in self.view.k.iter().zip(&self.view.m) {
            let g = rate_mix(k, p, q).0;
            let factor = if m > 0.0 { m / g - 1.0 } else { -1.0 };
            dp += k * factor;
            dq += (1.0 - k) * factor;
        }
        let g0 = rate_mix(0.0, p, q).0;
        dq += -(self.view.tail.count() as f64) + self.view.tail.sum_m / g0;
        let n = self.view.n_total as f64;
        (dp / n, dq / n)
    }

    fn project(&self, p: f64, q: f64) -> (f64, f64) {
        let floor = rate_floor(self.cap);
        (p.clamp(floor, self.cap), q.clamp(floor, self.cap))
    }
}

/// Maximizes the Poisson discrepancy over `(p, q)` at one kernel region.
pub fn solve_phi(
    data: &LabeledDataset,
    region: &KernelRegion,
    config: &SolverConfig,
) -> Result<DiscrepancyResult> {
    data.require_model("solve_phi_poisson", MeasurementModel::Poisson)?;
    let view = ValueView::full(data, region);
    let (q0, ell0) = null_mle(data)?;
    Ok(solve_phi_view(&view, q0, ell0, config))
}

pub(crate) fn solve_phi_view(
    view: &ValueView,
    q0: f64,
    ell0: f64,
    config: &SolverConfig,
) -> DiscrepancyResult {
    if q0 == 0.0 {
        // No counts anywhere: both rates ride the zero boundary.
        return DiscrepancyResult::null_result(0.0);
    }
    if view.all_zero_weight() {
        return DiscrepancyResult::null_result(q0);
    }
    let cap = (2.0 * view.max_measured).max(1.0);
    let obj = PoissonObjective { view, cap };
    let start = match config.warm_start {
        Some(w) => (w.p, w.q),
        None => ((q0 * 1.1 + 0.01).min(cap), q0),
    };
    let out = maximize(&obj, start, config.max_steps, config.grad_tolerance);

    let mut result = DiscrepancyResult {
        phi: out.value - ell0,
        rates: RatePair { p: out.p, q: out.q },
        steps_used: out.steps,
        conservation_residual: None,
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

/// Binary-setting log-likelihood: each point's count is Poisson at `p` with
/// probability `K(x)`, at `q` otherwise. Evaluation only; `ln m!` dropped.
pub fn binary_setting_loglik(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
) -> Result<f64> {
    data.require_model("binary_setting_loglik_poisson", MeasurementModel::Poisson)?;
    if rates.p < 0.0 || rates.q < 0.0 {
        return Err(Error::InvalidParameter(
            "Poisson intensities must be non-negative".into(),
        ));
    }
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let a = -rates.p + xlogy(m, rates.p);
        let b = -rates.q + xlogy(m, rates.q);
        sum += if k == 1.0 {
            a
        } else if k == 0.0 {
            b
        } else {
            let hi = a.max(b);
            hi + (k * (a - hi).exp() + (1.0 - k) * (b - hi).exp()).ln()
        };
    }
    Ok(sum / data.len() as f64)
}
