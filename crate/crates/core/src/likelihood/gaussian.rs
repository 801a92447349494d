//! Gaussian-model discrepancy: real measured values with known noise scale.
//!
//! Unlike the Bernoulli and Poisson models, the optimal rates have a closed
//! form: the alternative log-likelihood is a quadratic in `(p, q)` whose
//! stationary point solves a 2x2 linear system in five aggregate sums.

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::{Error, Result};
use crate::geom::KernelRegion;
use crate::likelihood::{rate_mix, DiscrepancyResult, RatePair, ValueView};

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// Null maximum likelihood: the mean measured value and the normalized null
/// log-likelihood `-(1 / (2 sigma^2 n)) * sum (m - mean)^2`.
pub fn null_mle(data: &LabeledDataset, sigma: f64) -> Result<(f64, f64)> {
    data.require_model("null_mle_gaussian", MeasurementModel::Gaussian)?;
    check_sigma(sigma)?;
    let n = data.len() as f64;
    let mean = data.measured_mean();
    let ss: f64 = data.measured.iter().map(|&m| (m - mean) * (m - mean)).sum();
    Ok((mean, -ss / (2.0 * sigma * sigma * n)))
}

/// Normalized alternative log-likelihood at fixed rates (additive constants
/// free of `p`, `q` dropped).
pub fn alt_loglik(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
    sigma: f64,
) -> Result<f64> {
    data.require_model("alt_loglik_gaussian", MeasurementModel::Gaussian)?;
    check_sigma(sigma)?;
    let two_s2 = 2.0 * sigma * sigma;
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let g = rate_mix(k, rates.p, rates.q).0;
        let d = m - g;
        // Same per-term shape as the binary-setting mixture exponents, so
        // the two settings agree bit-for-bit when every weight is 0 or 1.
        sum += -(d * d) / two_s2;
    }
    Ok(sum / data.len() as f64)
}

/// Closed-form maximizer of the Gaussian discrepancy at one kernel region.
///
/// When the kernel is constant across the points the 2x2 system is singular
/// and only `p + q` is identified; the result falls back to the null with
/// the degenerate flag set. The same flag fires when `enforce_p_ge_q` clamps
/// an inverted optimum to zero.
pub fn phi_closed_form(
    data: &LabeledDataset,
    region: &KernelRegion,
    sigma: f64,
    enforce_p_ge_q: bool,
) -> Result<DiscrepancyResult> {
    data.require_model("phi_gaussian_closed_form", MeasurementModel::Gaussian)?;
    check_sigma(sigma)?;
    let view = ValueView::full(data, region);
    let (mean, _) = null_mle(data, sigma)?;
    let null_ss: f64 = data.measured.iter().map(|&m| (m - mean) * (m - mean)).sum();
    Ok(phi_closed_form_view(&view, sigma, enforce_p_ge_q, mean, null_ss))
}

/// Closed form over a prepared evaluation view.
pub(crate) fn phi_closed_form_view(
    view: &ValueView,
    sigma: f64,
    enforce_p_ge_q: bool,
    mean: f64,
    null_ss: f64,
) -> DiscrepancyResult {
    let n = view.n_total as f64;

    // Five aggregate sums in one pass; zero-weight tail in closed form.
    let mut sum_km = 0.0; // k * m
    let mut sum_k2 = 0.0; // k^2
    let mut sum_kc = 0.0; // k * (1 - k)
    let mut sum_cm = 0.0; // (1 - k) * m
    let mut sum_c2 = 0.0; // (1 - k)^2
    for (&k, &m) in view.k.iter().zip(&view.m) {
        let c = 1.0 - k;
        sum_km += k * m;
        sum_k2 += k * k;
        sum_kc += k * c;
        sum_cm += c * m;
        sum_c2 += c * c;
    }
    sum_cm += view.tail.sum_m;
    sum_c2 += view.tail.count() as f64;

    let det = sum_kc * sum_kc - sum_k2 * sum_c2;
    let scale = (sum_kc * sum_kc).max(sum_k2 * sum_c2);
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return DiscrepancyResult::null_result(mean);
    }
    let p_hat = (sum_kc * sum_cm - sum_km * sum_c2) / det;
    let q_hat = (sum_km * sum_kc - sum_k2 * sum_cm) / det;

    if enforce_p_ge_q && p_hat < q_hat {
        return DiscrepancyResult::null_result(mean);
    }

    let mut alt_ss = 0.0;
    for (&k, &m) in view.k.iter().zip(&view.m) {
        let d = m - rate_mix(k, p_hat, q_hat).0;
        alt_ss += d * d;
    }
    // Tail residuals (m - q_hat)^2 expanded over the aggregates.
    alt_ss += view.tail.sum_m2 - 2.0 * q_hat * view.tail.sum_m
        + view.tail.count() as f64 * q_hat * q_hat;

    DiscrepancyResult {
        phi: (null_ss - alt_ss) / (2.0 * sigma * sigma * n),
        rates: RatePair { p: p_hat, q: q_hat },
        steps_used: 0,
        conservation_residual: None,
        converged: true,
        degenerate: false,
    }
}

/// Binary-setting log-likelihood: each point draws its mean from `{p, q}`
/// with probability `K(x)`, giving a two-component normal mixture.
/// Evaluation only; additive constants free of `p`, `q` dropped, normalized
/// per point. Stable via log-sum-exp, with exact handling of weights 0 and 1.
pub fn binary_setting_loglik(
    data: &LabeledDataset,
    region: &KernelRegion,
    rates: RatePair,
    sigma: f64,
) -> Result<f64> {
    data.require_model("binary_setting_loglik_gaussian", MeasurementModel::Gaussian)?;
    check_sigma(sigma)?;
    let two_s2 = 2.0 * sigma * sigma;
    let mut sum = 0.0;
    for (point, &m) in data.points.iter().zip(&data.measured) {
        let k = region.eval(point);
        let dp = m - rates.p;
        let dq = m - rates.q;
        let a = -dp * dp / two_s2;
        let b = -dq * dq / two_s2;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    fn gaussian_data(points: Vec<Point>, measured: Vec<f64>) -> LabeledDataset {
        LabeledDataset::new(points, measured, MeasurementModel::Gaussian).unwrap()
    }

    #[test]
    fn null_mle_examples() {
        let d = gaussian_data(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)],
            vec![1.0, 2.0, 3.0],
        );
        let (q0, ell0) = null_mle(&d, 1.0).unwrap();
        assert_eq!(q0, 2.0);
        assert!((ell0 - (-2.0 / 6.0)).abs() < 1e-15);

        let constant = gaussian_data(vec![pt(0.0, 0.0), pt(1.0, 0.0)], vec![5.0, 5.0]);
        let (_, ell0) = null_mle(&constant, 2.0).unwrap();
        assert_eq!(ell0, 0.0);

        let spread = gaussian_data(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)],
            vec![0.0, 0.0, 6.0],
        );
        let (q0, ell0) = null_mle(&spread, 1.0).unwrap();
        assert_eq!(q0, 2.0);
        assert!((ell0 - (-4.0)).abs() < 1e-14);
    }

    #[test]
    fn closed_form_zero_kernel_is_singular() {
        let d = gaussian_data(
            vec![pt(10.0, 10.0), pt(11.0, 10.0), pt(12.0, 10.0)],
            vec![1.0, 2.0, 3.0],
        );
        let far = KernelRegion::truncated(pt(-50.0, -50.0), 1.0, 2.0).unwrap();
        let r = phi_closed_form(&d, &far, 1.0, true).unwrap();
        assert_eq!(r.phi, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.rates.p, 2.0);
    }

    #[test]
    fn closed_form_exact_fit_recovers_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let points: Vec<Point> = (0..40)
            .map(|_| pt(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let region = KernelRegion::new(pt(0.3, -0.2), 1.1).unwrap();
        let (a, b) = (0.6, 0.2);
        let measured: Vec<f64> = points.iter().map(|p| a * region.eval(p) + b).collect();
        let d = gaussian_data(points, measured);
        let sigma = 0.7;
        let r = phi_closed_form(&d, &region, sigma, true).unwrap();
        assert!((r.rates.p - (a + b)).abs() < 1e-10);
        assert!((r.rates.q - b).abs() < 1e-10);
        // Residual sum is zero, so phi equals the null spread term.
        let mean = d.measured_mean();
        let null_ss: f64 = d.measured.iter().map(|&m| (m - mean) * (m - mean)).sum();
        let expect = null_ss / (2.0 * sigma * sigma * d.len() as f64);
        assert!((r.phi - expect).abs() < 1e-10);
        // Residuals themselves vanish.
        let alt = alt_loglik(&d, &region, r.rates, sigma).unwrap();
        assert!(alt.abs() < 1e-10);
    }

    /// Dense grid plus iterative shrinking around the best cell.
    fn quadratic_oracle(
        d: &LabeledDataset,
        region: &KernelRegion,
        sigma: f64,
    ) -> (f64, f64, f64) {
        let f = |p: f64, q: f64| alt_loglik(d, region, RatePair { p, q }, sigma).unwrap();
        let lo = d.measured.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
        let hi = d.measured.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0;
        let (mut pc, mut qc) = (0.5 * (lo + hi), 0.5 * (lo + hi));
        let mut half = 0.5 * (hi - lo);
        let mut best = (pc, qc, f(pc, qc));
        for _ in 0..40 {
            for i in 0..=20 {
                for j in 0..=20 {
                    let p = pc - half + i as f64 * half / 10.0;
                    let q = qc - half + j as f64 * half / 10.0;
                    let v = f(p, q);
                    if v > best.2 {
                        best = (p, q, v);
                    }
                }
            }
            pc = best.0;
            qc = best.1;
            half *= 0.4;
        }
        best
    }

    #[test]
    fn closed_form_matches_numerical_minimization() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(6..20);
            let points: Vec<Point> = (0..n)
                .map(|_| pt(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let measured: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let d = gaussian_data(points, measured);
            let region = KernelRegion::new(pt(0.0, 0.0), rng.gen_range(0.6..1.6)).unwrap();
            let sigma = 1.0;
            let r = phi_closed_form(&d, &region, sigma, false).unwrap();
            let (op, oq, ov) = quadratic_oracle(&d, &region, sigma);
            let cv = alt_loglik(&d, &region, r.rates, sigma).unwrap();
            assert!(cv >= ov - 1e-9, "seed {seed}: closed form below oracle");
            assert!((r.rates.p - op).abs() < 1e-4, "seed {seed}");
            assert!((r.rates.q - oq).abs() < 1e-4, "seed {seed}");
        }
    }

    #[test]
    fn closed_form_is_local_maximum() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let points: Vec<Point> = (0..25)
                .map(|_| pt(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let measured: Vec<f64> = (0..25).map(|_| rng.gen_range(0.0..1.0)).collect();
            let d = gaussian_data(points, measured);
            let region = KernelRegion::new(pt(0.2, 0.1), 1.0).unwrap();
            let r = phi_closed_form(&d, &region, 1.0, false).unwrap();
            let center = alt_loglik(&d, &region, r.rates, 1.0).unwrap();
            for (dx, dy) in [
                (1.0, 0.0),
                (-1.0, 0.0),
                (0.0, 1.0),
                (0.0, -1.0),
                (1.0, 1.0),
                (1.0, -1.0),
                (-1.0, 1.0),
                (-1.0, -1.0),
            ] {
                let nudged = RatePair {
                    p: r.rates.p + 1e-3 * dx,
                    q: r.rates.q + 1e-3 * dy,
                };
                let v = alt_loglik(&d, &region, nudged, 1.0).unwrap();
                assert!(v <= center + 1e-12, "perturbation improved the optimum");
            }
        }
    }

    #[test]
    fn binary_setting_degenerate_weights_match_continuous() {
        // Points exactly at the center (k = 1) or far beyond truncation (k = 0).
        let d = gaussian_data(
            vec![pt(0.0, 0.0), pt(0.0, 0.0), pt(9.0, 0.0), pt(-9.0, 2.0)],
            vec![0.8, 1.3, 0.1, -0.4],
        );
        let region = KernelRegion::truncated(pt(0.0, 0.0), 1.0, 3.0).unwrap();
        let rates = RatePair::new(0.9, 0.2).unwrap();
        let a = binary_setting_loglik(&d, &region, rates, 0.8).unwrap();
        let b = alt_loglik(&d, &region, rates, 0.8).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn binary_setting_equal_rates_is_null() {
        let d = gaussian_data(
            vec![pt(0.0, 0.0), pt(0.5, 0.5), pt(1.0, 0.0)],
            vec![0.3, 0.9, 1.1],
        );
        let region = KernelRegion::new(pt(0.2, 0.2), 0.8).unwrap();
        let sigma = 1.2;
        let v = binary_setting_loglik(&d, &region, RatePair::new(0.7, 0.7).unwrap(), sigma)
            .unwrap();
        let n = d.len() as f64;
        let null: f64 = d
            .measured
            .iter()
            .map(|&m| -(m - 0.7) * (m - 0.7) / (2.0 * sigma * sigma))
            .sum::<f64>()
            / n;
        assert!((v - null).abs() < 1e-12);
    }

    #[test]
    fn binary_setting_matches_direct_mixture() {
        // Direct per-point mixture with compensated summation.
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let n = 30;
            let points: Vec<Point> = (0..n)
                .map(|_| pt(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let measured: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let d = gaussian_data(points.clone(), measured.clone());
            let region = KernelRegion::new(pt(0.0, 0.0), 1.0).unwrap();
            let sigma = 0.9;
            let rates = RatePair::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)).unwrap();
            let v = binary_setting_loglik(&d, &region, rates, sigma).unwrap();

            let mut sum = 0.0;
            let mut comp = 0.0;
            for (p, &m) in points.iter().zip(&measured) {
                let k = region.eval(p);
                let term = (k * (-(m - rates.p).powi(2) / (2.0 * sigma * sigma)).exp()
                    + (1.0 - k) * (-(m - rates.q).powi(2) / (2.0 * sigma * sigma)).exp())
                .ln();
                let y = term - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            let direct = sum / n as f64;
            assert!((v - direct).abs() < 1e-10, "seed {seed}: {v} vs {direct}");
        }
    }
}
